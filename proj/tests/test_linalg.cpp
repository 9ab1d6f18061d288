#include <random>

#include "doctest.h"
#include "specfilt/linalg.hpp"
#include "specfilt/spectrum_lab.hpp"

using namespace specfilt;

namespace {

constexpr double u = kUnitRoundoff;

ComplexMatrix random_complex(int rows, int cols, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  return specfilt::detail::gaussian_complex(rows, cols, rng);
}

/// Matrix with prescribed singular values via random unitary factors.
ComplexMatrix with_singular_values(const RealVector& sigma, int rows, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  const int cols = static_cast<int>(sigma.size());
  const ComplexMatrix uf = qf(specfilt::detail::gaussian_complex(rows, cols, rng));
  const ComplexMatrix vf = qf(specfilt::detail::gaussian_complex(cols, cols, rng));
  return uf * sigma.asDiagonal() * vf.adjoint();
}

}  // namespace

TEST_CASE("pairwise_sum matches serial summation") {
  std::vector<double> terms;
  double serial = 0.0;
  for (int i = 1; i <= 17; ++i) {
    terms.push_back(1.0 / i);
    serial += 1.0 / i;
  }
  CHECK(pairwise_sum(terms) == doctest::Approx(serial).epsilon(1e-15));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{3.5}) == 3.5);
}

TEST_CASE("qr_householder: identity input") {
  const ComplexMatrix x = ComplexMatrix::Identity(3, 3);
  const QRFactorization f = qr_householder(x);
  CHECK((f.q - ComplexMatrix::Identity(3, 3)).norm() <= 10 * u);
  CHECK((f.r - ComplexMatrix::Identity(3, 3)).norm() <= 10 * u);
}

TEST_CASE("qr_householder: permutation input") {
  ComplexMatrix x(2, 2);
  x << Complex(0), Complex(1), Complex(1), Complex(0);
  const QRFactorization f = qr_householder(x);
  CHECK(std::abs(std::abs(f.q.determinant()) - 1.0) <= 100 * u);
  CHECK((f.q * f.r - x).norm() <= 100 * u);
  // sign convention: diag(R) real and nonnegative
  for (int j = 0; j < 2; ++j) {
    CHECK(f.r(j, j).imag() == 0.0);
    CHECK(f.r(j, j).real() >= 0.0);
  }
}

TEST_CASE("qr_householder: random complex 50x10, Gram-matrix oracle") {
  const ComplexMatrix x = random_complex(50, 10, 42);
  const QRFactorization f = qr_householder(x);
  const ComplexMatrix gram = f.q.adjoint() * f.q - ComplexMatrix::Identity(10, 10);
  CHECK(spectral_norm(gram) <= 5000 * u);
  CHECK(spectral_norm(f.q * f.r - x) <= 100 * 10 * u * spectral_norm(x));
}

TEST_CASE("qr_householder: exact rank collapse reports a degenerate pivot") {
  ComplexMatrix x = ComplexMatrix::Zero(3, 2);
  x(0, 0) = Complex(1.0);
  x(0, 1) = Complex(1.0);  // second column in span of the first, exactly
  CHECK_THROWS_AS(qr_householder(x), DegeneratePivotError);
}

TEST_CASE("qr invariants over random instances with condition numbers 1e0..1e12") {
  int count = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 12 + (inst % 5) * 7;
    const int m = 3 + (inst % 4) * 2;
    const double kappa = std::pow(10.0, (inst % 7) * 2.0);  // 1e0 .. 1e12
    RealVector sigma(m);
    for (int i = 0; i < m; ++i)
      sigma(i) = std::pow(kappa, -static_cast<double>(i) / std::max(1, m - 1));
    const ComplexMatrix x = with_singular_values(sigma, n, 1000 + inst);
    const QRFactorization f = qr_householder(x);
    CHECK(spectral_norm(ComplexMatrix(f.q.adjoint() * f.q - ComplexMatrix::Identity(m, m))) <=
          100 * m * u);
    CHECK(spectral_norm(ComplexMatrix(f.q * f.r - x)) <= 100 * m * u * spectral_norm(x));
    ++count;
  }
  CHECK(count == 100);
}

TEST_CASE("mgs_orthogonalize: unit directions") {
  ComplexMatrix basis = ComplexMatrix::Zero(3, 1);
  basis(0, 0) = Complex(1.0);

  SUBCASE("orthogonal input passes through") {
    ComplexVector y = ComplexVector::Zero(3);
    y(1) = Complex(1.0);
    const MgsResult r = mgs_orthogonalize(y, basis);
    CHECK(!r.breakdown);
    CHECK((r.q - y).norm() <= 10 * u);
    CHECK(std::abs(r.coeffs(0)) <= 10 * u);
  }

  SUBCASE("vector inside span signals breakdown") {
    ComplexVector y = ComplexVector::Zero(3);
    y(0) = Complex(1.0);
    y(1) = Complex(1e-20);
    const MgsResult r = mgs_orthogonalize(y, basis);
    CHECK(r.breakdown);
  }

  SUBCASE("analytic 45-degree case") {
    ComplexVector y(3);
    y << Complex(1.0), Complex(1.0), Complex(0.0);
    y /= std::sqrt(2.0);
    const MgsResult r = mgs_orthogonalize(y, basis);
    CHECK(!r.breakdown);
    CHECK(std::abs(r.q(1) - Complex(1.0)) <= 10 * u);
    CHECK(std::abs(r.coeffs(0) - Complex(1.0 / std::sqrt(2.0))) <= 10 * u);
  }
}

TEST_CASE("mgs_orthogonalize: coefficients reproduce the input") {
  const ComplexMatrix basis = qf(random_complex(20, 6, 7));
  std::mt19937_64 rng(8);
  const ComplexVector y = specfilt::detail::gaussian_complex(20, 1, rng);
  const MgsResult r = mgs_orthogonalize(y, basis);
  CHECK(!r.breakdown);
  CHECK((basis * r.coeffs + r.residual_norm * r.q - y).norm() <= 100 * u * y.norm());
  CHECK((basis.adjoint() * r.q).norm() <= 100 * 20 * u);
  CHECK(r.q.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lu_solve_shifted: diagonal cases") {
  SUBCASE("2x2 diagonal") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(1, 1) = Complex(1.0);
    const ComplexMatrix x = lu_solve_shifted(a, Complex(2.0), ComplexMatrix::Identity(2, 2));
    CHECK(std::abs(x(0, 0) - Complex(0.5)) <= 10 * u);
    CHECK(std::abs(x(1, 1) - Complex(1.0)) <= 10 * u);
  }

  SUBCASE("scalar near-singular shift, scalar arithmetic oracle") {
    ComplexMatrix a(1, 1);
    a(0, 0) = Complex(10.0 + 1e-10);
    ComplexMatrix rhs(1, 1);
    rhs(0, 0) = Complex(1.0);
    const ComplexMatrix x = lu_solve_shifted(a, Complex(10.0), rhs);
    CHECK(std::abs(x(0, 0) - Complex(-1e10)) <= 1e-5 * 1e10);
  }

  SUBCASE("exact eigenvalue shift is singular") {
    ComplexMatrix a = ComplexMatrix::Zero(3, 3);
    a(0, 0) = Complex(1.0);
    a(1, 1) = Complex(2.0);
    a(2, 2) = Complex(3.0);
    CHECK_THROWS_AS(lu_solve_shifted(a, Complex(2.0), ComplexMatrix::Identity(3, 3)),
                    SingularShiftError);
  }
}

TEST_CASE("lu_solve_shifted: backward error stays at the round-off level") {
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 10 + (inst % 4) * 10;
    const ComplexMatrix a = random_complex(n, n, 5000 + inst);
    const ComplexMatrix rhs = random_complex(n, 3, 6000 + inst);
    const Complex z(3.0 + 0.01 * inst, 0.5);
    const ComplexMatrix x = lu_solve_shifted(a, z, rhs);
    ComplexMatrix shifted = -a;
    shifted.diagonal().array() += z;
    const double err = spectral_norm(ComplexMatrix(rhs - shifted * x));
    CHECK(err <= 1e-13 * spectral_norm(a) * spectral_norm(x));
  }
}

TEST_CASE("svd_jacobi: diagonal input") {
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 0) = Complex(3.0);
  x(1, 1) = Complex(1.0);
  const SVDResult s = svd_jacobi(x);
  CHECK(s.singular_values(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.singular_values(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("svd_jacobi: tiny singular value from the 2x2 closed form") {
  ComplexMatrix x(2, 2);
  x << Complex(1.0), Complex(1.0), Complex(0.0), Complex(1e-10);
  // closed form: sigma_max^2 sigma_min^2 = det^2, sigma_max^2 + sigma_min^2 = ||X||_F^2
  const double fro2 = 2.0 + 1e-20;
  const double det = 1e-10;
  const double smax = std::sqrt((fro2 + std::sqrt(fro2 * fro2 - 4 * det * det)) / 2.0);
  const double smin = det / smax;
  const SVDResult s = svd_jacobi(x);
  CHECK(s.singular_values(0) == doctest::Approx(smax).epsilon(1e-12));
  CHECK(s.singular_values(1) == doctest::Approx(smin).epsilon(1e-3));
  CHECK(s.singular_values(1) == doctest::Approx(1e-10 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("svd_jacobi: Gram-matrix oracle on a well-conditioned 20x5 block") {
  const ComplexMatrix x = random_complex(20, 5, 99);
  REQUIRE(condition_number(x) <= 1e6);
  const SVDResult s = svd_jacobi(x);
  const EigDecomposition gram = eig_dense(ComplexMatrix(x.adjoint() * x));
  RealVector gram_sigma(5);
  for (int i = 0; i < 5; ++i) gram_sigma(i) = std::sqrt(std::abs(gram.eigenvalues(i).real()));
  std::sort(gram_sigma.data(), gram_sigma.data() + 5, std::greater<double>());
  for (int i = 0; i < 5; ++i)
    CHECK(s.singular_values(i) == doctest::Approx(gram_sigma(i)).epsilon(1e-8));
}

TEST_CASE("svd_jacobi: invariance under unitary factors") {
  const ComplexMatrix x = random_complex(12, 6, 123);
  const SVDResult base = svd_jacobi(x);
  std::mt19937_64 rng(321);
  const ComplexMatrix uf = specfilt::detail::haar_factor(12, rng, false);
  const ComplexMatrix vf = specfilt::detail::haar_factor(6, rng, false);
  const SVDResult rotated = svd_jacobi(ComplexMatrix(uf * x * vf));
  for (int i = 0; i < 6; ++i)
    CHECK(rotated.singular_values(i) ==
          doctest::Approx(base.singular_values(i)).epsilon(1e-10));
}

TEST_CASE("svd_jacobi: reconstruction and ordering across condition numbers") {
  for (int inst = 0; inst < 24; ++inst) {
    const int n = 15;
    const int m = 6;
    const double kappa = std::pow(10.0, (inst % 7) * 2.0);
    RealVector sigma(m);
    for (int i = 0; i < m; ++i)
      sigma(i) = std::pow(kappa, -static_cast<double>(i) / (m - 1));
    const ComplexMatrix x = with_singular_values(sigma, n, 777 + inst);
    const SVDResult s = svd_jacobi(x);
    for (int i = 0; i + 1 < m; ++i) CHECK(s.singular_values(i) >= s.singular_values(i + 1));
    CHECK(spectral_norm(ComplexMatrix(
              s.u * s.singular_values.asDiagonal() * s.v.adjoint() - x)) <=
          100 * n * u * s.singular_values(0));
    // measured condition number tracks the constructed one
    const double measured = s.singular_values(0) / s.singular_values(m - 1);
    CHECK(measured == doctest::Approx(kappa).epsilon(0.01));
  }
}

TEST_CASE("eig_dense: diagonal and symmetric cases take the Hermitian path") {
  SUBCASE("diag(1,2,3)") {
    ComplexMatrix a = ComplexMatrix::Zero(3, 3);
    a(0, 0) = Complex(1.0);
    a(1, 1) = Complex(2.0);
    a(2, 2) = Complex(3.0);
    const EigDecomposition e = eig_dense(a);
    CHECK(e.hermitian_path);
    for (int i = 0; i < 3; ++i) {
      CHECK(e.eigenvalues(i).imag() == 0.0);
      CHECK(e.eigenvalues(i).real() == doctest::Approx(i + 1.0).epsilon(1e-14));
      // vectors are (up to phase) identity columns
      CHECK(std::abs(e.eigenvectors.col(i).cwiseAbs().maxCoeff() - 1.0) <= 1e-12);
    }
  }

  SUBCASE("exchange matrix") {
    ComplexMatrix a(2, 2);
    a << Complex(0), Complex(1), Complex(1), Complex(0);
    const EigDecomposition e = eig_dense(a);
    CHECK(e.eigenvalues(0).real() == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(e.eigenvalues(1).real() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("eig_dense: companion matrix roots") {
  ComplexMatrix a(2, 2);  // companion of z^2 - 3z + 2
  a << Complex(3.0), Complex(-2.0), Complex(1.0), Complex(0.0);
  const EigDecomposition e = eig_dense(a);
  CHECK(!e.hermitian_path);
  std::vector<double> roots{std::abs(e.eigenvalues(0)), std::abs(e.eigenvalues(1))};
  std::sort(roots.begin(), roots.end());
  CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(roots[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("eig_dense: residual and orthogonality invariants") {
  SUBCASE("Hermitian input") {
    ComplexMatrix g = random_complex(14, 14, 2024);
    ComplexMatrix a = 0.5 * (g + g.adjoint());
    const EigDecomposition e = eig_dense(a);
    CHECK(e.hermitian_path);
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors - ComplexMatrix::Identity(14, 14)).norm() <=
          1e-12);
    const double anorm = spectral_norm(a);
    for (int i = 0; i < 14; ++i) {
      CHECK(e.eigenvalues(i).imag() == 0.0);
      const ComplexVector v = e.eigenvectors.col(i);
      CHECK((a * v - e.eigenvalues(i) * v).norm() <= 1000 * 14 * u * anorm);
    }
  }

  SUBCASE("general input") {
    const ComplexMatrix a = random_complex(12, 12, 4096);
    const EigDecomposition e = eig_dense(a);
    const double anorm = spectral_norm(a);
    for (int i = 0; i < 12; ++i) {
      const ComplexVector v = e.eigenvectors.col(i);
      CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK((a * v - e.eigenvalues(i) * v).norm() <= 1000 * 12 * u * anorm);
    }
  }
}

TEST_CASE("spectral_norm and condition_number") {
  const ComplexMatrix q = qf(random_complex(10, 4, 55));
  CHECK(condition_number(q) == doctest::Approx(1.0).epsilon(100 * u));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = Complex(1e10);
  d(1, 1) = Complex(1.0);
  CHECK(condition_number(d) == doctest::Approx(1e10).epsilon(1e-12));
  CHECK(spectral_norm(d) == doctest::Approx(1e10).epsilon(1e-12));

  ComplexMatrix rank1 = ComplexMatrix::Zero(3, 2);
  rank1(0, 0) = Complex(1.0);  // second column exactly zero
  CHECK(condition_number(rank1) == kInfinity);
}

TEST_CASE("schur_sorted: ordered triangular form") {
  const ComplexMatrix a = random_complex(6, 6, 31);
  auto score = [](Complex z) { return std::abs(z); };
  const SortedSchur ss = schur_sorted(a, score);
  CHECK((ss.u.adjoint() * ss.u - ComplexMatrix::Identity(6, 6)).norm() <= 1e-12);
  CHECK(spectral_norm(ComplexMatrix(ss.u * ss.t * ss.u.adjoint() - a)) <=
        1e-12 * spectral_norm(a));
  for (int i = 0; i + 1 < 6; ++i) {
    CHECK(score(ss.t(i, i)) >= score(ss.t(i + 1, i + 1)) - 1e-12);
    for (int j = 0; j < i + 1; ++j) CHECK(std::abs(ss.t(i + 1, j)) == 0.0);
  }
}
