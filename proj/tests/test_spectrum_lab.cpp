#include <cmath>

#include "doctest.h"
#include "specfilt/spectrum_lab.hpp"

using namespace specfilt;

namespace {

const double pi = std::acos(-1.0);

SpectrumSpec small_spec() {
  SpectrumSpec spec;
  spec.target = {Complex(1.0), Complex(2.0), Complex(3.0)};
  spec.unwanted = {Complex(-1.0), Complex(-2.0), Complex(-3.5), Complex(-5.0)};
  return spec;
}

/// Nearest-neighbor eigenvalue matching error against the prescribed list.
double spectrum_roundtrip_error(const TestMatrix& tm) {
  const EigDecomposition eig = eig_dense(tm.a);
  double worst = 0.0;
  std::vector<bool> used(static_cast<std::size_t>(tm.n()), false);
  for (const Complex& lam : tm.eigenvalues) {
    int best = -1;
    double dist = kInfinity;
    for (int i = 0; i < tm.n(); ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double di = std::abs(eig.eigenvalues(i) - lam);
      if (di < dist) {
        dist = di;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    worst = std::max(worst, dist);
  }
  return worst;
}

}  // namespace

TEST_CASE("place_danger: placement and collision rules") {
  SpectrumSpec spec = small_spec();

  SUBCASE("theta = 0 puts the eigenvalue below the pole") {
    const SpectrumSpec s = place_danger(spec, Complex(10.0), 1e-10, 0.0);
    CHECK(s.target.back() == Complex(10.0 - 1e-10, 0.0));
    CHECK(s.dangers.size() == 1);
    s.validate();
  }

  SUBCASE("theta = pi puts it above the pole, exactly real") {
    const SpectrumSpec s = place_danger(spec, Complex(10.0), 1e-10, pi);
    CHECK(s.target.back() == Complex(10.0 + 1e-10, 0.0));
    CHECK(s.all_real());
    s.validate();
  }

  SUBCASE("collision is refused") {
    const SpectrumSpec s = place_danger(spec, Complex(10.0), 1e-10, pi);
    CHECK_THROWS(place_danger(s, Complex(10.0), 1e-10, pi));
  }

  SUBCASE("exactly coincident placement is allowed when requested") {
    SpectrumSpec s = place_danger(spec, Complex(10.0), 1e-13, pi);
    s = place_danger(s, Complex(10.0), 1e-13, pi, /*allow_coincident=*/true);
    CHECK(s.dangers.size() == 2);
    CHECK(s.target[static_cast<std::size_t>(s.dangers[0].target_index)] ==
          s.target[static_cast<std::size_t>(s.dangers[1].target_index)]);
    s.validate();
  }

  SUBCASE("invalid distance") { CHECK_THROWS(place_danger(spec, Complex(10.0), 0.0, 0.0)); }
}

TEST_CASE("make_normal: prescribed spectrum is recovered") {
  const TestMatrix tm = make_normal(small_spec(), 17);
  CHECK(tm.kind == MatrixKind::normal);
  CHECK(spectrum_roundtrip_error(tm) <= 1e-11);

  // real-symmetric path: exactly symmetric, exactly real
  CHECK(tm.a.imag().norm() == 0.0);
  CHECK((tm.a - tm.a.transpose()).norm() == 0.0);

  const double anorm = spectral_norm(tm.a);
  for (int i = 0; i < tm.n(); ++i) {
    const ComplexVector v = tm.v.col(i);
    CHECK((tm.a * v - tm.eigenvalues[static_cast<std::size_t>(i)] * v).norm() <= 1e-12 * anorm);
  }
  CHECK((tm.v.adjoint() * tm.v - ComplexMatrix::Identity(tm.n(), tm.n())).norm() <= 1e-12);
}

TEST_CASE("make_normal: determinism under the seed") {
  const TestMatrix a1 = make_normal(small_spec(), 99);
  const TestMatrix a2 = make_normal(small_spec(), 99);
  CHECK((a1.a - a2.a).norm() == 0.0);
  const TestMatrix a3 = make_normal(small_spec(), 100);
  CHECK((a1.a - a3.a).norm() != 0.0);
}

TEST_CASE("make_normal: danger spectrum keeps the residual invariant") {
  SpectrumSpec spec;
  for (int i = 0; i < 9; ++i) spec.target.push_back(Complex(10.5 + 0.5 * i, 0.0));
  for (int i = 0; i < 90; ++i) spec.unwanted.push_back(Complex(5.0 * i / 89.0, 0.0));
  spec = place_danger(spec, Complex(10.0), 1e-10, pi);
  const TestMatrix tm = make_normal(spec, 1);
  const double anorm = spectral_norm(tm.a);
  for (int i = 0; i < tm.n(); ++i) {
    const ComplexVector v = tm.v.col(i);
    CHECK((tm.a * v - tm.eigenvalues[static_cast<std::size_t>(i)] * v).norm() <= 1e-12 * anorm);
  }
}

TEST_CASE("make_normal: complex spectra produce a normal (non-Hermitian) matrix") {
  SpectrumSpec spec;
  spec.target = {Complex(1.0, 1.0), Complex(2.0, -0.5)};
  spec.unwanted = {Complex(-1.0, 0.2), Complex(-2.0, -0.1)};
  const TestMatrix tm = make_normal(spec, 3);
  CHECK(spectrum_roundtrip_error(tm) <= 1e-11);
  const ComplexMatrix comm = tm.a * tm.a.adjoint() - tm.a.adjoint() * tm.a;
  CHECK(spectral_norm(comm) <= 1e-12 * spectral_norm(tm.a));
}

TEST_CASE("make_nonnormal: eigenvector conditioning and biorthogonality") {
  SpectrumSpec spec;
  for (int i = 0; i < 4; ++i) spec.target.push_back(Complex(10.0 + i, 0.0));
  for (int i = 0; i < 36; ++i) spec.unwanted.push_back(Complex(5.0 * i / 35.0, 0.0));

  SUBCASE("kappa close to the request") {
    const TestMatrix tm = make_nonnormal(spec, 100.0, 7);
    CHECK(tm.kind == MatrixKind::diagonalizable);
    const double kv = condition_number(tm.v);
    CHECK(kv >= 90.0);
    CHECK(kv <= 110.0);
    CHECK((tm.w_biorth.adjoint() * tm.v - ComplexMatrix::Identity(tm.n(), tm.n())).norm() <=
          1e-10);
    for (int i = 0; i < tm.n(); ++i) CHECK(tm.wilkinson(i) >= 1.0 - 1e-12);
    const double anorm = spectral_norm(tm.a);
    for (int i = 0; i < tm.n(); ++i) {
      const ComplexVector v = tm.v.col(i);
      CHECK((tm.a * v - tm.eigenvalues[static_cast<std::size_t>(i)] * v).norm() <= 1e-12 * anorm);
    }
  }

  SUBCASE("kappa = 1 reduces to near-orthonormal eigenvectors") {
    const TestMatrix tm = make_nonnormal(spec, 1.0, 7);
    CHECK((tm.v.adjoint() * tm.v - ComplexMatrix::Identity(tm.n(), tm.n())).norm() <= 1e-10);
    CHECK(spectrum_roundtrip_error(tm) <= 1e-11);
  }

  SUBCASE("excessive conditioning is refused") {
    CHECK_THROWS(make_nonnormal(spec, 1e9, 7));
    CHECK_THROWS(make_nonnormal(spec, 0.5, 7));
  }
}

TEST_CASE("make_nonnormal: determinism under the seed") {
  SpectrumSpec spec;
  spec.target = {Complex(2.0), Complex(3.0)};
  spec.unwanted = {Complex(-1.0), Complex(-2.0), Complex(-3.0)};
  const TestMatrix a1 = make_nonnormal(spec, 50.0, 5);
  const TestMatrix a2 = make_nonnormal(spec, 50.0, 5);
  CHECK((a1.a - a2.a).norm() == 0.0);
}

TEST_CASE("random_orthonormal is orthonormal and seeded") {
  const ComplexMatrix q = random_orthonormal(30, 5, 11);
  CHECK((q.adjoint() * q - ComplexMatrix::Identity(5, 5)).norm() <= 1e-13);
  const ComplexMatrix q2 = random_orthonormal(30, 5, 11);
  CHECK((q - q2).norm() == 0.0);
}
