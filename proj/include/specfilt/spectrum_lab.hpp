#pragma once

// Synthetic test matrices with prescribed spectra: normal (real-symmetric or
// complex normal) and diagonalizable with a prescribed eigenvector condition
// number. Construction is deterministic under the seed.

#include <cmath>
#include <random>
#include <stdexcept>

#include "specfilt/linalg.hpp"
#include "specfilt/spectrum_spec.hpp"

namespace specfilt {

enum class MatrixKind { normal, diagonalizable };

struct TestMatrix {
  ComplexMatrix a;
  ComplexMatrix v;         // right eigenvectors, unit columns, targets first
  ComplexMatrix w;         // left eigenvectors, unit columns
  ComplexMatrix w_biorth;  // left eigenvectors scaled so w_biorth^* v = I
  RealVector wilkinson;    // 1/|w_i^* v_i| with unit-norm w_i, v_i
  std::vector<Complex> eigenvalues;  // column order of v
  SpectrumSpec spectrum;
  MatrixKind kind = MatrixKind::normal;

  int n() const { return static_cast<int>(a.rows()); }
  int m() const { return spectrum.target_count(); }

  /// Columns of v spanning the target eigenspace (original target order).
  ComplexMatrix target_eigenvectors() const { return v.leftCols(m()); }
  ComplexMatrix target_left_eigenvectors() const { return w_biorth.leftCols(m()); }
};

namespace detail {

inline RealMatrix gaussian_real(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RealMatrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

inline ComplexMatrix gaussian_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

/// Haar-distributed orthogonal (real) or unitary factor from a seeded
/// Gaussian, with the R-diagonal sign convention fixing uniqueness.
inline ComplexMatrix haar_factor(int n, std::mt19937_64& rng, bool real) {
  const ComplexMatrix g = real ? gaussian_real(n, n, rng).cast<Complex>().eval()
                               : gaussian_complex(n, n, rng);
  return qr_householder(g).q;
}

inline ComplexMatrix normalize_columns(const ComplexMatrix& x) {
  ComplexMatrix out = x;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double nc = out.col(j).norm();
    if (nc > 0.0) out.col(j) /= nc;
  }
  return out;
}

}  // namespace detail

/// Seeded random orthonormal n x m block (starting subspace for iterations).
inline ComplexMatrix random_orthonormal(int n, int m, unsigned long long seed, bool real = true) {
  std::mt19937_64 rng(seed);
  const ComplexMatrix g = real ? detail::gaussian_real(n, m, rng).cast<Complex>().eval()
                               : detail::gaussian_complex(n, m, rng);
  return qr_householder(g).q;
}

/// A = Q Lambda Q^* with a Haar factor Q. All-real spectra produce a
/// real-symmetric matrix (symmetrized exactly); otherwise A is complex normal.
inline TestMatrix make_normal(const SpectrumSpec& spec, unsigned long long seed) {
  spec.validate();
  const int n = spec.size();
  std::mt19937_64 rng(seed);

  TestMatrix tm;
  tm.spectrum = spec;
  tm.eigenvalues = spec.all_eigenvalues();
  tm.kind = MatrixKind::normal;

  const bool real = spec.all_real();
  tm.v = detail::haar_factor(n, rng, real);

  if (real) {
    RealMatrix q = tm.v.real();
    RealVector lam(n);
    for (int i = 0; i < n; ++i) lam(i) = tm.eigenvalues[static_cast<std::size_t>(i)].real();
    RealMatrix a = q * lam.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    tm.a = a.cast<Complex>();
  } else {
    ComplexVector lam(n);
    for (int i = 0; i < n; ++i) lam(i) = tm.eigenvalues[static_cast<std::size_t>(i)];
    tm.a = tm.v * lam.asDiagonal() * tm.v.adjoint();
  }

  tm.w = tm.v;
  tm.w_biorth = tm.v;
  tm.wilkinson = RealVector::Ones(n);
  return tm;
}

/// A = V Lambda V^{-1} with kappa(V) prescribed (within 10%) through a
/// geometric singular-value ramp between two Haar unitaries. Left eigenvectors
/// come from V^{-*}; requests beyond kappa_v = 1e8 are refused since solves
/// would then be dominated by eigenvector ill-conditioning.
inline TestMatrix make_nonnormal(const SpectrumSpec& spec, double kappa_v,
                                 unsigned long long seed) {
  spec.validate();
  if (kappa_v < 1.0) throw std::invalid_argument("make_nonnormal: kappa_v must be >= 1");
  if (kappa_v > 1e8) throw std::invalid_argument("make_nonnormal: kappa_v > 1e8 refused");
  const int n = spec.size();
  std::mt19937_64 rng(seed);

  TestMatrix tm;
  tm.spectrum = spec;
  tm.eigenvalues = spec.all_eigenvalues();
  tm.kind = MatrixKind::diagonalizable;

  const ComplexMatrix u1 = detail::haar_factor(n, rng, false);
  const ComplexMatrix u2 = detail::haar_factor(n, rng, false);

  // Tune the ramp so the unit-column eigenvector matrix hits kappa_v; column
  // normalization shifts the condition number slightly, so iterate on the
  // log-exponent.
  double expo = std::log(kappa_v);
  ComplexMatrix v_unit;
  for (int attempt = 0; attempt < 8; ++attempt) {
    RealVector ramp(n);
    for (int i = 0; i < n; ++i)
      ramp(i) = n > 1 ? std::exp(-expo * static_cast<double>(i) / (n - 1)) : 1.0;
    v_unit = detail::normalize_columns(u1 * ramp.asDiagonal() * u2);
    const double measured = condition_number(v_unit);
    if (std::abs(std::log(measured / kappa_v)) <= std::log(1.05) || kappa_v == 1.0) break;
    expo += std::log(kappa_v) - std::log(measured);
  }
  tm.v = v_unit;

  ComplexVector lam(n);
  for (int i = 0; i < n; ++i) lam(i) = tm.eigenvalues[static_cast<std::size_t>(i)];
  const ComplexMatrix b = tm.v * lam.asDiagonal();
  Eigen::PartialPivLU<ComplexMatrix> lu_t(tm.v.transpose());
  tm.a = lu_t.solve(b.transpose()).transpose();

  Eigen::PartialPivLU<ComplexMatrix> lu_h(tm.v.adjoint());
  tm.w_biorth = lu_h.solve(ComplexMatrix::Identity(n, n));
  tm.wilkinson.resize(n);
  tm.w.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const double nc = tm.w_biorth.col(i).norm();
    tm.wilkinson(i) = nc;
    tm.w.col(i) = tm.w_biorth.col(i) / nc;
  }
  return tm;
}

}  // namespace specfilt
