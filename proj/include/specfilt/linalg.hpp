#pragma once

// Dense complex kernels: Householder QR, modified Gram-Schmidt with
// reorthogonalization, shifted LU solves, one-sided Jacobi SVD, dense
// eigendecomposition, and an eigenvalue-sorted complex Schur form.
// Everything operates on column-major Eigen dense types in double precision.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "specfilt/errors.hpp"
#include "specfilt/types.hpp"

namespace specfilt {

// ---------------------------------------------------------------------------
// small utilities

/// Sum in pairwise (recursive halving) order. Used where a reproducible,
/// well-conditioned summation order is part of the contract.
template <typename Scalar>
Scalar pairwise_sum(const std::vector<Scalar>& terms, std::size_t lo, std::size_t hi) {
  const std::size_t len = hi - lo;
  if (len == 0) return Scalar(0);
  if (len == 1) return terms[lo];
  if (len == 2) return terms[lo] + terms[lo + 1];
  const std::size_t mid = lo + len / 2;
  return pairwise_sum(terms, lo, mid) + pairwise_sum(terms, mid, hi);
}

template <typename Scalar>
Scalar pairwise_sum(const std::vector<Scalar>& terms) {
  return pairwise_sum(terms, 0, terms.size());
}

// ---------------------------------------------------------------------------
// QR

enum class QRMethod { householder, mgs_reorth };

/// Thin QR factorization with the R-diagonal normalized to be real and
/// nonnegative, which pins down the (otherwise phase-ambiguous) factors.
struct QRFactorization {
  ComplexMatrix q;  // n x m, orthonormal columns
  ComplexMatrix r;  // m x m, upper triangular, diag real >= 0
  QRMethod method = QRMethod::householder;
};

inline QRFactorization qr_householder(const Eigen::Ref<const ComplexMatrix>& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (n < m) throw std::invalid_argument("qr_householder: requires rows >= cols");

  Eigen::HouseholderQR<ComplexMatrix> qr(x);
  QRFactorization out;
  out.q = qr.householderQ() * ComplexMatrix::Identity(n, m);
  out.r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();

  for (Eigen::Index j = 0; j < m; ++j) {
    const double mag = std::abs(out.r(j, j));
    if (mag == 0.0) throw DegeneratePivotError(static_cast<int>(j));
    const Complex phase = out.r(j, j) / mag;
    out.q.col(j) *= phase;
    out.r.row(j) *= std::conj(phase);
    out.r(j, j) = Complex(mag, 0.0);
  }
  return out;
}

/// Orthonormal factor only.
inline ComplexMatrix qf(const Eigen::Ref<const ComplexMatrix>& x) {
  return qr_householder(x).q;
}

// ---------------------------------------------------------------------------
// modified Gram-Schmidt with full reorthogonalization (two passes, always)

struct MgsResult {
  ComplexVector q;        // unit vector orthogonal to the basis (zero on breakdown with zero residual)
  ComplexVector coeffs;   // basis expansion; y = basis * coeffs + residual_norm * q
  double residual_norm = 0.0;
  bool breakdown = false; // y lies in span(basis) to working precision
};

inline MgsResult mgs_orthogonalize(const Eigen::Ref<const ComplexVector>& y,
                                   const Eigen::Ref<const ComplexMatrix>& basis) {
  const Eigen::Index n = y.size();
  const Eigen::Index m = basis.cols();
  if (m > 0) {
    const double ortho = (basis.adjoint() * basis - ComplexMatrix::Identity(m, m)).norm();
    if (ortho > 1e-12)
      throw std::invalid_argument("mgs_orthogonalize: basis is not orthonormal");
  }

  MgsResult out;
  out.coeffs = ComplexVector::Zero(m);
  ComplexVector w = y;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const Complex c = basis.col(j).dot(w);  // conjugated in the first argument
      w -= c * basis.col(j);
      out.coeffs(j) += c;
    }
  }
  out.residual_norm = w.norm();
  out.breakdown = out.residual_norm < static_cast<double>(n) * kUnitRoundoff * y.norm();
  if (out.residual_norm > 0.0)
    out.q = w / out.residual_norm;
  else
    out.q = ComplexVector::Zero(n);
  return out;
}

// ---------------------------------------------------------------------------
// shifted linear solves

/// Solve (zI - A) X = rhs by LU with partial pivoting. Throws
/// SingularShiftError when a pivot vanishes to working precision.
inline ComplexMatrix lu_solve_shifted(const Eigen::Ref<const ComplexMatrix>& a, Complex z,
                                      const Eigen::Ref<const ComplexMatrix>& rhs) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("lu_solve_shifted: matrix must be square");
  if (rhs.rows() != n) throw std::invalid_argument("lu_solve_shifted: rhs row mismatch");

  ComplexMatrix shifted = -a;
  shifted.diagonal().array() += z;
  Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lu.matrixLU()(i, i) == Complex(0.0, 0.0)) throw SingularShiftError(z);
  }
  return lu.solve(rhs);
}

// ---------------------------------------------------------------------------
// one-sided Jacobi SVD
//
// Hestenes one-sided Jacobi on the columns. Slow but simple, and it computes
// tiny singular values with high relative accuracy, which the diagnostics
// rely on when measuring condition numbers near 1/d.

struct SVDResult {
  RealVector singular_values;  // nonincreasing, >= 0
  ComplexMatrix u;             // n x m (columns for sigma == 0 are zero)
  ComplexMatrix v;             // m x m unitary
  int sweeps = 0;
};

inline SVDResult svd_jacobi(const Eigen::Ref<const ComplexMatrix>& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (n < m) throw std::invalid_argument("svd_jacobi: requires rows >= cols");

  ComplexMatrix w = x;
  ComplexMatrix v = ComplexMatrix::Identity(m, m);
  const double tol = 1e-14;
  const int sweep_cap = kernel_limits().jacobi_sweeps_per_dim * static_cast<int>(std::max<Eigen::Index>(n, 1));

  int sweep = 0;
  for (; sweep < sweep_cap; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < m; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double app = w.col(p).squaredNorm();
        const double aqq = w.col(q).squaredNorm();
        const Complex apq = w.col(p).dot(w.col(q));
        const double off = std::abs(apq);
        if (app == 0.0 || aqq == 0.0) continue;
        if (off <= tol * std::sqrt(app * aqq)) continue;
        rotated = true;

        // Absorb the phase of the cross term, then a real Jacobi rotation.
        const Complex phase = apq / off;
        const double zeta = (aqq - app) / (2.0 * off);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        const ComplexVector wp = w.col(p);
        const ComplexVector wq = w.col(q);
        w.col(p) = c * wp - s * std::conj(phase) * wq;
        w.col(q) = s * phase * wp + c * wq;
        const ComplexVector vp = v.col(p);
        const ComplexVector vq = v.col(q);
        v.col(p) = c * vp - s * std::conj(phase) * vq;
        v.col(q) = s * phase * vp + c * vq;
      }
    }
    if (!rotated) break;
  }
  if (sweep >= sweep_cap)
    throw ConvergenceFailure("svd_jacobi: sweep cap reached", sweep);

  RealVector sigma(m);
  for (Eigen::Index j = 0; j < m; ++j) sigma(j) = w.col(j).norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return sigma(i) > sigma(j); });

  SVDResult out;
  out.singular_values.resize(m);
  out.u.resize(n, m);
  out.v.resize(m, m);
  out.sweeps = sweep + 1;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.singular_values(j) = sigma(src);
    out.v.col(j) = v.col(src);
    if (sigma(src) > 0.0)
      out.u.col(j) = w.col(src) / sigma(src);
    else
      out.u.col(j).setZero();
  }
  return out;
}

inline double spectral_norm(const Eigen::Ref<const ComplexMatrix>& x) {
  if (x.rows() == 0 || x.cols() == 0) return 0.0;
  if (x.rows() >= x.cols()) return svd_jacobi(x).singular_values(0);
  return svd_jacobi(ComplexMatrix(x.adjoint())).singular_values(0);
}

/// sigma_1 / sigma_min; reports infinity (not an error) when sigma_min == 0.
inline double condition_number(const Eigen::Ref<const ComplexMatrix>& x) {
  if (x.rows() < x.cols()) throw std::invalid_argument("condition_number: requires rows >= cols");
  const SVDResult svd = svd_jacobi(x);
  const double smin = svd.singular_values(svd.singular_values.size() - 1);
  if (smin == 0.0) return kInfinity;
  return svd.singular_values(0) / smin;
}

/// Moore-Penrose pseudoinverse with a relative cutoff on the singular values.
inline ComplexMatrix pseudo_inverse(const Eigen::Ref<const ComplexMatrix>& x, double rel_cutoff,
                                    int* rank_out = nullptr) {
  const SVDResult svd = svd_jacobi(x);
  const double cutoff = rel_cutoff * svd.singular_values(0);
  ComplexMatrix out = ComplexMatrix::Zero(x.cols(), x.rows());
  int rank = 0;
  for (Eigen::Index j = 0; j < svd.singular_values.size(); ++j) {
    const double s = svd.singular_values(j);
    if (s <= cutoff || s == 0.0) continue;
    out += (1.0 / s) * svd.v.col(j) * svd.u.col(j).adjoint();
    ++rank;
  }
  if (rank_out) *rank_out = rank;
  return out;
}

// ---------------------------------------------------------------------------
// dense eigendecomposition

struct EigDecomposition {
  ComplexVector eigenvalues;
  ComplexMatrix eigenvectors;  // unit columns
  bool hermitian_path = false;
  bool ill_conditioned_vectors = false;  // triangular backsolve hit a near-defective guard
};

/// Hermitian inputs (relative skew below 1e-12) take the symmetric path and
/// return real eigenvalues with orthonormal vectors; everything else goes
/// through a complex Schur form plus triangular eigenvector backsolves.
/// force_general skips the Hermitian routing: for strongly graded matrices
/// (norm concentrated in a corner entry) the tridiagonal path loses the small
/// eigenvectors at the u*||A|| level, while the triangular backsolve works at
/// the local scale.
inline EigDecomposition eig_dense(const Eigen::Ref<const ComplexMatrix>& a,
                                  bool force_general = false) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("eig_dense: matrix must be square");

  EigDecomposition out;
  const double anorm = a.norm();
  const double skew = (a - a.adjoint()).norm();
  if (!force_general && (anorm == 0.0 || skew <= 1e-12 * anorm)) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ComplexMatrix(0.5 * (a + a.adjoint())));
    if (es.info() != Eigen::Success)
      throw ConvergenceFailure("eig_dense: symmetric QL iteration failed", static_cast<int>(n) * 30);
    out.eigenvalues = es.eigenvalues().cast<Complex>();
    out.eigenvectors = es.eigenvectors();
    out.hermitian_path = true;
    return out;
  }

  const int cap = kernel_limits().qr_shifts_per_eigenvalue * static_cast<int>(n);
  Eigen::ComplexSchur<ComplexMatrix> schur;
  schur.setMaxIterations(cap);
  schur.compute(a, true);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("eig_dense: QR iteration failed", cap);

  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& u = schur.matrixU();
  out.eigenvalues.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues(i) = t(i, i);

  // Eigenvectors of the triangular factor, one backsolve per eigenvalue.
  const double guard = kUnitRoundoff * std::max(t.cwiseAbs().maxCoeff(), 1e-300);
  out.eigenvectors.resize(n, n);
  ComplexVector xvec(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    xvec.setZero();
    xvec(k) = Complex(1.0, 0.0);
    for (Eigen::Index i = k - 1; i >= 0; --i) {
      Complex s(0.0, 0.0);
      for (Eigen::Index j = i + 1; j <= k; ++j) s += t(i, j) * xvec(j);
      Complex den = t(i, i) - t(k, k);
      if (std::abs(den) < guard) {
        den = Complex(guard, 0.0);
        out.ill_conditioned_vectors = true;
      }
      xvec(i) = -s / den;
    }
    out.eigenvectors.col(k) = u * xvec;
    out.eigenvectors.col(k).normalize();
  }
  return out;
}

// ---------------------------------------------------------------------------
// eigenvalue-sorted complex Schur form

struct SortedSchur {
  ComplexMatrix t;  // upper triangular, diagonal ordered by descending score
  ComplexMatrix u;  // unitary, A = U T U^*
};

namespace detail {

inline void swap_schur_diagonal(ComplexMatrix& t, ComplexMatrix& u, Eigen::Index k) {
  const Complex t11 = t(k, k);
  const Complex t22 = t(k + 1, k + 1);
  const Complex t12 = t(k, k + 1);
  if (t11 == t22) return;

  // Unitary 2x2 whose first column is the eigenvector of [[t11,t12],[0,t22]]
  // associated with t22; the similarity swaps the diagonal entries.
  const Complex x0 = t12;
  const Complex x1 = t22 - t11;
  const double nrm = std::sqrt(std::norm(x0) + std::norm(x1));
  const Complex g00 = x0 / nrm, g10 = x1 / nrm;
  Eigen::Matrix2cd g;
  g << g00, -std::conj(g10), g10, std::conj(g00);

  const Eigen::Index n = t.rows();
  t.block(k, k, 2, n - k) = g.adjoint() * t.block(k, k, 2, n - k);
  t.block(0, k, k + 2, 2) = t.block(0, k, k + 2, 2) * g;
  t(k + 1, k) = Complex(0.0, 0.0);
  u.middleCols(k, 2) = u.middleCols(k, 2) * g;
}

}  // namespace detail

/// Complex Schur decomposition with the diagonal reordered so that
/// score(t(0,0)) >= score(t(1,1)) >= ... (adjacent swaps, bubble pass).
inline SortedSchur schur_sorted(const Eigen::Ref<const ComplexMatrix>& a,
                                const std::function<double(Complex)>& score) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("schur_sorted: matrix must be square");
  Eigen::ComplexSchur<ComplexMatrix> schur;
  schur.setMaxIterations(kernel_limits().qr_shifts_per_eigenvalue * static_cast<int>(n));
  schur.compute(a, true);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("schur_sorted: QR iteration failed",
                             kernel_limits().qr_shifts_per_eigenvalue * static_cast<int>(n));

  SortedSchur out{schur.matrixT(), schur.matrixU()};
  for (Eigen::Index pass = 0; pass + 1 < n; ++pass) {
    bool swapped = false;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      if (score(out.t(k, k)) < score(out.t(k + 1, k + 1))) {
        detail::swap_schur_diagonal(out.t, out.u, k);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
  return out;
}

}  // namespace specfilt
