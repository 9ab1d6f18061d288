#pragma once

// Measured quantities for iteration traces: principal angles between the
// iterate span and the target eigenspace, eigenvector-coordinate tables,
// condition numbers under column scalings, and runtime-checkable bounds.

#include <cmath>
#include <string>
#include <vector>

#include "specfilt/linalg.hpp"
#include "specfilt/rational_filter.hpp"
#include "specfilt/spectrum_lab.hpp"

namespace specfilt {

// ---------------------------------------------------------------------------
// principal angles

/// Angles ordered largest first: cosines nondecreasing, tangents nonincreasing.
struct AngleReport {
  RealVector cosines;
  RealVector sines;
  RealVector tangents;
  double largest_tangent = 0.0;  // +inf when Y^*X is rank-deficient
};

/// Principal angles between span(X) and span(Y). Y must be orthonormal; X
/// need not be (tangents are computed from the raw iterate on purpose, so
/// ill-conditioned iterates are measured as they are).
inline AngleReport principal_angles(const Eigen::Ref<const ComplexMatrix>& x,
                                    const Eigen::Ref<const ComplexMatrix>& y) {
  const Eigen::Index m = x.cols();
  if (y.cols() != m) throw std::invalid_argument("principal_angles: subspace dimensions differ");
  if ((y.adjoint() * y - ComplexMatrix::Identity(m, m)).norm() > 1e-10)
    throw std::invalid_argument("principal_angles: Y is not orthonormal");

  AngleReport rep;
  const ComplexMatrix qx = qf(x);

  const SVDResult gram = svd_jacobi(ComplexMatrix(y.adjoint() * qx));
  rep.cosines.resize(m);
  for (Eigen::Index i = 0; i < m; ++i)
    rep.cosines(i) = std::min(1.0, gram.singular_values(m - 1 - i));

  const SVDResult comp = svd_jacobi(ComplexMatrix(qx - y * (y.adjoint() * qx)));
  rep.sines.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) rep.sines(i) = std::min(1.0, comp.singular_values(i));

  const ComplexMatrix z = y.adjoint() * x;
  const SVDResult zsvd = svd_jacobi(z);
  const bool rank_deficient =
      zsvd.singular_values(m - 1) <= 1e3 * kUnitRoundoff * zsvd.singular_values(0);
  const ComplexMatrix zpinv = pseudo_inverse(z, 1e3 * kUnitRoundoff);
  const ComplexMatrix tmat = (x - y * (y.adjoint() * x)) * zpinv;
  const SVDResult tsvd = svd_jacobi(tmat);
  rep.tangents = tsvd.singular_values;
  rep.largest_tangent = rank_deficient ? kInfinity : rep.tangents(0);
  return rep;
}

// ---------------------------------------------------------------------------
// eigenvector coordinates

/// Magnitudes of the eigenvector coordinates of a block of unit columns,
/// with rows grouped as danger / other target / unwanted.
struct CoordinateDecomposition {
  RealMatrix magnitudes;        // (n eigenvalues) x (columns of the basis)
  std::vector<int> danger_rows;
  int target_count = 0;
  bool used_left = false;

  double danger_max(int col) const {
    double v = 0.0;
    for (int i : danger_rows) v = std::max(v, magnitudes(i, col));
    return v;
  }
  double other_target_max(int col) const {
    double v = 0.0;
    for (int i = 0; i < target_count; ++i) {
      bool is_danger = false;
      for (int j : danger_rows) is_danger = is_danger || (i == j);
      if (!is_danger) v = std::max(v, magnitudes(i, col));
    }
    return v;
  }
  double unwanted_max(int col) const {
    double v = 0.0;
    for (Eigen::Index i = target_count; i < magnitudes.rows(); ++i)
      v = std::max(v, magnitudes(i, col));
    return v;
  }
};

inline CoordinateDecomposition coordinates(const Eigen::Ref<const ComplexMatrix>& basis,
                                           const TestMatrix& tm, bool use_left = false) {
  CoordinateDecomposition out;
  const ComplexMatrix& frame = use_left ? tm.w_biorth : tm.v;
  out.magnitudes = (frame.adjoint() * basis).cwiseAbs();
  out.target_count = tm.m();
  out.used_left = use_left;
  for (const auto& rec : tm.spectrum.dangers) out.danger_rows.push_back(rec.target_index);
  return out;
}

// ---------------------------------------------------------------------------
// bound checks

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  double slack = 0.0;
  bool conclusive = true;  // false when a hypothesis of the bound is violated
};

inline BoundCheck make_bound_check(std::string name, double lhs, double rhs) {
  BoundCheck bc;
  bc.name = std::move(name);
  bc.lhs = lhs;
  bc.rhs = rhs;
  bc.satisfied = lhs <= rhs * (1.0 + 1e-9);
  bc.slack = rhs - lhs;
  return bc;
}

struct KappaBounds {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail {

inline const DangerRecord& danger_for_profile_top(const TestMatrix& tm,
                                                  const FilterSpectrumProfile& profile) {
  const int top = profile.target_order.at(0);
  for (const auto& rec : tm.spectrum.dangers)
    if (rec.target_index == top) return rec;
  throw std::invalid_argument("the dominant filtered target is not a dangerous eigenvalue");
}

/// |r| at the second eigenvalue of the global filtered ordering.
inline double second_filtered_magnitude(const FilterSpectrumProfile& profile) {
  if (profile.target_values.size() >= 2) return std::abs(profile.target_values[1]);
  return profile.unwanted_max;
}

inline double min_singular_value(const Eigen::Ref<const ComplexMatrix>& x) {
  const SVDResult svd = svd_jacobi(x);
  return svd.singular_values(svd.singular_values.size() - 1);
}

}  // namespace detail

/// Lower/upper envelope for kappa(X_1) = kappa(r(A) Q_0) on a normal matrix
/// with a dangerous eigenvalue; assumes the weight at the offending pole has
/// been normalized to one. The lower bound is asymptotic (d -> 0).
inline KappaBounds kappa_bounds_normal(const RationalFilter& f, const TestMatrix& tm,
                                       const Eigen::Ref<const ComplexMatrix>& q0) {
  const FilterSpectrumProfile profile = filter_profile(f, tm.spectrum);
  const DangerRecord& danger = detail::danger_for_profile_top(tm, profile);
  const ComplexVector v1 = tm.v.col(danger.target_index);
  const double r2 = detail::second_filtered_magnitude(profile);

  KappaBounds kb;
  kb.lower = (v1.adjoint() * q0).norm() / (danger.distance * r2);

  const ComplexMatrix v1q0 = tm.target_eigenvectors().adjoint() * q0;
  const double smin = detail::min_singular_value(v1q0);
  if (smin == 0.0) throw NumericalError("kappa_bounds_normal: V1^* Q0 is rank-deficient");
  kb.upper = (std::abs(profile.target_values[0]) / profile.target_min) / smin;
  return kb;
}

/// Non-normal analogue; the eigenvector structure enters through kappa(V),
/// the Wilkinson number of the dangerous eigenvalue, and the smallest
/// singular values of the unit-column target eigenvector blocks.
inline KappaBounds kappa_bounds_nonnormal(const RationalFilter& f, const TestMatrix& tm,
                                          const Eigen::Ref<const ComplexMatrix>& q0) {
  const FilterSpectrumProfile profile = filter_profile(f, tm.spectrum);
  const DangerRecord& danger = detail::danger_for_profile_top(tm, profile);
  const ComplexVector w1 = tm.w.col(danger.target_index);
  const double wilkinson = tm.wilkinson(danger.target_index);
  const double r2 = detail::second_filtered_magnitude(profile);
  const double kappa_v = condition_number(tm.v);

  KappaBounds kb;
  kb.lower = (w1.adjoint() * q0).norm() * wilkinson / (danger.distance * kappa_v * r2);

  const int m = tm.m();
  const ComplexMatrix w1_unit = tm.w.leftCols(m);
  const ComplexMatrix u1 = qf(w1_unit);
  const double smin_u1q0 = detail::min_singular_value(ComplexMatrix(u1.adjoint() * q0));
  if (smin_u1q0 == 0.0) throw NumericalError("kappa_bounds_nonnormal: U1^* Q0 is rank-deficient");
  const double smin_v1 = detail::min_singular_value(tm.v.leftCols(m));
  const double smin_w1 = detail::min_singular_value(w1_unit);
  kb.upper = (std::abs(profile.target_values[0]) / profile.target_min) * kappa_v /
             (smin_u1q0 * smin_v1 * smin_w1);
  return kb;
}

/// Checks that the second iterate is well-conditioned after the single column
/// scaling T = diag(1/r(lambda_1), 1, ..., 1). The right-hand side carries a
/// 10% multiplier absorbing the O(d) remainder of the bound.
inline BoundCheck twice_enough_check(const RationalFilter& f, const TestMatrix& tm,
                                     const Eigen::Ref<const ComplexMatrix>& q1,
                                     const Eigen::Ref<const ComplexMatrix>& x2) {
  const FilterSpectrumProfile profile = filter_profile(f, tm.spectrum);
  const DangerRecord& danger = detail::danger_for_profile_top(tm, profile);
  const int m = tm.m();
  if (m < 2) throw std::invalid_argument("twice_enough_check: needs at least two targets");

  ComplexMatrix v1p(tm.n(), m);
  for (int i = 0; i < m; ++i) v1p.col(i) = tm.v.col(profile.target_order[static_cast<std::size_t>(i)]);

  const ComplexMatrix coords = v1p.adjoint() * q1;
  const double b_norm = coords.row(0).tail(m - 1).norm();
  const ComplexMatrix d_block = coords.bottomRightCorner(m - 1, m - 1);
  const double smin_d = detail::min_singular_value(d_block);
  if (smin_d == 0.0) throw NumericalError("twice_enough_check: block D is singular");

  const double d = danger.distance;
  const double r2 = std::abs(profile.target_values[1]);
  const double big_m = b_norm / d + std::max(1.0, r2);
  const double rhs = big_m * ((b_norm / d + 1.0) / (smin_d * profile.target_min) + 1.0) * 1.10;

  ComplexVector t_scale = ComplexVector::Ones(m);
  t_scale(0) = Complex(1.0, 0.0) / profile.target_values[0];
  const double lhs = condition_number(ComplexMatrix(x2 * t_scale.asDiagonal()));
  return make_bound_check("twice_scaled_kappa", lhs, rhs);
}

// ---------------------------------------------------------------------------
// iteration traces

struct IterationRecord {
  int k = 0;
  ComplexMatrix q;      // orthonormal basis after the step
  ComplexMatrix x_raw;  // pre-orthogonalization iterate
  std::vector<Complex> ritz_values;  // matched to profile target order
  std::vector<double> residuals;
  AngleReport angles;   // span(x_raw) vs the target eigenspace
  double kappa_x = 0.0;
  double kappa_x_scaled = 0.0;       // after unit-column scaling
  double kappa_x_t = 0.0;            // after the danger column scaling T (0 when n/a)
  double gamma_solve = 0.0;          // measured backward-error constant this step
  CoordinateDecomposition coords;
  std::vector<BoundCheck> checks;

  double max_residual() const {
    double r = 0.0;
    for (double x : residuals) r = std::max(r, x);
    return r;
  }
};

struct IterationTrace {
  // experiment metadata
  unsigned long long seed = 0;
  double d = 0.0;  // smallest danger distance, 0 when none
  int ell = 0;
  std::string variant;
  int n = 0;
  int m = 0;
  double a_norm = 0.0;
  double rho = 0.0;
  double gamma1_factor = 0.0;  // max over targets of majorant/|r|
  double gamma2_factor = 0.0;  // max majorant over unwanted
  bool converged = false;

  AngleReport initial_angles;
  std::vector<IterationRecord> iterations;

  double max_gamma() const {
    double g = 0.0;
    for (const auto& rec : iterations) g = std::max(g, rec.gamma_solve);
    return g;
  }
  /// Uniform bound on kappa of the unit-column-scaled iterates, k >= 2.
  double kappa_scaled_bound() const {
    double v = 0.0;
    for (const auto& rec : iterations)
      if (rec.k >= 2) v = std::max(v, rec.kappa_x_scaled);
    return v;
  }
};

/// One-step refinement check with measured constants: the tangent of the
/// largest principal angle must contract by rho up to the additive terms
/// produced by the solver backward errors. Reported inconclusive when the
/// previous-step cosine violates the hypothesis.
inline BoundCheck perturbed_bound_check(const IterationTrace& trace, int k) {
  if (k < 1 || k > static_cast<int>(trace.iterations.size()))
    throw std::invalid_argument("perturbed_bound_check: iteration index out of range");
  const IterationRecord& rec = trace.iterations[static_cast<std::size_t>(k - 1)];
  const AngleReport& prev =
      k == 1 ? trace.initial_angles : trace.iterations[static_cast<std::size_t>(k - 2)].angles;

  const double d_eff = trace.d > 0.0 ? trace.d : 1.0;
  const double gamma1 = rec.gamma_solve * trace.gamma1_factor;
  const double gamma2 = rec.gamma_solve * trace.gamma2_factor;
  const double cos_prev = prev.cosines(0);
  const double cos_k = rec.angles.cosines(0);
  const double hypothesis = gamma1 * trace.a_norm * kUnitRoundoff / d_eff;

  BoundCheck bc;
  bc.name = "perturbed_one_step";
  if (cos_prev <= hypothesis || cos_k <= 0.0) {
    bc.conclusive = false;
    bc.satisfied = true;
    return bc;
  }
  const double alpha = hypothesis / cos_prev;
  if (alpha >= 1.0) {
    bc.conclusive = false;
    bc.satisfied = true;
    return bc;
  }
  const double beta = gamma2 * trace.a_norm * rec.kappa_x_scaled * kUnitRoundoff / cos_k;
  const double rhs = trace.rho * prev.tangents(0) / (1.0 - alpha) + beta;
  bc = make_bound_check("perturbed_one_step", rec.angles.tangents(0), rhs);
  return bc;
}

}  // namespace specfilt
