#pragma once

// Rational filters r(z) = sum_j w_j (z_j - z)^{-1}: construction from circular
// contours, scalar and majorant evaluation, application to a block of vectors
// via shifted solves, and the filtered profile of a prescribed spectrum.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "specfilt/linalg.hpp"
#include "specfilt/spectrum_spec.hpp"

namespace specfilt {

struct RationalFilter {
  std::vector<Complex> nodes;    // poles z_j, pairwise distinct
  std::vector<Complex> weights;  // w_j, not all zero

  int degree() const { return static_cast<int>(nodes.size()); }

  void validate() const {
    if (nodes.empty() || nodes.size() != weights.size())
      throw std::invalid_argument("RationalFilter: node/weight lists empty or mismatched");
    double zmax = 0.0;
    bool nonzero = false;
    for (const Complex& w : weights) {
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
        throw std::invalid_argument("RationalFilter: non-finite weight");
      if (w != Complex(0.0, 0.0)) nonzero = true;
    }
    if (!nonzero) throw std::invalid_argument("RationalFilter: all weights are zero");
    for (const Complex& z : nodes) zmax = std::max(zmax, std::abs(z));
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j)
        if (std::abs(nodes[i] - nodes[j]) <= 1e3 * kUnitRoundoff * zmax)
          throw std::invalid_argument("RationalFilter: nodes are not pairwise distinct");
  }
};

namespace detail {

inline void check_pole_distance(const RationalFilter& f, Complex lambda) {
  for (const Complex& z : f.nodes) {
    const double scale = std::max({1.0, std::abs(z), std::abs(lambda)});
    if (std::abs(z - lambda) <= 16.0 * kUnitRoundoff * scale) throw PoleHitError(z, lambda);
  }
}

}  // namespace detail

/// r(lambda), summed pairwise in fixed node order.
inline Complex eval_scalar(const RationalFilter& f, Complex lambda) {
  detail::check_pole_distance(f, lambda);
  std::vector<Complex> terms(f.nodes.size());
  for (std::size_t j = 0; j < f.nodes.size(); ++j)
    terms[j] = f.weights[j] / (f.nodes[j] - lambda);
  return pairwise_sum(terms);
}

/// Majorant rtilde(lambda) = sum_j |w_j| / |z_j - lambda| >= |r(lambda)|.
inline double eval_majorant(const RationalFilter& f, Complex lambda) {
  detail::check_pole_distance(f, lambda);
  std::vector<double> terms(f.nodes.size());
  for (std::size_t j = 0; j < f.nodes.size(); ++j)
    terms[j] = std::abs(f.weights[j]) / std::abs(f.nodes[j] - lambda);
  return pairwise_sum(terms);
}

/// Node placement for trapezoid discretizations of a circular contour:
/// midpoint offsets the nodes by half a step (no node on the real axis for
/// even ell); endpoint puts nodes at angle 0, so center +/- radius are poles.
enum class NodePlacement { midpoint, endpoint };

/// Trapezoid rule for the Cauchy integral of the disk indicator. Scalar
/// values follow the closed form tau^ell / (tau^ell - w^ell) with
/// w = (lambda - center)/radius and tau the placement phase.
inline RationalFilter circle_filter(Complex center, double radius, int ell,
                                    NodePlacement placement = NodePlacement::midpoint) {
  if (ell < 2) throw std::invalid_argument("circle_filter: ell must be >= 2");
  if (radius <= 0.0) throw std::invalid_argument("circle_filter: radius must be positive");
  const double offset = placement == NodePlacement::midpoint ? 0.5 : 0.0;
  RationalFilter f;
  f.nodes.resize(static_cast<std::size_t>(ell));
  f.weights.resize(static_cast<std::size_t>(ell));
  const double pi = std::acos(-1.0);
  for (int j = 0; j < ell; ++j) {
    const Complex dir = unit_phase(2.0 * pi * (static_cast<double>(j) + offset) / ell);
    f.nodes[static_cast<std::size_t>(j)] = center + radius * dir;
    f.weights[static_cast<std::size_t>(j)] = radius * dir / static_cast<double>(ell);
  }
  return f;
}

/// Rescale all weights so the weight at pole_index becomes one.
inline RationalFilter normalize_at_pole(const RationalFilter& f, int pole_index) {
  if (pole_index < 0 || pole_index >= f.degree())
    throw std::invalid_argument("normalize_at_pole: index out of range");
  const Complex wstar = f.weights[static_cast<std::size_t>(pole_index)];
  if (wstar == Complex(0.0, 0.0))
    throw std::invalid_argument("normalize_at_pole: weight at the pole is zero");
  RationalFilter out = f;
  for (Complex& w : out.weights) w /= wstar;
  return out;
}

inline int nearest_node_index(const RationalFilter& f, Complex lambda) {
  int best = 0;
  double dist = std::abs(f.nodes[0] - lambda);
  for (int j = 1; j < f.degree(); ++j) {
    const double dj = std::abs(f.nodes[static_cast<std::size_t>(j)] - lambda);
    if (dj < dist) {
      dist = dj;
      best = j;
    }
  }
  return best;
}

/// Per-application measurements of the shifted solves: the residual of each
/// solve, column-scaled by the final iterate, feeds the measured backward
/// error constant gamma = max_j ||E_j C|| / (||A|| u).
struct FilterApplyStats {
  std::vector<double> scaled_residuals;  // ||E_j C||, one per pole
  double max_scaled_residual = 0.0;
};

/// X = sum_j w_j X_j with (z_j I - A) X_j = Q. The solves are independent;
/// the weighted sum runs serially in node order so traces are reproducible.
inline ComplexMatrix apply_filter(const RationalFilter& f, const Eigen::Ref<const ComplexMatrix>& a,
                                  const Eigen::Ref<const ComplexMatrix>& q,
                                  FilterApplyStats* stats = nullptr) {
  const Eigen::Index n = a.rows();
  if (q.rows() != n) throw std::invalid_argument("apply_filter: block row mismatch");
  const int ell = f.degree();

  std::vector<ComplexMatrix> solutions(static_cast<std::size_t>(ell));
  std::vector<ComplexMatrix> residuals;
  if (stats) residuals.resize(static_cast<std::size_t>(ell));
  for (int j = 0; j < ell; ++j) {
    const Complex z = f.nodes[static_cast<std::size_t>(j)];
    solutions[static_cast<std::size_t>(j)] = lu_solve_shifted(a, z, q);
    if (stats) {
      ComplexMatrix shifted = -a;
      shifted.diagonal().array() += z;
      residuals[static_cast<std::size_t>(j)] =
          shifted * solutions[static_cast<std::size_t>(j)] - q;
    }
  }

  ComplexMatrix x = ComplexMatrix::Zero(n, q.cols());
  for (int j = 0; j < ell; ++j)
    x.noalias() += f.weights[static_cast<std::size_t>(j)] * solutions[static_cast<std::size_t>(j)];

  if (stats) {
    const double root_m = std::sqrt(static_cast<double>(q.cols()));
    RealVector inv_colnorm(q.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
      const double nc = x.col(c).norm();
      inv_colnorm(c) = nc > 0.0 ? 1.0 / (nc * root_m) : 0.0;
    }
    stats->scaled_residuals.assign(static_cast<std::size_t>(ell), 0.0);
    stats->max_scaled_residual = 0.0;
    for (int j = 0; j < ell; ++j) {
      ComplexMatrix scaled = residuals[static_cast<std::size_t>(j)] * inv_colnorm.asDiagonal();
      const double r = spectral_norm(scaled);
      stats->scaled_residuals[static_cast<std::size_t>(j)] = r;
      stats->max_scaled_residual = std::max(stats->max_scaled_residual, r);
    }
  }
  return x;
}

/// The filter evaluated over a prescribed spectrum, with the target indices
/// reordered by decreasing |r|.
struct FilterSpectrumProfile {
  std::vector<Complex> target_values;   // r at targets, |.| nonincreasing
  std::vector<double> majorant_values;  // majorant at targets, same order
  std::vector<int> target_order;        // profile position -> original target index
  std::vector<Complex> unwanted_values;
  double target_min = 0.0;    // |r| at the weakest target
  double unwanted_max = 0.0;  // largest |r| over the unwanted set
  double rho = 0.0;           // unwanted_max / target_min
  double majorant_unwanted_max = 0.0;

  /// max over targets of majorant / |r|; O(1) even with a dangerous
  /// eigenvalue because the amplified pole dominates both.
  double majorant_target_ratio() const {
    double r = 0.0;
    for (std::size_t i = 0; i < target_values.size(); ++i)
      r = std::max(r, majorant_values[i] / std::abs(target_values[i]));
    return r;
  }
};

inline FilterSpectrumProfile filter_profile(const RationalFilter& f, const SpectrumSpec& spectrum) {
  if (spectrum.target.empty()) throw std::invalid_argument("filter_profile: empty target set");
  const int m = spectrum.target_count();

  std::vector<Complex> rt(static_cast<std::size_t>(m));
  std::vector<double> mt(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    rt[static_cast<std::size_t>(i)] = eval_scalar(f, spectrum.target[static_cast<std::size_t>(i)]);
    mt[static_cast<std::size_t>(i)] = eval_majorant(f, spectrum.target[static_cast<std::size_t>(i)]);
  }

  FilterSpectrumProfile prof;
  prof.target_order.resize(static_cast<std::size_t>(m));
  std::iota(prof.target_order.begin(), prof.target_order.end(), 0);
  std::stable_sort(prof.target_order.begin(), prof.target_order.end(), [&](int i, int j) {
    return std::abs(rt[static_cast<std::size_t>(i)]) > std::abs(rt[static_cast<std::size_t>(j)]);
  });
  for (int i : prof.target_order) {
    prof.target_values.push_back(rt[static_cast<std::size_t>(i)]);
    prof.majorant_values.push_back(mt[static_cast<std::size_t>(i)]);
  }
  prof.target_min = std::abs(prof.target_values.back());

  for (const Complex& lam : spectrum.unwanted) {
    const Complex r = eval_scalar(f, lam);
    prof.unwanted_values.push_back(r);
    prof.unwanted_max = std::max(prof.unwanted_max, std::abs(r));
    prof.majorant_unwanted_max = std::max(prof.majorant_unwanted_max, eval_majorant(f, lam));
  }

  prof.rho = spectrum.unwanted.empty() ? 0.0 : prof.unwanted_max / prof.target_min;
  if (prof.rho >= 1.0) throw SeparationFailure(prof.rho);
  return prof;
}

}  // namespace specfilt
