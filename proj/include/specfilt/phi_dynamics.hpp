#pragma once

// Worst-case error-dynamics map for the tangent of the largest principal
// angle under perturbed filtered iteration: fixed points, iterated
// trajectories, the geometric envelope, and fitting the map's constants from
// a measured trace.

#include <cmath>
#include <vector>

#include "specfilt/diagnostics.hpp"

namespace specfilt {

struct PhiParams {
  double rho = 0.0;   // filtered spectral ratio, in (0,1) for a useful filter
  double eps1 = 0.0;  // multiplicative perturbation level (order u/d)
  double eps2 = 0.0;  // additive perturbation level (order u)

  void validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("PhiParams: rho must be positive");
    if (eps1 < 0.0 || eps2 < 0.0) throw std::invalid_argument("PhiParams: negative epsilon");
    if (eps2 >= 1.0) throw std::invalid_argument("PhiParams: eps2 must be below 1");
  }

  /// Upper end of the admissible domain [0, -1 + 1/eps1).
  double domain_bound() const {
    return eps1 > 0.0 ? -1.0 + 1.0 / eps1 : kInfinity;
  }
};

inline double phi(const PhiParams& p, double eta) {
  p.validate();
  const double bound = p.domain_bound();
  if (eta < 0.0 || eta >= bound) throw PhiDomainError(eta, bound);
  return (p.rho * eta / (1.0 - p.eps1 * (1.0 + eta)) + p.eps2) / (1.0 - p.eps2);
}

struct PhiFixedPoints {
  double eta_minus = 0.0;
  double eta_plus = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  bool exists = false;
};

/// Fixed points eta_- (attracting) and eta_+ (repelling), from the exact
/// fixed-point quadratic of the map,
///   eps1 (1 - eps2) eta^2 - [(1-eps2)(1-eps1) - rho + eps1 eps2] eta
///     + eps2 (1 - eps1) = 0.
/// eta_- is computed through the conjugate form sigma / (delta +
/// sqrt(delta^2 - sigma)), which keeps full accuracy when sigma << delta^2
/// (exactly the regime of interest; the difference form would cancel
/// catastrophically). eps1 = 0 degenerates to the affine map with the single
/// fixed point eps2 / (1 - eps2 - rho).
inline PhiFixedPoints fixed_points(const PhiParams& p) {
  p.validate();
  PhiFixedPoints fp;
  if (p.eps1 == 0.0) {
    const double slope = p.rho / (1.0 - p.eps2);
    fp.delta = kInfinity;
    fp.sigma = kInfinity;
    fp.eta_plus = kInfinity;
    fp.exists = slope < 1.0;
    if (fp.exists) fp.eta_minus = p.eps2 / (1.0 - p.eps2 - p.rho);
    return fp;
  }
  const double a = p.eps1 * (1.0 - p.eps2);
  const double b = (1.0 - p.eps2) * (1.0 - p.eps1) - p.rho + p.eps1 * p.eps2;
  const double c = p.eps2 * (1.0 - p.eps1);
  fp.delta = b / (2.0 * a);
  fp.sigma = c / a;
  fp.exists = fp.delta > 0.0 && fp.delta * fp.delta > fp.sigma;
  if (!fp.exists) return fp;
  const double root = std::sqrt(fp.delta * fp.delta - fp.sigma);
  fp.eta_plus = fp.delta + root;
  fp.eta_minus = fp.sigma / (fp.delta + root);
  return fp;
}

struct PhiTrajectory {
  std::vector<double> values;  // eta_0, eta_1, ..., possibly truncated
  bool diverged = false;       // left the admissible domain
};

inline PhiTrajectory iterate_phi(const PhiParams& p, double eta0, int k) {
  p.validate();
  PhiTrajectory out;
  out.values.push_back(eta0);
  double eta = eta0;
  for (int i = 0; i < k; ++i) {
    if (eta < 0.0 || eta >= p.domain_bound()) {
      out.diverged = true;
      break;
    }
    eta = phi(p, eta);
    out.values.push_back(eta);
  }
  return out;
}

/// Geometric envelope for the trajectory from eta0: rhotilde^k eta0 +
/// eps2tilde / (1 - rhotilde). Errors out when the effective rate is >= 1.
inline double envelope_bound(const PhiParams& p, double eta0, int k) {
  p.validate();
  if (eta0 < 0.0 || eta0 >= p.domain_bound())
    throw PhiDomainError(eta0, p.domain_bound());
  const double rho_tilde = p.rho / ((1.0 - p.eps2) * (1.0 - p.eps1 * (1.0 + eta0)));
  if (rho_tilde >= 1.0)
    throw NumericalError("envelope_bound: effective rate >= 1, bound is vacuous");
  const double eps2_tilde = p.eps2 / (1.0 - p.eps2);
  return std::pow(rho_tilde, k) * eta0 + eps2_tilde / (1.0 - rho_tilde);
}

/// Constants of the worst-case map measured from an instrumented run: rho
/// from the filter profile, eps1/eps2 from the recorded solver backward
/// errors and the uniform bound on the scaled iterate condition numbers.
inline PhiParams fit_params_from_trace(const IterationTrace& trace) {
  if (trace.iterations.empty())
    throw std::invalid_argument("fit_params_from_trace: empty trace");
  if (trace.rho <= 0.0 || trace.a_norm <= 0.0)
    throw std::invalid_argument("fit_params_from_trace: trace is missing filter diagnostics");

  const double gamma = trace.max_gamma();
  const double d_eff = trace.d > 0.0 ? trace.d : 1.0;
  double m_hat = trace.kappa_scaled_bound();
  if (m_hat == 0.0) m_hat = trace.iterations.front().kappa_x_scaled;

  PhiParams p;
  p.rho = trace.rho;
  p.eps1 = gamma * trace.gamma1_factor * trace.a_norm * kUnitRoundoff / d_eff;
  p.eps2 = gamma * trace.gamma2_factor * trace.a_norm * m_hat * kUnitRoundoff;
  return p;
}

}  // namespace specfilt
