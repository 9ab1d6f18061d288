#pragma once

// Shift-and-invert Arnoldi with full reorthogonalization, eigenpair
// extraction from either the Hessenberg matrix or a Rayleigh-Ritz step, and
// the restart that re-seeds the iteration with the Ritz vector aligned to the
// amplified second iterate.

#include <string>
#include <utility>
#include <vector>

#include "specfilt/subspace_iteration.hpp"

namespace specfilt {

enum class RestartMode { off, after2, automatic };

inline std::string restart_mode_name(RestartMode m) {
  switch (m) {
    case RestartMode::off: return "off";
    case RestartMode::after2: return "after2";
    case RestartMode::automatic: return "auto";
  }
  return "?";
}

inline RestartMode restart_mode_from_name(const std::string& s) {
  if (s == "off") return RestartMode::off;
  if (s == "after2") return RestartMode::after2;
  if (s == "auto") return RestartMode::automatic;
  throw ConfigError("unknown restart mode: " + s);
}

struct ArnoldiState {
  ComplexMatrix basis;  // n x k orthonormal, k grows by one per solve
  ComplexMatrix h;      // (k+1) x k upper Hessenberg when basis has k+1 columns
  Complex shift;
  ComplexVector y2_cache;  // second iterate, kept pre-orthogonalization
  bool breakdown = false;
  int solves = 0;  // across restarts
  std::vector<std::pair<int, std::string>> restart_log;

  int k() const { return static_cast<int>(basis.cols()); }
};

inline ArnoldiState arnoldi_init(Complex shift, const Eigen::Ref<const ComplexVector>& q1) {
  ArnoldiState s;
  s.shift = shift;
  s.basis = q1 / q1.norm();
  s.h.resize(1, 0);
  return s;
}

/// One expansion: y = (zI - A)^{-1} q_last, orthogonalized against the basis
/// with two Gram-Schmidt passes. A residual below n*u*||y|| is a lucky
/// breakdown: the basis already spans an invariant subspace.
inline ArnoldiState arnoldi_step(const Eigen::Ref<const ComplexMatrix>& a, Complex z,
                                 const ArnoldiState& state) {
  if (state.breakdown) throw std::invalid_argument("arnoldi_step: iteration already broke down");
  if (state.k() >= static_cast<int>(a.rows()))
    throw std::invalid_argument("arnoldi_step: basis already spans the full space");

  ArnoldiState next = state;
  const ComplexVector y = lu_solve_shifted(a, z, state.basis.rightCols(1));
  if (state.solves == 0) next.y2_cache = y;

  const MgsResult mgs = mgs_orthogonalize(y, state.basis);
  const int k = state.k();
  next.h.conservativeResize(k + 1, k);
  next.h.row(k).setZero();  // conservativeResize leaves the new row uninitialized
  next.h.col(k - 1).head(k) = mgs.coeffs;
  next.h(k, k - 1) = Complex(mgs.residual_norm, 0.0);
  next.solves = state.solves + 1;

  if (mgs.breakdown) {
    next.breakdown = true;
    return next;
  }
  next.basis.conservativeResize(Eigen::NoChange, k + 1);
  next.basis.col(k) = mgs.q;
  return next;
}

/// Ritz pairs straight from the square part of the Hessenberg matrix; the
/// Hessenberg eigenvalues theta map back through lambda = z - 1/theta.
inline RitzPairs extract_hessenberg(const Eigen::Ref<const ComplexMatrix>& a,
                                    const ArnoldiState& state) {
  const Eigen::Index s = state.h.cols();
  if (s < 1) throw std::invalid_argument("extract_hessenberg: no completed steps");
  const ComplexMatrix hs = state.h.topLeftCorner(s, s);
  // The Hessenberg matrix of a shift-and-invert run can have its norm
  // concentrated in one amplified entry; the Schur backsolve keeps the
  // remaining eigenvectors accurate at their own scale.
  const EigDecomposition eig = eig_dense(hs, /*force_general=*/true);

  RitzPairs out;
  out.values.resize(s);
  out.vectors.resize(a.rows(), s);
  out.residuals.resize(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const Complex theta = eig.eigenvalues(i);
    ComplexVector v = state.basis.leftCols(s) * eig.eigenvectors.col(i);
    v.normalize();
    out.vectors.col(i) = v;
    if (theta == Complex(0.0, 0.0)) {
      out.values(i) = Complex(kInfinity, 0.0);
      out.residuals(i) = kInfinity;
      continue;
    }
    out.values(i) = state.shift - 1.0 / theta;
    out.residuals(i) = (a * v - out.values(i) * v).norm();
  }
  return out;
}

/// Rayleigh-Ritz extraction over the whole current basis.
inline RitzPairs extract_rayleigh_ritz(const Eigen::Ref<const ComplexMatrix>& a,
                                       const ArnoldiState& state,
                                       const std::vector<Complex>* targets = nullptr) {
  return rayleigh_ritz(a, state.basis, nullptr, targets);
}

/// Restart with the Ritz vector most closely aligned with the cached second
/// iterate. When no Ritz vector reaches the alignment threshold there is no
/// dominant direction to deflate and the restart is a logged no-op.
inline ArnoldiState ritz_restart(const Eigen::Ref<const ComplexMatrix>& a, Complex z,
                                 const ArnoldiState& state, double alignment_threshold = 1e-3) {
  if (state.k() < 2) throw std::invalid_argument("ritz_restart: needs at least two basis vectors");
  if (state.y2_cache.size() == 0)
    throw std::invalid_argument("ritz_restart: second iterate was never cached");

  const RitzPairs pairs = extract_rayleigh_ritz(a, state);
  const double y2_norm = state.y2_cache.norm();
  int best = -1;
  double best_align = 0.0;
  for (Eigen::Index i = 0; i < pairs.values.size(); ++i) {
    const double align = std::abs(state.y2_cache.dot(pairs.vectors.col(i))) / y2_norm;
    if (align > best_align) {
      best_align = align;
      best = static_cast<int>(i);
    }
  }

  ArnoldiState next = state;
  if (best < 0 || best_align < alignment_threshold) {
    next.restart_log.emplace_back(state.solves, "no-op: no dominant direction");
    return next;
  }
  next.basis = pairs.vectors.col(best);
  next.basis.col(0).normalize();
  next.h.resize(1, 0);
  next.breakdown = false;
  next.restart_log.emplace_back(state.solves,
                                "restarted with ritz vector " + std::to_string(best));
  (void)z;
  return next;
}

// ---------------------------------------------------------------------------
// traced runs

struct ArnoldiStepRecord {
  int solve = 0;
  double h_norm = 0.0;
  double y_norm = 0.0;  // pre-orthogonalization iterate norm
  bool restarted_after = false;
  // residuals/values matched to the experiment's target list, both extractions
  std::vector<double> residuals_hessenberg;
  std::vector<double> residuals_rayleigh_ritz;
  std::vector<Complex> values_rayleigh_ritz;
};

struct ArnoldiTrace {
  Complex shift;
  std::string restart_mode;
  bool breakdown = false;
  std::vector<ArnoldiStepRecord> steps;
  std::vector<std::pair<int, std::string>> restart_log;
  ArnoldiState final_state;
};

namespace detail {

inline std::vector<double> matched_residuals(const RitzPairs& pairs,
                                             const std::vector<Complex>& targets) {
  std::vector<double> out(targets.size(), kInfinity);
  const std::vector<int> pick = match_to_targets(targets, pairs.values, pairs.residuals);
  for (std::size_t t = 0; t < targets.size(); ++t)
    if (pick[t] >= 0) out[t] = pairs.residuals(pick[t]);
  return out;
}

}  // namespace detail

/// Run shift-and-invert Arnoldi for a solve budget, extracting both ways at
/// every step. In after2 mode the restart fires unconditionally once two
/// basis vectors exist; in auto mode only when the second iterate was
/// amplified by at least ampl_threshold.
inline ArnoldiTrace run_arnoldi(const TestMatrix& tm, Complex z,
                                const Eigen::Ref<const ComplexVector>& q1, int total_solves,
                                RestartMode mode = RestartMode::off,
                                double ampl_threshold = 1e6) {
  const std::vector<Complex>& targets = tm.spectrum.target;
  ArnoldiTrace trace;
  trace.shift = z;
  trace.restart_mode = restart_mode_name(mode);

  ArnoldiState state = arnoldi_init(z, q1);
  for (int s = 1; s <= total_solves; ++s) {
    state = arnoldi_step(tm.a, z, state);

    ArnoldiStepRecord rec;
    rec.solve = s;
    rec.h_norm = spectral_norm(state.h);
    rec.y_norm = state.h.rightCols(1).norm();  // ||y|| = norm of the new column
    if (!state.breakdown) {
      rec.residuals_hessenberg = detail::matched_residuals(extract_hessenberg(tm.a, state), targets);
      const RitzPairs rr = extract_rayleigh_ritz(tm.a, state, &targets);
      rec.residuals_rayleigh_ritz = detail::matched_residuals(rr, targets);
      const std::vector<int> pick = match_to_targets(targets, rr.values, rr.residuals);
      for (std::size_t t = 0; t < targets.size(); ++t)
        rec.values_rayleigh_ritz.push_back(pick[t] >= 0 ? rr.values(pick[t])
                                                        : Complex(kInfinity, 0.0));
    }

    if (s == 1 && !state.breakdown &&
        (mode == RestartMode::after2 ||
         (mode == RestartMode::automatic && state.y2_cache.norm() >= ampl_threshold * 1.0))) {
      state = ritz_restart(tm.a, z, state);
      rec.restarted_after = !state.restart_log.empty() &&
                            state.restart_log.back().second.rfind("restarted", 0) == 0;
    }

    trace.steps.push_back(std::move(rec));
    if (state.breakdown) break;
  }

  trace.breakdown = state.breakdown;
  trace.restart_log = state.restart_log;
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace specfilt
