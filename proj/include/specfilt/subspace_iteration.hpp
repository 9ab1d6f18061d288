#pragma once

// Filtered subspace iteration: the plain orthonormalized form, the variant
// that filters Ritz vectors, and the ordered-Schur-vector variant, plus the
// instrumented run loop that fills an IterationTrace.

#include <string>
#include <vector>

#include "specfilt/diagnostics.hpp"

namespace specfilt {

enum class IterationVariant { plain_qr, rayleigh_ritz, schur };

inline std::string variant_name(IterationVariant v) {
  switch (v) {
    case IterationVariant::plain_qr: return "plain_qr";
    case IterationVariant::rayleigh_ritz: return "rayleigh_ritz";
    case IterationVariant::schur: return "schur";
  }
  return "?";
}

inline IterationVariant variant_from_name(const std::string& s) {
  if (s == "plain_qr") return IterationVariant::plain_qr;
  if (s == "rayleigh_ritz") return IterationVariant::rayleigh_ritz;
  if (s == "schur") return IterationVariant::schur;
  throw ConfigError("unknown iteration variant: " + s);
}

/// |r(lambda)|, treating a pole hit as infinite dominance.
inline double filter_score(const RationalFilter& f, Complex lambda) {
  try {
    return std::abs(eval_scalar(f, lambda));
  } catch (const PoleHitError&) {
    return kInfinity;
  }
}

struct RitzPairs {
  ComplexVector values;
  ComplexMatrix vectors;  // unit columns
  RealVector residuals;   // ||A v - lambda v||
};

/// Ritz pairs of span(Q): eigenpairs of Q^* A Q lifted back through Q.
/// Sorted by descending |r| when a filter is given, otherwise by distance to
/// the target set when one is given, otherwise left in eigensolver order.
inline RitzPairs rayleigh_ritz(const Eigen::Ref<const ComplexMatrix>& a,
                               const Eigen::Ref<const ComplexMatrix>& q,
                               const RationalFilter* f = nullptr,
                               const std::vector<Complex>* targets = nullptr) {
  const Eigen::Index m = q.cols();
  const ComplexMatrix projected = q.adjoint() * (a * q);
  const EigDecomposition eig = eig_dense(projected);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  if (f) {
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      return filter_score(*f, eig.eigenvalues(i)) > filter_score(*f, eig.eigenvalues(j));
    });
  } else if (targets && !targets->empty()) {
    auto dist = [&](Complex lam) {
      double best = kInfinity;
      for (const Complex& t : *targets) best = std::min(best, std::abs(lam - t));
      return best;
    };
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      return dist(eig.eigenvalues(i)) < dist(eig.eigenvalues(j));
    });
  }

  RitzPairs out;
  out.values.resize(m);
  out.vectors.resize(q.rows(), m);
  out.residuals.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = eig.eigenvalues(src);
    ComplexVector v = q * eig.eigenvectors.col(src);
    v.normalize();
    out.vectors.col(i) = v;
    out.residuals(i) = (a * v - out.values(i) * v).norm();
  }
  return out;
}

/// Nearest-neighbor assignment of Ritz values to target eigenvalues: the
/// globally closest (target, value) pair is matched first, so a converged
/// pair is never stolen by a farther target. Exact distance ties break
/// toward the smaller residual.
inline std::vector<int> match_to_targets(const std::vector<Complex>& targets,
                                         const ComplexVector& ritz_values,
                                         const RealVector& residuals) {
  const int m = static_cast<int>(ritz_values.size());
  const int nt = static_cast<int>(targets.size());
  std::vector<bool> value_used(static_cast<std::size_t>(m), false);
  std::vector<int> assignment(targets.size(), -1);
  const int rounds = std::min(m, nt);
  for (int round = 0; round < rounds; ++round) {
    int best_t = -1, best_i = -1;
    double best_dist = kInfinity;
    for (int t = 0; t < nt; ++t) {
      if (assignment[static_cast<std::size_t>(t)] >= 0) continue;
      for (int i = 0; i < m; ++i) {
        if (value_used[static_cast<std::size_t>(i)]) continue;
        const double dist = std::abs(ritz_values(i) - targets[static_cast<std::size_t>(t)]);
        const bool better = dist < best_dist ||
                            (dist == best_dist && best_i >= 0 && residuals(i) < residuals(best_i));
        if (best_i < 0 || better) {
          best_t = t;
          best_i = i;
          best_dist = dist;
        }
      }
    }
    if (best_t < 0) break;
    assignment[static_cast<std::size_t>(best_t)] = best_i;
    value_used[static_cast<std::size_t>(best_i)] = true;
  }
  return assignment;
}

struct SubspaceState {
  int iteration = 0;
  ComplexMatrix q;            // orthonormal basis
  ComplexMatrix x_raw;        // pre-orthogonalization iterate
  ComplexVector ritz_values;
  ComplexMatrix ritz_vectors;
  RealVector residuals;
};

inline SubspaceState initial_state(const Eigen::Ref<const ComplexMatrix>& q0) {
  SubspaceState s;
  s.iteration = 0;
  s.q = q0;
  s.x_raw = q0;
  s.ritz_vectors = q0;  // the first filtered block is r(A) Q0 for every variant
  s.ritz_values = ComplexVector::Zero(q0.cols());
  s.residuals = RealVector::Zero(q0.cols());
  return s;
}

/// One step of the chosen variant. plain_qr filters the orthonormal basis;
/// rayleigh_ritz filters the current (unit-column) Ritz vectors; schur rotates
/// the basis to approximate Schur vectors, ordered by descending |r|, before
/// the next filter application.
inline SubspaceState fsi_step(IterationVariant variant, const Eigen::Ref<const ComplexMatrix>& a,
                              const RationalFilter& f, const SubspaceState& state,
                              FilterApplyStats* stats = nullptr) {
  SubspaceState next;
  next.iteration = state.iteration + 1;

  switch (variant) {
    case IterationVariant::plain_qr: {
      next.x_raw = apply_filter(f, a, state.q, stats);
      next.q = qf(next.x_raw);
      break;
    }
    case IterationVariant::rayleigh_ritz: {
      next.x_raw = apply_filter(f, a, state.ritz_vectors, stats);
      next.q = qf(next.x_raw);
      break;
    }
    case IterationVariant::schur: {
      next.x_raw = apply_filter(f, a, state.q, stats);
      const ComplexMatrix q0 = qf(next.x_raw);
      const ComplexMatrix projected = q0.adjoint() * (a * q0);
      const SortedSchur ss =
          schur_sorted(projected, [&](Complex lam) { return filter_score(f, lam); });
      next.q = q0 * ss.u;
      break;
    }
  }

  const RitzPairs pairs = rayleigh_ritz(a, next.q, &f);
  next.ritz_values = pairs.values;
  next.ritz_vectors = pairs.vectors;
  next.residuals = pairs.residuals;
  return next;
}

struct FsiOptions {
  int max_iters = 25;
  double tol = -1.0;  // < 0: defaults to 1e-12 * ||A||
  bool collect_coords = true;
};

/// Run the iteration against a known test matrix, recording residuals,
/// principal angles, condition numbers, coordinates, and bound checks.
inline IterationTrace run_fsi(IterationVariant variant, const TestMatrix& tm,
                              const RationalFilter& f, const Eigen::Ref<const ComplexMatrix>& q0,
                              const FsiOptions& opts = {}, unsigned long long seed_meta = 0) {
  const FilterSpectrumProfile profile = filter_profile(f, tm.spectrum);
  const int m = static_cast<int>(q0.cols());
  const bool has_danger = !tm.spectrum.dangers.empty();
  const bool use_left = tm.kind == MatrixKind::diagonalizable;

  IterationTrace trace;
  trace.seed = seed_meta;
  trace.d = tm.spectrum.min_danger_distance();
  trace.ell = f.degree();
  trace.variant = variant_name(variant);
  trace.n = tm.n();
  trace.m = m;
  trace.a_norm = spectral_norm(tm.a);
  trace.rho = profile.rho;
  trace.gamma1_factor = profile.majorant_target_ratio();
  trace.gamma2_factor = profile.majorant_unwanted_max;

  // Targets and the reference eigenspace basis in profile order.
  std::vector<Complex> targets_p;
  ComplexMatrix v1p(tm.n(), tm.m());
  for (int i = 0; i < tm.m(); ++i) {
    const int src = profile.target_order[static_cast<std::size_t>(i)];
    targets_p.push_back(tm.spectrum.target[static_cast<std::size_t>(src)]);
    v1p.col(i) = tm.v.col(src);
  }
  const ComplexMatrix y_ref = qf(v1p);

  // Angle-based instrumentation needs equidimensional subspaces; with an
  // oversampled block (m > #targets) only residual/kappa records are kept.
  const bool measure_angles = q0.cols() == tm.m();
  if (measure_angles) trace.initial_angles = principal_angles(q0, y_ref);
  const double tol = opts.tol < 0.0 ? 1e-12 * trace.a_norm : opts.tol;

  SubspaceState state = initial_state(q0);
  ComplexMatrix q_prev = q0;
  for (int k = 1; k <= opts.max_iters; ++k) {
    FilterApplyStats stats;
    state = fsi_step(variant, tm.a, f, state, &stats);

    IterationRecord rec;
    rec.k = k;
    rec.q = state.q;
    rec.x_raw = state.x_raw;

    const std::vector<int> pick = match_to_targets(targets_p, state.ritz_values, state.residuals);
    for (std::size_t t = 0; t < targets_p.size(); ++t) {
      const int i = pick[t];
      rec.ritz_values.push_back(i >= 0 ? state.ritz_values(i) : Complex(kInfinity, 0.0));
      rec.residuals.push_back(i >= 0 ? state.residuals(i) : kInfinity);
    }

    if (measure_angles) rec.angles = principal_angles(state.x_raw, y_ref);
    rec.kappa_x = condition_number(state.x_raw);
    rec.kappa_x_scaled = condition_number(detail::normalize_columns(state.x_raw));
    if (has_danger) {
      ComplexVector t_scale = ComplexVector::Ones(m);
      t_scale(0) = Complex(1.0, 0.0) / profile.target_values[0];
      rec.kappa_x_t = condition_number(ComplexMatrix(state.x_raw * t_scale.asDiagonal()));
    }
    rec.gamma_solve = stats.max_scaled_residual / (trace.a_norm * kUnitRoundoff);
    if (opts.collect_coords) rec.coords = coordinates(state.q, tm, use_left);

    trace.iterations.push_back(std::move(rec));
    IterationRecord& stored = trace.iterations.back();
    if (measure_angles) stored.checks.push_back(perturbed_bound_check(trace, k));
    if (k == 2 && variant == IterationVariant::plain_qr && has_danger &&
        tm.kind == MatrixKind::normal && tm.m() >= 2) {
      stored.checks.push_back(twice_enough_check(f, tm, q_prev, stored.x_raw));
    }

    if (stored.max_residual() <= tol) {
      trace.converged = true;
      break;
    }
    q_prev = state.q;
  }
  return trace;
}

}  // namespace specfilt
