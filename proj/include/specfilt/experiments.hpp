#pragma once

// The experiment harness: named reproductions driven by a JSON config, each
// producing iteration traces, gnuplot-ready data files, and a summary.

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specfilt/io.hpp"

namespace specfilt {

const double kPi = std::acos(-1.0);

struct ExperimentOverrides {
  std::optional<double> d;
  std::optional<double> theta;
  std::optional<int> ell;
  std::optional<int> m;
  std::optional<int> n;
  std::optional<int> max_iters;
  std::optional<double> tol;
  std::optional<std::string> variant;
  std::optional<std::string> restart_mode;
  std::optional<double> kappa_v;
  // dynamics-map experiment only
  std::optional<double> rho;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<double> eta0;
};

struct ExperimentConfig {
  std::string experiment;
  unsigned long long seed = 1;
  ExperimentOverrides overrides;
  std::optional<SpectrumSpec> custom_spectrum;  // custom experiment only
  std::optional<RationalFilter> custom_filter;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "fig1_arnoldi",       "fig1_fsi",    "fig2_quadrature_refine", "fig2_iteration_refine",
      "fig3_5_normal_danger", "fig6_nonnormal", "fig6_phi",           "fig7_restart",
      "fig8_multi_danger",  "custom"};
  return names;
}

struct ExperimentResult {
  std::string name;
  unsigned long long seed = 0;
  std::vector<std::pair<std::string, IterationTrace>> fsi_traces;
  std::vector<std::pair<std::string, ArnoldiTrace>> arnoldi_traces;
  std::vector<std::pair<std::string, std::string>> data_files;  // (filename, content)
  Json summary;
};

// ---------------------------------------------------------------------------
// config parsing and validation

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  cfg.experiment = j.at("experiment").get<std::string>();
  bool known = false;
  for (const std::string& name : experiment_names()) known = known || name == cfg.experiment;
  if (!known) throw ConfigError("unknown experiment: " + cfg.experiment);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned long long>();
  if (j.contains("overrides")) {
    const Json& o = j.at("overrides");
    auto opt_d = [&](const char* key) -> std::optional<double> {
      return o.contains(key) ? std::optional<double>(o.at(key).get<double>()) : std::nullopt;
    };
    auto opt_i = [&](const char* key) -> std::optional<int> {
      return o.contains(key) ? std::optional<int>(o.at(key).get<int>()) : std::nullopt;
    };
    cfg.overrides.d = opt_d("d");
    cfg.overrides.theta = opt_d("theta");
    cfg.overrides.tol = opt_d("tol");
    cfg.overrides.kappa_v = opt_d("kappa_v");
    cfg.overrides.rho = opt_d("rho");
    cfg.overrides.eps1 = opt_d("eps1");
    cfg.overrides.eps2 = opt_d("eps2");
    cfg.overrides.eta0 = opt_d("eta0");
    cfg.overrides.ell = opt_i("ell");
    cfg.overrides.m = opt_i("m");
    cfg.overrides.n = opt_i("n");
    cfg.overrides.max_iters = opt_i("max_iters");
    if (o.contains("variant")) cfg.overrides.variant = o.at("variant").get<std::string>();
    if (o.contains("restart_mode"))
      cfg.overrides.restart_mode = o.at("restart_mode").get<std::string>();
  }
  if (j.contains("spectrum")) cfg.custom_spectrum = spectrum_from_json(j.at("spectrum"));
  if (j.contains("filter")) cfg.custom_filter = filter_from_json(j.at("filter"));
  return cfg;
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid override: " + what);
}

/// Admissible ranges shared by the matrix-based experiments.
inline void validate_common(const ExperimentOverrides& o, int min_n = 20) {
  if (o.d) require(*o.d > 0.0 && *o.d <= 0.5, "d must lie in (0, 0.5]");
  if (o.theta) require(std::isfinite(*o.theta), "theta must be finite");
  if (o.n) require(*o.n >= min_n && *o.n <= 2000, "n out of range");
  if (o.m) require(*o.m >= 1 && *o.m <= 64, "m out of range");
  if (o.ell) require(*o.ell >= 1 && *o.ell <= 64, "ell out of range");
  if (o.max_iters) require(*o.max_iters >= 1 && *o.max_iters <= 500, "max_iters out of range");
  if (o.tol) require(*o.tol >= 0.0, "tol must be nonnegative");
  if (o.kappa_v) require(*o.kappa_v >= 1.0 && *o.kappa_v <= 1e8, "kappa_v out of range");
  if (o.variant) variant_from_name(*o.variant);
  if (o.restart_mode) restart_mode_from_name(*o.restart_mode);
}

inline std::vector<Complex> uniform_cluster(int count, double lo, double hi) {
  std::vector<Complex> out;
  for (int i = 0; i < count; ++i)
    out.push_back(Complex(lo + (hi - lo) * i / std::max(1, count - 1), 0.0));
  return out;
}

/// Interval spectrum with the dangerous eigenvalue at distance d from z = 10:
/// m-1 plain targets across [10.5, 14.5], the rest clustered in [0, 5].
inline SpectrumSpec interval_danger_spectrum(int n, int m, double d, double theta) {
  SpectrumSpec spec;
  for (int i = 0; i + 1 < m; ++i)
    spec.target.push_back(Complex(10.5 + 4.0 * i / std::max(1, m - 2), 0.0));
  spec.unwanted = uniform_cluster(n - m, 0.0, 5.0);
  return place_danger(spec, Complex(10.0, 0.0), d, theta);
}

/// Shift-and-invert friendly spectrum: targets bunched right above the pole.
inline SpectrumSpec bunched_danger_spectrum(int n, int m, double d, double theta) {
  SpectrumSpec spec;
  for (int i = 1; i < m; ++i) spec.target.push_back(Complex(10.0 + 0.1 * i, 0.0));
  spec.unwanted = uniform_cluster(n - m, 0.0, 5.0);
  return place_danger(spec, Complex(10.0, 0.0), d, theta);
}

inline RationalFilter interval_filter(int ell) {
  RationalFilter f = circle_filter(Complex(12.5, 0.0), 2.5, ell, NodePlacement::endpoint);
  return normalize_at_pole(f, nearest_node_index(f, Complex(10.0, 0.0)));
}

inline RationalFilter unit_shift_filter(Complex z) { return RationalFilter{{z}, {Complex(1.0)}}; }

inline std::string residuals_by_pair(const std::vector<std::vector<double>>& columns,
                                     const std::string& header) {
  std::ostringstream os;
  os << "# " << header << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (std::size_t i = 0; i < rows; ++i) {
    os << (i + 1);
    for (const auto& col : columns) os << ' ' << fmt17(col[i]);
    os << '\n';
  }
  return os.str();
}

inline std::string fsi_per_step_data(const IterationTrace& trace, const std::string& header) {
  std::ostringstream os;
  os << "# " << header << '\n';
  for (const IterationRecord& rec : trace.iterations) {
    os << rec.k;
    for (double r : rec.residuals) os << ' ' << fmt17(r);
    os << '\n';
  }
  return os.str();
}

inline Json trace_summary(const IterationTrace& trace) {
  Json j;
  j["variant"] = trace.variant;
  j["n"] = trace.n;
  j["m"] = trace.m;
  j["d"] = trace.d;
  j["ell"] = trace.ell;
  j["rho"] = trace.rho;
  j["a_norm"] = trace.a_norm;
  j["iterations"] = trace.iterations.size();
  j["converged"] = trace.converged;
  j["gamma_max"] = trace.max_gamma();
  if (!trace.iterations.empty()) {
    Json final_res = Json::array();
    for (double r : trace.iterations.back().residuals) final_res.push_back(r);
    j["final_residuals"] = final_res;
    Json per_iter = Json::array();
    int satisfied = 0, failed = 0, inconclusive = 0;
    for (const IterationRecord& rec : trace.iterations) {
      per_iter.push_back(rec.max_residual());
      for (const BoundCheck& bc : rec.checks) {
        if (!bc.conclusive)
          ++inconclusive;
        else if (bc.satisfied)
          ++satisfied;
        else
          ++failed;
      }
    }
    j["max_residual_per_iteration"] = per_iter;
    j["bound_checks"] = Json{{"satisfied", satisfied}, {"failed", failed},
                             {"inconclusive", inconclusive}};
  }
  return j;
}

inline void attach_fsi_csv(ExperimentResult& result) {
  for (const auto& [label, trace] : result.fsi_traces) {
    std::ostringstream os;
    write_trace_csv(trace, os);
    result.data_files.emplace_back("trace_" + label + ".csv", os.str());
  }
  for (const auto& [label, trace] : result.arnoldi_traces) {
    std::ostringstream os;
    write_arnoldi_csv(trace, os);
    result.data_files.emplace_back("arnoldi_" + label + ".csv", os.str());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// individual experiments

inline ExperimentResult run_fig1_arnoldi(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  const int n = cfg.overrides.n.value_or(100);
  const double d = cfg.overrides.d.value_or(1e-12);
  const double theta = cfg.overrides.theta.value_or(kPi);
  const int solves = cfg.overrides.max_iters.value_or(24);
  const RestartMode mode =
      restart_mode_from_name(cfg.overrides.restart_mode.value_or("off"));
  if (cfg.overrides.ell) detail::require(*cfg.overrides.ell == 1, "fig1 uses a single pole");

  const SpectrumSpec spec = detail::bunched_danger_spectrum(n, 2, d, theta);
  const TestMatrix tm = make_normal(spec, cfg.seed);
  const ComplexVector q1 = random_orthonormal(n, 1, cfg.seed * 31 + 7).col(0);
  const ArnoldiTrace trace = run_arnoldi(tm, Complex(10.0), q1, solves, mode);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  result.arnoldi_traces.emplace_back("main", trace);

  std::ostringstream dat;
  dat << "# k residual_danger residual_second (rayleigh_ritz extraction)\n";
  for (const auto& st : trace.steps)
    dat << st.solve << ' ' << fmt17(st.residuals_rayleigh_ritz[1]) << ' '
        << fmt17(st.residuals_rayleigh_ritz[0]) << '\n';
  result.data_files.emplace_back("fig1_arnoldi.dat", dat.str());

  Json j;
  j["shift"] = complex_to_json(trace.shift);
  j["restart_mode"] = trace.restart_mode;
  j["solves"] = trace.steps.size();
  double min_second = kInfinity, min_danger = kInfinity;
  for (const auto& st : trace.steps) {
    min_second = std::min(min_second, st.residuals_rayleigh_ritz[0]);
    min_danger = std::min(min_danger, st.residuals_rayleigh_ritz[1]);
  }
  j["min_second_pair_residual"] = min_second;
  j["min_danger_residual"] = min_danger;
  result.summary = j;
  detail::attach_fsi_csv(result);
  return result;
}

inline ExperimentResult run_fig1_fsi(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  const int n = cfg.overrides.n.value_or(100);
  const double d = cfg.overrides.d.value_or(1e-12);
  const double theta = cfg.overrides.theta.value_or(kPi);
  if (cfg.overrides.ell) detail::require(*cfg.overrides.ell == 1, "fig1 uses a single pole");

  const SpectrumSpec spec = detail::bunched_danger_spectrum(n, 2, d, theta);
  const TestMatrix tm = make_normal(spec, cfg.seed);
  FsiOptions opts;
  opts.max_iters = cfg.overrides.max_iters.value_or(25);
  opts.tol = cfg.overrides.tol.value_or(-1.0);
  const IterationTrace trace =
      run_fsi(IterationVariant::plain_qr, tm, detail::unit_shift_filter(Complex(10.0)),
              random_orthonormal(n, 2, cfg.seed * 31 + 7), opts, cfg.seed);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  result.fsi_traces.emplace_back("main", trace);
  result.data_files.emplace_back(
      "fig1_fsi.dat", detail::fsi_per_step_data(trace, "k residual_danger residual_second"));
  result.summary = detail::trace_summary(trace);
  detail::attach_fsi_csv(result);
  return result;
}

inline ExperimentResult run_fig2_quadrature(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  const int n = cfg.overrides.n.value_or(100);
  const double d = cfg.overrides.d.value_or(1e-10);
  const double theta = cfg.overrides.theta.value_or(kPi);

  SpectrumSpec spec;
  spec.target.push_back(Complex(12.0, 0.0));
  spec.unwanted = detail::uniform_cluster(n - 2, 0.0, 5.0);
  spec = place_danger(spec, Complex(10.0, 0.0), d, theta);
  const TestMatrix tm = make_normal(spec, cfg.seed);
  const ComplexMatrix q0 = random_orthonormal(n, 2, cfg.seed * 31 + 7);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;

  std::ostringstream dat;
  dat << "# ell residual_danger residual_second (one iteration each)\n";
  Json per_ell = Json::array();
  for (int ell : {4, 8, 16, 32}) {
    FsiOptions opts;
    opts.max_iters = 1;
    opts.tol = 0.0;
    const IterationTrace trace = run_fsi(IterationVariant::plain_qr, tm,
                                         detail::interval_filter(ell), q0, opts, cfg.seed);
    result.fsi_traces.emplace_back("ell" + std::to_string(ell), trace);
    const auto& res = trace.iterations.front().residuals;
    dat << ell << ' ' << fmt17(res[0]) << ' ' << fmt17(res[1]) << '\n';
    per_ell.push_back(Json{{"ell", ell}, {"residual_danger", res[0]},
                           {"residual_second", res[1]}, {"rho", trace.rho}});
  }
  result.data_files.emplace_back("fig2_quadrature.dat", dat.str());
  result.summary = Json{{"per_ell", per_ell}};
  detail::attach_fsi_csv(result);
  return result;
}

inline ExperimentResult run_fig2_iteration(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  const int n = cfg.overrides.n.value_or(100);
  const double d = cfg.overrides.d.value_or(1e-10);
  const double theta = cfg.overrides.theta.value_or(kPi);
  const int ell = cfg.overrides.ell.value_or(8);

  SpectrumSpec spec;
  spec.target.push_back(Complex(12.0, 0.0));
  spec.unwanted = detail::uniform_cluster(n - 2, 0.0, 5.0);
  spec = place_danger(spec, Complex(10.0, 0.0), d, theta);
  const TestMatrix tm = make_normal(spec, cfg.seed);

  FsiOptions opts;
  opts.max_iters = cfg.overrides.max_iters.value_or(25);
  opts.tol = cfg.overrides.tol.value_or(-1.0);
  const IterationTrace trace =
      run_fsi(IterationVariant::plain_qr, tm, detail::interval_filter(ell),
              random_orthonormal(n, 2, cfg.seed * 31 + 7), opts, cfg.seed);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  result.fsi_traces.emplace_back("main", trace);
  result.data_files.emplace_back(
      "fig2_iteration.dat", detail::fsi_per_step_data(trace, "k residual_danger residual_second"));
  result.summary = detail::trace_summary(trace);
  detail::attach_fsi_csv(result);
  return result;
}

inline ExperimentResult run_fig3_5(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  const int n = cfg.overrides.n.value_or(100);
  const int m = cfg.overrides.m.value_or(10);
  const double d = cfg.overrides.d.value_or(1e-10);
  const double theta = cfg.overrides.theta.value_or(kPi);
  const int ell = cfg.overrides.ell.value_or(16);
  detail::require(m >= 2 && m < n, "fig3 needs 2 <= m < n");

  const SpectrumSpec spec = detail::interval_danger_spectrum(n, m, d, theta);
  const TestMatrix tm = make_normal(spec, cfg.seed);
  FsiOptions opts;
  opts.max_iters = cfg.overrides.max_iters.value_or(5);
  opts.tol = cfg.overrides.tol.value_or(0.0);
  const IterationTrace trace =
      run_fsi(variant_from_name(cfg.overrides.variant.value_or("plain_qr")), tm,
              detail::interval_filter(ell), random_orthonormal(n, m, cfg.seed * 31 + 7), opts,
              cfg.seed);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  result.fsi_traces.emplace_back("main", trace);

  // residuals per pair after the first and second iterations
  if (trace.iterations.size() >= 2) {
    result.data_files.emplace_back(
        "fig3_residuals.dat",
        detail::residuals_by_pair({trace.iterations[0].residuals, trace.iterations[1].residuals},
                                  "pair residual_iter1 residual_iter2"));
  }

  // eigenvector coordinates of the computed bases and the raw second iterate
  if (trace.iterations.size() >= 2) {
    const IterationRecord& it1 = trace.iterations[0];
    const IterationRecord& it2 = trace.iterations[1];
    std::ostringstream f4;
    f4 << "# i q1_col1 q1_col" << m << " (coordinates of the first basis)\n";
    for (int i = 0; i < n; ++i)
      f4 << (i + 1) << ' ' << fmt17(it1.coords.magnitudes(i, 0)) << ' '
         << fmt17(it1.coords.magnitudes(i, m - 1)) << '\n';
    result.data_files.emplace_back("fig4_coords.dat", f4.str());

    const CoordinateDecomposition x2c =
        coordinates(specfilt::detail::normalize_columns(it2.x_raw), tm);
    std::ostringstream f5;
    f5 << "# i q2_col" << m << " x2_col1 x2_col" << m
       << " (second basis and raw second iterate)\n";
    for (int i = 0; i < n; ++i)
      f5 << (i + 1) << ' ' << fmt17(it2.coords.magnitudes(i, m - 1)) << ' '
         << fmt17(x2c.magnitudes(i, 0)) << ' ' << fmt17(x2c.magnitudes(i, m - 1)) << '\n';
    result.data_files.emplace_back("fig5_coords.dat", f5.str());
  }

  Json j = detail::trace_summary(trace);
  if (!trace.iterations.empty()) {
    const IterationRecord& it1 = trace.iterations.front();
    j["iter1"] = Json{{"kappa_x", it1.kappa_x},
                      {"residual_danger", it1.residuals[0]},
                      {"max_other_residual",
                       *std::max_element(it1.residuals.begin() + 1, it1.residuals.end())},
                      {"q1_col1_unwanted_max", it1.coords.unwanted_max(0)},
                      {"q1_last_col_unwanted_max", it1.coords.unwanted_max(m - 1)}};
  }
  if (trace.iterations.size() >= 2) {
    const IterationRecord& it2 = trace.iterations[1];
    j["iter2"] = Json{{"kappa_x_scaled_t", it2.kappa_x_t},
                      {"max_residual", it2.max_residual()},
                      {"q2_last_col_unwanted_max", it2.coords.unwanted_max(m - 1)}};
  }
  result.summary = j;
  detail::attach_fsi_csv(result);
  return result;
}

inline ExperimentResult run_fig6_nonnormal(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  const int n = cfg.overrides.n.value_or(100);
  const int m = cfg.overrides.m.value_or(10);
  const double d = cfg.overrides.d.value_or(1e-13);
  const double theta = cfg.overrides.theta.value_or(kPi);
  const int ell = cfg.overrides.ell.value_or(16);
  const double kappa_v = cfg.overrides.kappa_v.value_or(100.0);

  const SpectrumSpec spec = detail::interval_danger_spectrum(n, m, d, theta);
  const TestMatrix tm = make_nonnormal(spec, kappa_v, cfg.seed);
  const RationalFilter f = detail::interval_filter(ell);
  const ComplexMatrix q0 = random_orthonormal(n, m, cfg.seed * 31 + 7, /*real=*/false);

  FsiOptions opts;
  opts.max_iters = cfg.overrides.max_iters.value_or(10);
  opts.tol = cfg.overrides.tol.value_or(0.0);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  Json j;
  j["kappa_v"] = condition_number(tm.v);

  std::vector<std::vector<double>> per_variant_max;
  std::vector<double> rr_kappa;
  for (IterationVariant v :
       {IterationVariant::plain_qr, IterationVariant::schur, IterationVariant::rayleigh_ritz}) {
    const IterationTrace trace = run_fsi(v, tm, f, q0, opts, cfg.seed);
    std::vector<double> maxres;
    for (const auto& rec : trace.iterations) {
      maxres.push_back(rec.max_residual());
      if (v == IterationVariant::rayleigh_ritz) rr_kappa.push_back(rec.kappa_x_scaled);
    }
    per_variant_max.push_back(maxres);
    Json jr = detail::trace_summary(trace);
    j[variant_name(v)] = jr;
    result.fsi_traces.emplace_back(variant_name(v), trace);
  }

  std::ostringstream dat;
  dat << "# k max_residual_plain_qr max_residual_schur max_residual_rayleigh_ritz "
         "kappa_scaled_rayleigh_ritz\n";
  for (std::size_t k = 0; k < per_variant_max[2].size(); ++k) {
    dat << (k + 1);
    for (int v = 0; v < 3; ++v)
      dat << ' '
          << (k < per_variant_max[static_cast<std::size_t>(v)].size()
                  ? fmt17(per_variant_max[static_cast<std::size_t>(v)][k])
                  : std::string("nan"));
    dat << ' ' << fmt17(rr_kappa[k]) << '\n';
  }
  result.data_files.emplace_back("fig6_residuals.dat", dat.str());
  result.summary = j;
  detail::attach_fsi_csv(result);
  return result;
}

inline ExperimentResult run_fig6_phi(const ExperimentConfig& cfg) {
  PhiParams params;
  params.rho = cfg.overrides.rho.value_or(1e-4);
  params.eps1 = cfg.overrides.eps1.value_or(1e-5);
  params.eps2 = cfg.overrides.eps2.value_or(1e-14);
  params.validate();
  const double eta0 = cfg.overrides.eta0.value_or(100.0);
  const int steps = cfg.overrides.max_iters.value_or(14);

  const PhiFixedPoints fp = fixed_points(params);
  const PhiTrajectory tr = iterate_phi(params, eta0, steps);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  std::ostringstream os;
  write_phi_csv(tr, params, eta0, os);
  result.data_files.emplace_back("phi_trajectory.csv", os.str());

  Json j;
  j["rho"] = params.rho;
  j["eps1"] = params.eps1;
  j["eps2"] = params.eps2;
  j["eta0"] = eta0;
  j["exists"] = fp.exists;
  if (fp.exists) {
    j["eta_minus"] = fp.eta_minus;
    j["eta_plus"] = fp.eta_plus;
  }
  j["final_eta"] = tr.values.back();
  j["diverged"] = tr.diverged;
  result.summary = j;
  return result;
}

inline ExperimentResult run_fig7_restart(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  const int n = cfg.overrides.n.value_or(100);
  const int m = cfg.overrides.m.value_or(10);
  const double d = cfg.overrides.d.value_or(1e-12);
  const double theta = cfg.overrides.theta.value_or(kPi);
  const int solves = cfg.overrides.max_iters.value_or(24);

  const SpectrumSpec spec = detail::bunched_danger_spectrum(n, m, d, theta);
  const TestMatrix tm = make_normal(spec, cfg.seed);
  const ComplexVector q1 = random_orthonormal(n, 1, cfg.seed * 31 + 7).col(0);

  const ArnoldiTrace off = run_arnoldi(tm, Complex(10.0), q1, solves, RestartMode::off);
  const RestartMode mode =
      restart_mode_from_name(cfg.overrides.restart_mode.value_or("after2"));
  const ArnoldiTrace fixed = run_arnoldi(tm, Complex(10.0), q1, solves, mode);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  result.arnoldi_traces.emplace_back("no_restart", off);
  result.arnoldi_traces.emplace_back("restart", fixed);

  std::ostringstream dat;
  dat << "# pair res_norestart_rr res_restart_rr res_norestart_hess res_restart_hess\n";
  const auto& a = off.steps.back();
  const auto& b = fixed.steps.back();
  for (int t = 0; t < m; ++t)
    dat << (t + 1) << ' ' << fmt17(a.residuals_rayleigh_ritz[t]) << ' '
        << fmt17(b.residuals_rayleigh_ritz[t]) << ' ' << fmt17(a.residuals_hessenberg[t]) << ' '
        << fmt17(b.residuals_hessenberg[t]) << '\n';
  result.data_files.emplace_back("fig7_residuals.dat", dat.str());

  Json j;
  j["solves"] = solves;
  j["restart_log"] = Json::array();
  for (const auto& [step, what] : fixed.restart_log)
    j["restart_log"].push_back(Json{{"step", step}, {"event", what}});
  double worst_rr = 0, worst_h = 0;
  for (int t = 0; t < m; ++t) {
    worst_rr = std::max(worst_rr, b.residuals_rayleigh_ritz[t]);
    worst_h = std::max(worst_h, b.residuals_hessenberg[t]);
  }
  j["restart_final_max_residual_rayleigh_ritz"] = worst_rr;
  j["restart_final_max_residual_hessenberg"] = worst_h;
  result.summary = j;
  detail::attach_fsi_csv(result);
  return result;
}

inline SpectrumSpec fig8_spectrum(int n) {
  SpectrumSpec spec;
  for (int i = 0; i <= 12; ++i) spec.target.push_back(Complex(10.0 + std::pow(10.0, -i), 0.0));
  spec.unwanted = detail::uniform_cluster(n - 15, 0.0, 5.0);
  spec = place_danger(spec, Complex(10.0, 0.0), 1e-13, kPi);
  spec = place_danger(spec, Complex(10.0, 0.0), 1e-13, kPi, /*allow_coincident=*/true);
  return spec;
}

inline ExperimentResult run_fig8(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides, 40);
  const int n = cfg.overrides.n.value_or(200);
  const int ell = cfg.overrides.ell.value_or(32);
  detail::require(ell % 2 == 0 && ell >= 4, "fig8 needs an even ell >= 4 (pole at z = 10)");
  detail::require(n >= 40, "fig8 needs n >= 40");

  const SpectrumSpec spec = fig8_spectrum(n);
  const TestMatrix tm = make_normal(spec, cfg.seed);
  FsiOptions opts;
  opts.max_iters = cfg.overrides.max_iters.value_or(3);
  opts.tol = cfg.overrides.tol.value_or(0.0);
  const IterationTrace trace =
      run_fsi(IterationVariant::plain_qr, tm, detail::interval_filter(ell),
              random_orthonormal(n, 15, cfg.seed * 31 + 7), opts, cfg.seed);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  result.fsi_traces.emplace_back("main", trace);

  std::vector<std::vector<double>> cols;
  for (const auto& rec : trace.iterations) cols.push_back(rec.residuals);
  result.data_files.emplace_back("fig8_residuals.dat",
                                 detail::residuals_by_pair(cols, "pair residual_per_iteration"));
  result.summary = detail::trace_summary(trace);
  detail::attach_fsi_csv(result);
  return result;
}

inline ExperimentResult run_custom(const ExperimentConfig& cfg) {
  detail::validate_common(cfg.overrides);
  if (!cfg.custom_spectrum) throw ConfigError("custom experiment needs a spectrum");

  SpectrumSpec spec = *cfg.custom_spectrum;
  RationalFilter f;
  if (cfg.custom_filter) {
    f = *cfg.custom_filter;
  } else {
    f = detail::interval_filter(cfg.overrides.ell.value_or(16));
  }
  if (!spec.dangers.empty())
    f = normalize_at_pole(f, nearest_node_index(f, spec.dangers.front().pole));

  const double kappa_v = cfg.overrides.kappa_v.value_or(1.0);
  const TestMatrix tm = kappa_v > 1.0 ? make_nonnormal(spec, kappa_v, cfg.seed)
                                      : make_normal(spec, cfg.seed);
  FsiOptions opts;
  opts.max_iters = cfg.overrides.max_iters.value_or(25);
  opts.tol = cfg.overrides.tol.value_or(-1.0);
  const int m = cfg.overrides.m.value_or(spec.target_count());
  detail::require(m >= spec.target_count(), "custom block must cover the targets");
  const IterationTrace trace =
      run_fsi(variant_from_name(cfg.overrides.variant.value_or("plain_qr")), tm, f,
              random_orthonormal(tm.n(), m, cfg.seed * 31 + 7, spec.all_real()), opts, cfg.seed);

  ExperimentResult result;
  result.name = cfg.experiment;
  result.seed = cfg.seed;
  result.fsi_traces.emplace_back("main", trace);
  result.data_files.emplace_back("residuals.dat",
                                 detail::fsi_per_step_data(trace, "k residual_per_pair"));
  result.summary = detail::trace_summary(trace);
  detail::attach_fsi_csv(result);
  return result;
}

// ---------------------------------------------------------------------------

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "fig1_arnoldi") return run_fig1_arnoldi(cfg);
  if (cfg.experiment == "fig1_fsi") return run_fig1_fsi(cfg);
  if (cfg.experiment == "fig2_quadrature_refine") return run_fig2_quadrature(cfg);
  if (cfg.experiment == "fig2_iteration_refine") return run_fig2_iteration(cfg);
  if (cfg.experiment == "fig3_5_normal_danger") return run_fig3_5(cfg);
  if (cfg.experiment == "fig6_nonnormal") return run_fig6_nonnormal(cfg);
  if (cfg.experiment == "fig6_phi") return run_fig6_phi(cfg);
  if (cfg.experiment == "fig7_restart") return run_fig7_restart(cfg);
  if (cfg.experiment == "fig8_multi_danger") return run_fig8(cfg);
  if (cfg.experiment == "custom") return run_custom(cfg);
  throw ConfigError("unknown experiment: " + cfg.experiment);
}

/// Write every artifact of a result under out_dir/<experiment name>/.
inline std::filesystem::path write_experiment(const ExperimentResult& result,
                                              const std::filesystem::path& out_dir) {
  const std::filesystem::path dir = out_dir / result.name;
  std::filesystem::create_directories(dir);
  for (const auto& [filename, content] : result.data_files)
    write_text_file((dir / filename).string(), content);
  Json summary = result.summary;
  summary["experiment"] = result.name;
  summary["seed"] = result.seed;
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  return dir;
}

}  // namespace specfilt
