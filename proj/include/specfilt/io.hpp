#pragma once

// Serialization: JSON schemas for filters and spectra, and the CSV trace
// formats. All floating-point output goes through one %.17g formatter so
// identical runs produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "specfilt/arnoldi.hpp"
#include "specfilt/diagnostics.hpp"
#include "specfilt/phi_dynamics.hpp"
#include "specfilt/rational_filter.hpp"

namespace specfilt {

using Json = nlohmann::json;

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Json filter_to_json(const RationalFilter& f) {
  Json nodes = Json::array();
  Json weights = Json::array();
  for (const Complex& z : f.nodes) nodes.push_back(complex_to_json(z));
  for (const Complex& w : f.weights) weights.push_back(complex_to_json(w));
  return Json{{"nodes", nodes}, {"weights", weights}};
}

inline RationalFilter filter_from_json(const Json& j) {
  RationalFilter f;
  for (const Json& z : j.at("nodes")) f.nodes.push_back(complex_from_json(z));
  for (const Json& w : j.at("weights")) f.weights.push_back(complex_from_json(w));
  f.validate();
  return f;
}

inline Json danger_to_json(const DangerRecord& rec) {
  return Json{{"index", rec.target_index},
              {"pole", complex_to_json(rec.pole)},
              {"distance", rec.distance},
              {"theta", rec.theta}};
}

inline Json spectrum_to_json(const SpectrumSpec& spec) {
  Json j;
  Json target = Json::array();
  Json unwanted = Json::array();
  for (const Complex& z : spec.target) target.push_back(complex_to_json(z));
  for (const Complex& z : spec.unwanted) unwanted.push_back(complex_to_json(z));
  j["target"] = target;
  j["unwanted"] = unwanted;
  if (spec.dangers.size() == 1) {
    j["danger"] = danger_to_json(spec.dangers[0]);
  } else if (spec.dangers.size() > 1) {
    Json arr = Json::array();
    for (const auto& rec : spec.dangers) arr.push_back(danger_to_json(rec));
    j["danger"] = arr;
  }
  return j;
}

inline DangerRecord danger_from_json(const Json& j) {
  DangerRecord rec;
  rec.target_index = j.at("index").get<int>();
  rec.pole = complex_from_json(j.at("pole"));
  rec.distance = j.at("distance").get<double>();
  rec.theta = j.at("theta").get<double>();
  return rec;
}

inline SpectrumSpec spectrum_from_json(const Json& j) {
  SpectrumSpec spec;
  for (const Json& z : j.at("target")) spec.target.push_back(complex_from_json(z));
  if (j.contains("unwanted"))
    for (const Json& z : j.at("unwanted")) spec.unwanted.push_back(complex_from_json(z));
  if (j.contains("danger")) {
    const Json& d = j.at("danger");
    if (d.is_array())
      for (const Json& rec : d) spec.dangers.push_back(danger_from_json(rec));
    else
      spec.dangers.push_back(danger_from_json(d));
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// CSV

/// One row per (iteration, pair). The per-iteration angle/kappa diagnostics
/// and the iteration's one-step bound check repeat on each pair row.
inline void write_trace_csv(const IterationTrace& trace, std::ostream& os) {
  os << "k,pair_index,ritz_value_re,ritz_value_im,residual,tan_theta1,cos_theta1,"
        "kappa_x,kappa_x_scaled,bound_name,bound_lhs,bound_rhs,satisfied\n";
  for (const IterationRecord& rec : trace.iterations) {
    const bool has_angles = rec.angles.cosines.size() > 0;
    const BoundCheck* bc = nullptr;
    for (const BoundCheck& c : rec.checks)
      if (c.name == "perturbed_one_step") bc = &c;
    for (std::size_t p = 0; p < rec.residuals.size(); ++p) {
      os << rec.k << ',' << p << ',' << fmt17(rec.ritz_values[p].real()) << ','
         << fmt17(rec.ritz_values[p].imag()) << ',' << fmt17(rec.residuals[p]) << ','
         << (has_angles ? fmt17(rec.angles.tangents(0)) : "") << ','
         << (has_angles ? fmt17(rec.angles.cosines(0)) : "") << ',' << fmt17(rec.kappa_x) << ','
         << fmt17(rec.kappa_x_scaled) << ',';
      if (bc && bc->conclusive)
        os << bc->name << ',' << fmt17(bc->lhs) << ',' << fmt17(bc->rhs) << ','
           << (bc->satisfied ? 1 : 0);
      else
        os << ",,,";
      os << '\n';
    }
  }
}

inline void write_arnoldi_csv(const ArnoldiTrace& trace, std::ostream& os) {
  os << "k,pair_index,extraction,ritz_value_re,ritz_value_im,residual\n";
  for (const ArnoldiStepRecord& rec : trace.steps) {
    for (std::size_t p = 0; p < rec.residuals_rayleigh_ritz.size(); ++p) {
      os << rec.solve << ',' << p << ",rayleigh_ritz,"
         << fmt17(rec.values_rayleigh_ritz[p].real()) << ','
         << fmt17(rec.values_rayleigh_ritz[p].imag()) << ','
         << fmt17(rec.residuals_rayleigh_ritz[p]) << '\n';
    }
    for (std::size_t p = 0; p < rec.residuals_hessenberg.size(); ++p) {
      os << rec.solve << ',' << p << ",hessenberg,,," << fmt17(rec.residuals_hessenberg[p])
         << '\n';
    }
  }
}

inline void write_phi_csv(const PhiTrajectory& tr, const PhiParams& params, double eta0,
                          std::ostream& os) {
  os << "k,eta,bound\n";
  for (std::size_t k = 0; k < tr.values.size(); ++k)
    os << k << ',' << fmt17(tr.values[k]) << ','
       << fmt17(k == 0 ? eta0 : envelope_bound(params, eta0, static_cast<int>(k))) << '\n';
}

/// Entry dump: one line i,j,re,im per entry.
inline void write_matrix_csv(const Eigen::Ref<const ComplexMatrix>& a, std::ostream& os) {
  os << "i,j,re,im\n";
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      os << i << ',' << j << ',' << fmt17(a(i, j).real()) << ',' << fmt17(a(i, j).imag()) << '\n';
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
}

}  // namespace specfilt
