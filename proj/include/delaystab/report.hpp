#pragma once

#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaystab/certificates.hpp"
#include "delaystab/dde.hpp"
#include "delaystab/equilibria.hpp"
#include "delaystab/roots.hpp"

namespace delaystab {

using json = nlohmann::ordered_json;

inline constexpr const char* version = "0.1.0";

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

/// Provenance block embedded in every report. Wall time is only present when
/// requested, so that equal manifests give byte-identical output.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, fnv1a64 of contents
  std::uint64_t seed = 20190713;
  std::optional<double> wall_seconds;

  void add_input(const std::string& path, const std::string& contents) { inputs.emplace_back(path, hex64(fnv1a64(contents))); }
};

inline json to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["inputs"] = json::array();
  for (const auto& [p, h] : m.inputs) j["inputs"].push_back({{"path", p}, {"fnv1a64", h}});
  j["seed"] = m.seed;
  j["version"] = version;
  if (m.wall_seconds) j["wall_seconds"] = *m.wall_seconds;
  return j;
}

inline json matrix_json(const SymbolicMatrix& m, const VariableSet& vars) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(to_string(m(i, j), vars));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// J, J~ and the delay-block decomposition as canonical polynomial text.
inline json matrices_json(const SymbolicModel& model) {
  json j;
  const auto& vars = model.variables();
  j["network"] = model.network().name();
  j["species"] = model.network().species();
  j["variables"] = vars.names();
  j["jacobian"] = matrix_json(model.jacobian(), vars);
  j["modified_jacobian"] = matrix_json(model.modified_jacobian(), vars);
  j["undelayed_block"] = matrix_json(model.delay_blocks().undelayed, vars);
  j["delayed_blocks"] = json::array();
  for (const auto& b : model.delay_blocks().delayed)
    j["delayed_blocks"].push_back({{"delay", b.symbol}, {"matrix", matrix_json(b.coefficients, vars)}});
  return j;
}

inline json subset_json(const std::vector<std::size_t>& subset) {
  json a = json::array();
  for (auto i : subset) a.push_back(i + 1);
  return a;
}

inline json point_json(const std::vector<double>& point, const VariableSet& vars) {
  json p = json::object();
  for (std::size_t i = 0; i < point.size() && i < vars.size(); ++i) p[vars.name(i)] = point[i];
  return p;
}

inline json sign_json(const SignCertificate& s, const VariableSet& vars) {
  json j;
  j["verdict"] = to_string(s.verdict);
  if (s.positive) j["positive_witness"] = {{"point", point_json(s.positive->point, vars)}, {"value", s.positive->value}};
  if (s.negative) j["negative_witness"] = {{"point", point_json(s.negative->point, vars)}, {"value", s.negative->value}};
  if (s.samples) j["samples"] = s.samples;
  return j;
}

inline json outcome_json(const CertificateOutcome& o, const VariableSet& vars) {
  json j;
  j["verdict"] = to_string(o.verdict);
  j["failing_checks"] = o.failing_checks;
  j["evidence"] = json::array();
  for (const auto& e : o.evidence)
    j["evidence"].push_back({{"subset", subset_json(e.subset)}, {"polynomial", to_string(e.polynomial, vars)}, {"sign", sign_json(e.sign, vars)}});
  j["witnesses"] = json::array();
  for (const auto& w : o.witnesses)
    j["witnesses"].push_back({{"description", w.description}, {"point", point_json(w.point, vars)}, {"value", w.value}});
  if (!o.notes.empty()) j["notes"] = o.notes;
  return j;
}

inline json report_json(const DelayStabilityReport& rep, const SymbolicModel& model, bool with_timing = false) {
  const auto& vars = model.variables();
  json j;
  j["network"] = rep.network;
  j["mode"] = rep.mode;
  j["hypotheses"] = json::array();
  for (const auto& h : rep.hypotheses) {
    json hj;
    hj["name"] = h.name;
    auto o = outcome_json(h.outcome, vars);
    for (auto it = o.begin(); it != o.end(); ++it) hj[it.key()] = it.value();
    if (!h.values.empty()) {
      json vals = json::array();
      for (const auto& [label, v] : h.values) vals.push_back({{"label", label}, {"value", v}});
      hj["values"] = vals;
    }
    j["hypotheses"].push_back(std::move(hj));
  }
  j["overall"] = {{"verdict", to_string(rep.overall.verdict)}, {"failing_checks", rep.overall.failing_checks}};
  if (!rep.blocks.empty()) {
    json blocks = json::array();
    for (const auto& b : rep.blocks) {
      json names = json::array();
      for (auto i : b) names.push_back(model.network().species_name(i));
      blocks.push_back(names);
    }
    j["blocks"] = blocks;
  }
  j["residual_conditions"] = rep.residual_conditions(vars);
  if (with_timing) j["seconds"] = rep.seconds;
  return j;
}

inline json root_count_json(const RootCount& rc) {
  json j;
  j["region"] = {{"sigma_min", rc.region.sigma_min}, {"sigma_max", rc.region.sigma_max}, {"omega_max", rc.region.omega_max}};
  j["count"] = rc.count ? json(*rc.count) : json(nullptr);
  j["status"] = rc.status;
  j["winding"] = rc.winding;
  j["evaluations"] = rc.evaluations;
  if (rc.origin_excluded) j["origin_excluded"] = true;
  if (rc.zero_roots) j["zero_roots"] = rc.zero_roots;
  j["roots"] = json::array();
  for (const auto& r : rc.roots)
    j["roots"].push_back({{"re", r.lambda.real()}, {"im", r.lambda.imag()}, {"residual", r.residual}, {"converged", r.converged}});
  return j;
}

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline void write_equilibria_csv(std::ostream& os, const std::vector<Equilibrium>& eq, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) os << "x" << i + 1 << ",";
  os << "residual\n";
  for (const auto& e : eq) {
    for (double v : e.x) os << format_double(v) << ",";
    os << format_double(e.residual) << "\n";
  }
}

/// Dense output sampled every `interval` from 0 to t_end (inclusive).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double interval,
                                 const ConservationSeries* conservation = nullptr) {
  const std::size_t n = traj.dim();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
  if (conservation) os << ",conservation_residual";
  os << "\n";
  std::vector<double> x(n);
  std::size_t cursor = 0;
  auto steps = static_cast<std::size_t>(std::floor(traj.t_end() / interval + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    double t = std::min(double(k) * interval, traj.t_end());
    traj.evaluate(t, x.data(), cursor);
    os << format_double(t);
    for (double v : x) os << "," << format_double(v);
    if (conservation) os << "," << format_double(k < conservation->max_residual.size() ? conservation->max_residual[k] : 0.0);
    os << "\n";
  }
}

inline std::vector<double> sample_times(double t_end, double interval) {
  std::vector<double> out;
  auto steps = static_cast<std::size_t>(std::floor(t_end / interval + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) out.push_back(std::min(double(k) * interval, t_end));
  return out;
}

}  // namespace delaystab
