#pragma once

#include <random>
#include <string>
#include <vector>

#include "delaystab/delaystab.hpp"

namespace delaystab::fixtures {

inline std::string fixture_path(const std::string& file) { return std::string(DELAYSTAB_NETWORKS_DIR) + "/" + file; }

inline ReactionNetwork fixture(const std::string& name) { return load_network(fixture_path(name + ".crn")); }

inline ParameterAssignment fixture_params(const ReactionNetwork& net, const std::string& name, bool require_delays = true) {
  return load_parameters(net, fixture_path(name + ".params"), require_delays);
}

/// Log-uniform positive point in [10^lo, 10^hi]^n.
inline std::vector<double> random_positive(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> p(n);
  for (auto& v : p) v = std::pow(10.0, u(rng));
  return p;
}

/// Names of every fixture network shipped in networks/.
inline std::vector<std::string> all_fixtures() {
  return {"running_example", "sequestration6", "kmn_m1", "kmn_m2", "kmn_m3", "nitric_oxide", "single_flow", "delayed_dimer"};
}

}  // namespace delaystab::fixtures
