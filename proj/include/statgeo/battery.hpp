#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace statgeo {

/// One numeric check: residual compared with tolerance. Most checks need
/// residual <= tolerance; `at_least` checks need residual >= tolerance
/// (used for quantities that must stay away from zero).
struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool at_least = false;
  bool pass() const { return at_least ? residual >= tolerance : residual <= tolerance; }
};

struct CriterionResult {
  std::string name;
  std::string anchor;
  double runtime_limit = 0.0;  // seconds
  double seconds = 0.0;
  std::vector<Check> checks;
  std::string error;  // set when the criterion threw
  bool pass() const;
};

struct BatteryOptions {
  double tol_scale = 1.0;  // multiplies every <= tolerance
  std::string filter;      // substring of the criterion name; empty runs all
  std::uint64_t seed = 0;
  int probes = 0;          // 0 keeps each criterion's own probe count
};

/// The nine criteria in execution order.
std::vector<std::string> criterion_names();

std::vector<CriterionResult> run_battery(const BatteryOptions& opts = {});

/// u(x) on the 1-torus with a variation direction V, as expression strings.
struct VariationPair {
  std::string source, target;
  std::vector<std::string> map, direction;
  double expected = 0.0;  // nan when no closed form is known
};

/// Fixed (u, V) pairs used by the first-variation criterion.
std::vector<VariationPair> first_variation_pairs();

/// Checks keyed by "criterion/check"; wall times are left out so the
/// document is byte-stable for a fixed seed.
nlohmann::json battery_json(const std::vector<CriterionResult>& results);

}  // namespace statgeo
