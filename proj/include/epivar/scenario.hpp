#pragma once

#include "epivar/decomposable.hpp"
#include "epivar/prox.hpp"
#include "epivar/quotients.hpp"
#include "epivar/reduction.hpp"

namespace epivar {

struct Scenario;

struct ScenarioCheck {
  std::string name;
  std::string provenance;  // "paper" | "trivial" | "derived-oracle"
  std::function<std::pair<bool, std::string>(const Scenario&, Rng&)> fn;
};

struct Scenario {
  std::string name;
  DecomposablePair pair;
  Vector vbar;        // distinguished subgradient at the base point
  Vector lambda_bar;  // its multiplier
  bool convex = true;
  std::vector<GraphPoint> user_sequence;  // externally supplied graph points
  std::vector<ReductionPair> charts;
  std::vector<ScenarioCheck> checks;
};

struct CheckResult {
  std::string name;
  std::string provenance;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct ScenarioReport {
  std::string scenario;
  std::uint64_t seed = 42;
  std::vector<CheckResult> checks;
  bool all_pass = false;
};

std::vector<std::string> scenario_names();
Scenario build_scenario(const std::string& name, std::uint64_t seed = 42);
ScenarioReport run_scenario(const std::string& name, std::uint64_t seed = 42);
std::string report_to_json(const std::vector<ScenarioReport>& reports, bool include_timing);

// registers the named inner maps used by the CLI instance format
void ensure_maps_registered();

// DecomposablePair from the CLI instance JSON
DecomposablePair pair_from_json(const std::string& text);

}  // namespace epivar
