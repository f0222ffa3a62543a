#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spurious/analysis.hpp"
#include "spurious/constructions.hpp"
#include "spurious/io.hpp"
#include "spurious/scenarios.hpp"

namespace spurious {

struct FitReport {
  std::uint64_t seed = 0;
  LinearModel model;
  double theta_norm_sq = 0.0;
  double w_norm_sq = 0.0;
  double training_residual = 0.0;
  /// Population error per group; empty without groups or ground truth.
  std::vector<std::pair<std::string, double>> group_errors;
};

struct AnalyzeRow {
  std::string group;
  double error_core = 0.0;
  double error_full = 0.0;
  double delta = 0.0;  // error_core - error_full
  RemovalVerdict verdict;
};

struct RobustRow {
  std::string group;
  double robust_core = 0.0;
  double robust_full = 0.0;
  double error_core_sample = 0.0;
  double error_full_sample = 0.0;
};

struct AnalyzeReport {
  std::uint64_t seed = 0;
  std::vector<AnalyzeRow> rows;
  std::optional<RobustSpec> robust;
  Index robust_samples = 0;
  std::vector<RobustRow> robust_rows;
};

struct ConstructReport {
  std::uint64_t seed = 0;
  CounterexampleBundle bundle;
};

Json to_json(const RemovalVerdict& v);
RemovalVerdict verdict_from_json(const Json& j);

Json to_json(const FitReport& r);
Json to_json(const AnalyzeReport& r);
Json to_json(const ConstructReport& r);
Json to_json(const ScenarioReport& r);

FitReport fit_report_from_json(const Json& j);
AnalyzeReport analyze_report_from_json(const Json& j);
ConstructReport construct_report_from_json(const Json& j);
ScenarioReport scenario_report_from_json(const Json& j);

/// CSV projections. Fit, construct and scenario reports round-trip in full;
/// the analyze CSV carries the per-group verdict table only.
std::string to_csv(const FitReport& r);
std::string to_csv(const AnalyzeReport& r);
std::string to_csv(const ConstructReport& r);
std::string to_csv(const ScenarioReport& r);

FitReport fit_report_from_csv(std::string_view text);
AnalyzeReport analyze_report_from_csv(std::string_view text);
ConstructReport construct_report_from_csv(std::string_view text);
ScenarioReport scenario_report_from_csv(std::string_view text);

}  // namespace spurious
