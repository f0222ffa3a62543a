#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spurious/ovb.hpp"
#include "spurious/parallel.hpp"

namespace spurious {

struct ScenarioQuantity {
  std::string label;
  std::optional<double> closed_form;
  double estimate = 0.0;
  double std_error = 0.0;
  /// Published value the estimate is compared against, when there is one.
  std::optional<double> reference;
};

struct ScenarioCheck {
  std::string label;
  bool passed = false;
};

struct ScenarioGroupRow {
  std::string group;
  std::string model;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct ScenarioReport {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<ScenarioQuantity> quantities;
  std::vector<ScenarioCheck> checks;
  std::vector<ScenarioGroupRow> group_rows;

  bool passed() const;
  /// Throws InvalidArgument when the label is absent.
  const ScenarioQuantity& quantity(const std::string& label) const;
};

/// Identity design Z = I_n, y = 1, s_i ~ Bern(p) i.i.d.
struct Example1Spec {
  Index n = 20;
  double p = 0.9;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Exact expectations over u ~ Bin(n, p). Losses are for a fresh test point
/// (e_i with i uniform, s' ~ Bern(p)).
struct Example1Expectations {
  double e_w = 0.0;
  double e_theta = 0.0;
  double loss = 0.0;
  double loss_s0 = 0.0;
  double loss_s1 = 0.0;
};

struct Example1ClosedForm {
  double e_w = 0.0;
  double e_theta = 0.0;
};

/// E[u/(1+u)] and the mean coordinate of the full model's theta; (0, 1) at p = 0.
Example1ClosedForm example1_closed_form(Index n, double p);

/// Expectations by summing over the binomial distribution of u.
Example1Expectations example1_expectations(Index n, double p);

ScenarioReport example1_simulate(const Example1Spec& spec, Execution exec = Execution::parallel);

/// Example 1 plus a second spurious feature t ~ Bern(p_t) on every point.
/// The model with s fits [s, t] jointly, the model without s fits [t].
ScenarioReport example2_simulate(Index n, double p_s, std::size_t trials, std::uint64_t seed, double p_t = 0.5,
                                 Execution exec = Execution::parallel);

ScenarioReport ovb_simple_report(const OvbSimpleSpec& spec, std::size_t trials, std::uint64_t seed,
                                 Execution exec = Execution::parallel);

/// The four worked tables; every quantity carries its published value.
ScenarioReport worked_tables();

}  // namespace spurious
