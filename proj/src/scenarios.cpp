#include "spurious/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "spurious/error.hpp"
#include "spurious/estimators.hpp"

namespace spurious {

namespace {

constexpr double kTableTolerance = 1e-9;
constexpr double kWeightTolerance = 1e-10;

void require_probability(const char* what, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must lie in [0, 1]");
  }
}

/// |estimate - closed form| <= 3 se, with a rounding allowance for exact estimates.
bool within_three_se(const ScenarioQuantity& q) {
  if (!q.closed_form) return true;
  const double cf = *q.closed_form;
  return std::abs(q.estimate - cf) <= 3.0 * q.std_error + 1e-12 * std::max(1.0, std::abs(cf));
}

void add_mc(ScenarioReport& report, std::string label, std::optional<double> closed_form, const MeanEstimate& est) {
  report.quantities.push_back(ScenarioQuantity{std::move(label), closed_form, est.mean, est.std_error, {}});
}

void add_three_se_checks(ScenarioReport& report) {
  for (const auto& q : report.quantities) {
    if (q.closed_form) report.checks.push_back({q.label + " within 3 se of closed form", within_three_se(q)});
  }
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

std::vector<double> draw_bernoulli(Index n, double p, std::mt19937_64& engine) {
  std::bernoulli_distribution coin(p);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = coin(engine) ? 1.0 : 0.0;
  return out;
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

bool ScenarioReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ScenarioCheck& c) { return c.passed; });
}

const ScenarioQuantity& ScenarioReport::quantity(const std::string& label) const {
  for (const auto& q : quantities) {
    if (q.label == label) return q;
  }
  throw Error(ErrorCode::InvalidArgument, "report '" + name + "' has no quantity '" + label + "'");
}

void Example1Spec::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  require_probability("p", p);
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
}

Example1ClosedForm example1_closed_form(Index n, double p) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  require_probability("p", p);
  if (p == 0.0) return {0.0, 1.0};
  const double m = static_cast<double>(n + 1);
  const double e_w = (m * p - 1.0 + std::pow(1.0 - p, m)) / (m * p);
  return {e_w, 1.0 - p + e_w / static_cast<double>(n)};
}

Example1Expectations example1_expectations(Index n, double p) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  require_probability("p", p);
  const double nd = static_cast<double>(n);
  Example1Expectations out;
  for (Index k = 0; k <= n; ++k) {
    double mass = 0.0;
    if (p == 0.0) {
      mass = k == 0 ? 1.0 : 0.0;
    } else if (p == 1.0) {
      mass = k == n ? 1.0 : 0.0;
    } else {
      const double kd = static_cast<double>(k);
      mass = std::exp(std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                      kd * std::log(p) + (nd - kd) * std::log1p(-p));
    }
    if (mass == 0.0) continue;
    const double u = static_cast<double>(k);
    const double w = u / (1.0 + u);
    out.e_w += mass * w;
    out.e_theta += mass * (1.0 - w * u / nd);
    out.loss_s0 += mass * w * w * u / nd;
    out.loss_s1 += mass * w * w * (1.0 - u / nd);
  }
  out.loss = p * out.loss_s1 + (1.0 - p) * out.loss_s0;
  return out;
}

ScenarioReport example1_simulate(const Example1Spec& spec, Execution exec) {
  spec.validate();
  const Index n = spec.n;
  const double p = spec.p;
  const DesignMatrix identity(MatrixXd::Identity(n, n));
  const VectorXd ones = VectorXd::Ones(n);

  // Per trial: w, mean theta, loss | s'=0, loss | s'=1, loss, |w - u/(1+u)|.
  const auto rows = run_trials<std::vector<double>>(
      spec.trials, spec.seed, exec, [&](std::size_t, std::mt19937_64& engine) {
        const VectorXd s = to_vector(draw_bernoulli(n, p, engine));
        const LinearModel full = fit_full(LabeledData(identity, s, ones));
        const double u = s.sum();
        const double w = full.w_hat(0);
        const VectorXd miss0 = ones - full.theta_hat;
        const VectorXd miss1 = miss0.array() - w;
        const double loss_s0 = miss0.squaredNorm() / static_cast<double>(n);
        const double loss_s1 = miss1.squaredNorm() / static_cast<double>(n);
        return std::vector<double>{w,       full.theta_hat.mean(), loss_s0, loss_s1,
                                   p * loss_s1 + (1.0 - p) * loss_s0, std::abs(w - u / (1.0 + u))};
      });

  const auto cf = example1_closed_form(n, p);
  const auto exact = example1_expectations(n, p);
  ScenarioReport report;
  report.name = "example1";
  report.seed = spec.seed;
  report.trials = spec.trials;
  const auto w = estimate_mean(column(rows, 0));
  const auto theta = estimate_mean(column(rows, 1));
  const auto loss_s0 = estimate_mean(column(rows, 2));
  const auto loss_s1 = estimate_mean(column(rows, 3));
  const auto loss = estimate_mean(column(rows, 4));
  add_mc(report, "w", cf.e_w, w);
  add_mc(report, "theta_mean", cf.e_theta, theta);
  add_mc(report, "loss", exact.loss, loss);
  add_mc(report, "loss_s0", exact.loss_s0, loss_s0);
  add_mc(report, "loss_s1", exact.loss_s1, loss_s1);
  const auto deviations = column(rows, 5);
  const double max_dev = *std::max_element(deviations.begin(), deviations.end());
  report.quantities.push_back(ScenarioQuantity{"max_abs_w_minus_u_over_1_plus_u", std::nullopt, max_dev, 0.0, {}});

  const bool deterministic = p == 0.0 || p == 1.0;
  if (deterministic || spec.trials >= 2) add_three_se_checks(report);
  report.checks.push_back({"w matches fit_full", max_dev <= kWeightTolerance});
  report.group_rows.push_back({"s=0", "full", loss_s0.mean, loss_s0.std_error});
  report.group_rows.push_back({"s=1", "full", loss_s1.mean, loss_s1.std_error});
  return report;
}

ScenarioReport example2_simulate(Index n, double p_s, std::size_t trials, std::uint64_t seed, double p_t,
                                 Execution exec) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be at least 2");
  require_probability("p_s", p_s);
  require_probability("p_t", p_t);
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
  const DesignMatrix identity(MatrixXd::Identity(n, n));
  const VectorXd ones = VectorXd::Ones(n);
  const double nd = static_cast<double>(n);

  // Mean over i and t' ~ Bern(p_t) of the squared miss at a fresh point with s' given.
  auto conditional_loss = [&](const VectorXd& theta, double w_s, double w_t, double s_prime) {
    const VectorXd miss = (ones - theta).array() - w_s * s_prime;
    const VectorXd miss_t = miss.array() - w_t;
    return ((1.0 - p_t) * miss.squaredNorm() + p_t * miss_t.squaredNorm()) / nd;
  };

  // Per trial: w_s, w_t (with s), w_t (without s), then loss|s'=0, loss|s'=1, loss for each model.
  const auto rows = run_trials<std::vector<double>>(trials, seed, exec, [&](std::size_t, std::mt19937_64& engine) {
    const VectorXd s = to_vector(draw_bernoulli(n, p_s, engine));
    const VectorXd t = to_vector(draw_bernoulli(n, p_t, engine));
    MatrixXd both(n, 2);
    both << s, t;
    const LinearModel with_s = fit_multi(LabeledData(identity, both, ones));
    const LinearModel without_s = fit_full(LabeledData(identity, t, ones));
    const double ws = with_s.w_hat(0);
    const double wt = with_s.w_hat(1);
    const double wt0 = without_s.w_hat(0);
    const double with0 = conditional_loss(with_s.theta_hat, ws, wt, 0.0);
    const double with1 = conditional_loss(with_s.theta_hat, ws, wt, 1.0);
    const double without0 = conditional_loss(without_s.theta_hat, 0.0, wt0, 0.0);
    const double without1 = conditional_loss(without_s.theta_hat, 0.0, wt0, 1.0);
    return std::vector<double>{ws,       wt,       wt0,
                               with0,    with1,    p_s * with1 + (1.0 - p_s) * with0,
                               without0, without1, p_s * without1 + (1.0 - p_s) * without0};
  });

  ScenarioReport report;
  report.name = "example2";
  report.seed = seed;
  report.trials = trials;
  const char* labels[] = {"w_s.with_s",         "w_t.with_s",         "w_t.without_s",
                          "error_s0.with_s",    "error_s1.with_s",    "error.with_s",
                          "error_s0.without_s", "error_s1.without_s", "error.without_s"};
  std::vector<MeanEstimate> est;
  for (std::size_t j = 0; j < 9; ++j) {
    est.push_back(estimate_mean(column(rows, j)));
    add_mc(report, labels[j], std::nullopt, est.back());
  }
  report.checks.push_back({"w_t: without_s > with_s", est[2].mean > est[1].mean});
  report.checks.push_back({"error: without_s > with_s", est[8].mean > est[5].mean});
  report.checks.push_back({"error_s0: without_s < with_s", est[6].mean < est[3].mean});
  report.group_rows.push_back({"s=0", "with_s", est[3].mean, est[3].std_error});
  report.group_rows.push_back({"s=1", "with_s", est[4].mean, est[4].std_error});
  report.group_rows.push_back({"s=0", "without_s", est[6].mean, est[6].std_error});
  report.group_rows.push_back({"s=1", "without_s", est[7].mean, est[7].std_error});
  return report;
}

ScenarioReport ovb_simple_report(const OvbSimpleSpec& spec, std::size_t trials, std::uint64_t seed,
                                 Execution exec) {
  const auto cf = ovb_simple_closed_form(spec);
  const auto generator = ovb_simple_generator(spec);
  const auto in_group = ovb_simple_predicate(spec);
  const auto losses = estimate_group_losses(cf.population, generator, in_group, trials, seed, exec);

  // Same draws again for the predictors: h-s = E[y], h+s(s) = E[y | s].
  struct Draw {
    bool s_one = false;
    double y = 0.0;
  };
  const auto draws = run_trials<Draw>(trials, seed, exec, [&](std::size_t, std::mt19937_64& engine) {
    const OvbDraw d = generator(engine);
    return Draw{d.s + spec.p > 0.5, d.y};
  });
  std::vector<double> all;
  std::vector<double> by_s[2];
  for (const auto& d : draws) {
    all.push_back(d.y);
    by_s[d.s_one ? 1 : 0].push_back(d.y);
  }

  const bool prefers_core = group_prefers_core(cf.population, cf.moments);
  const double n = static_cast<double>(trials);
  const double frac = static_cast<double>(losses.members) / n;

  ScenarioReport report;
  report.name = "ovb-simple";
  report.seed = seed;
  report.trials = trials;
  report.quantities.push_back(
      {"group_probability", cf.group_probability, frac, std::sqrt(frac * (1.0 - frac) / n), {}});
  add_mc(report, "loss_with_s", cf.loss_with_s, losses.with_s);
  add_mc(report, "loss_without_s", cf.loss_without_s, losses.without_s);
  add_mc(report, "loss_difference", group_loss_difference(cf.population, cf.moments), losses.difference);
  add_mc(report, "h_minus", cf.h_minus, estimate_mean(all));
  add_mc(report, "h_plus_s0", cf.h_plus_s0, estimate_mean(by_s[0]));
  add_mc(report, "h_plus_s1", cf.h_plus_s1, estimate_mean(by_s[1]));
  report.quantities.push_back({"prefers_core", std::nullopt, prefers_core ? 1.0 : 0.0, 0.0, {}});
  add_three_se_checks(report);

  const auto& diff = losses.difference;
  const bool decisive = std::abs(diff.mean) > 3.0 * diff.std_error;
  report.checks.push_back({"prefers_core agrees with Monte-Carlo sign", !decisive || (diff.mean >= 0.0) == prefers_core});
  report.checks.push_back({"prefers_core", prefers_core});
  report.group_rows.push_back({"g", "with_s", losses.with_s.mean, losses.with_s.std_error});
  report.group_rows.push_back({"g", "without_s", losses.without_s.mean, losses.without_s.std_error});
  return report;
}

ScenarioReport worked_tables() {
  ScenarioReport report;
  report.name = "tables";
  bool table_ok = true;
  auto add = [&](const std::string& label, double value, double reference) {
    report.quantities.push_back({label, std::nullopt, value, 0.0, reference});
    table_ok = table_ok && std::abs(value - reference) <= kTableTolerance;
  };
  auto add_vector = [&](const std::string& label, const VectorXd& value, std::initializer_list<double> reference) {
    Index i = 0;
    for (double r : reference) {
      add(label + "[" + std::to_string(i) + "]", i < value.size() ? value(i) : std::nan(""), r);
      ++i;
    }
  };
  auto close_table = [&](const std::string& name) {
    report.checks.push_back({name + " reproduced within 1e-9", table_ok});
    table_ok = true;
  };
  auto vec = [](std::initializer_list<double> v) {
    VectorXd out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
  };

  // One training point z = e1 in two dimensions; beta* = [1, alpha].
  for (double alpha : {0.0, 1.0, 2.0}) {
    const GroundTruth truth{vec({2, 2}), {vec({1, alpha})}};
    const auto data = LabeledData::from_truth(DesignMatrix(vec({1, 0}).transpose()), truth);
    const auto core = fit_core(data);
    const auto full = fit_full(data);
    const std::string tag = "table1[alpha=" + std::to_string(static_cast<int>(alpha)) + "]";
    add_vector(tag + ".core.theta", core.theta_hat, {2, 0});
    add_vector(tag + ".full.theta", full.theta_hat, {1, 0});
    add(tag + ".full.w", full.w_hat(0), 1);
    add_vector(tag + ".full.implicit", implicit_weights(full, truth), {2, alpha});
  }
  close_table("table1");

  {
    const GroundTruth truth{vec({2, 2, 2}), {vec({1, 2, -2})}};
    const auto data = LabeledData::from_truth(DesignMatrix(vec({1, 0, 0}).transpose()), truth);
    const auto core = fit_core(data);
    const auto full = fit_full(data);
    add_vector("table2.core.theta", core.theta_hat, {2, 0, 0});
    add_vector("table2.full.theta", full.theta_hat, {1, 0, 0});
    add("table2.full.w", full.w_hat(0), 1);
    add_vector("table2.full.implicit", implicit_weights(full, truth), {2, 2, -2});
    const auto rst = fit_rst(data, UnlabeledData::from_truth(MatrixXd::Identity(3, 3), truth), full);
    add_vector("table2.rst.theta", rst.theta_hat, {2, 2, -2});
  }
  close_table("table2");

  {
    const GroundTruth truth{vec({1, 0, 1, 0}), {vec({1, 1, -1, -1})}};
    MatrixXd z(2, 4);
    z << 1, 0, 0, 0, 0, 1, 0, 0;
    const auto data = LabeledData::from_truth(DesignMatrix(z), truth);
    const auto core = fit_core(data);
    const auto full = fit_full(data);
    add_vector("table3.core.theta", core.theta_hat, {1, 0, 0, 0});
    add_vector("table3.full.theta", full.theta_hat, {2.0 / 3.0, -1.0 / 3.0, 0, 0});
    add("table3.full.w", full.w_hat(0), 1.0 / 3.0);
    const VectorXd tests[] = {vec({0, 2, 1, 0}), vec({0, 2, 0, 1})};
    for (int i = 0; i < 2; ++i) {
      const VectorXd s = VectorXd::Constant(1, truth.beta_stars[0].dot(tests[i]));
      const std::string tag = "table3.test" + std::to_string(i + 1);
      add(tag + ".s", s(0), 1);
      add(tag + ".y", truth.theta_star.dot(tests[i]), i == 0 ? 1 : 0);
      add(tag + ".core.prediction", predict(core, tests[i], VectorXd()), 0);
      add(tag + ".full.prediction", predict(full, tests[i], s), -1.0 / 3.0);
    }
  }
  close_table("table3");

  {
    const GroundTruth truth{vec({2, 2, 2}), {vec({1, -3, 0}), vec({1, 0, -3})}};
    const auto data = LabeledData::from_truth(DesignMatrix(vec({1, 0, 0}).transpose()), truth);
    const auto both = fit_multi(data);
    add_vector("table4.both.theta", both.theta_hat, {2.0 / 3.0, 0, 0});
    add_vector("table4.both.w", both.w_hat, {2.0 / 3.0, 2.0 / 3.0});
    add_vector("table4.both.implicit", implicit_weights(both, truth), {2, -2, -2});
    const auto only_s1_data = data.select_spurious({0});
    const auto only_s1 = fit_multi(only_s1_data);
    add_vector("table4.s1.theta", only_s1.theta_hat, {1, 0, 0});
    add_vector("table4.s1.w", only_s1.w_hat, {1});
    add_vector("table4.s1.implicit", implicit_weights(only_s1, *only_s1_data.truth()), {2, -3, 0});
  }
  close_table("table4");
  return report;
}

}  // namespace spurious
