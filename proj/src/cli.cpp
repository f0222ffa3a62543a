#include "spurious/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "spurious/constructions.hpp"
#include "spurious/error.hpp"
#include "spurious/estimators.hpp"
#include "spurious/io.hpp"
#include "spurious/reports.hpp"
#include "spurious/scenarios.hpp"

namespace spurious {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonPositiveGamma:
      return kExitInput;
    case ErrorCode::ParallelParameters:
    case ErrorCode::ParallelTargets:
    case ErrorCode::DimensionTooSmall:
      return kExitConstruction;
    default:
      return kExitNumerical;
  }
}

struct Options {
  std::string instance;
  std::string output;
  std::string format = "json";
  std::string model = "core";
  std::string mode;
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  bool trials_given = false;
  bool seed_given = false;
  std::vector<std::string> params;
};

struct Output {
  std::string json;
  std::string csv;
  int status = kExitOk;
};

/// Parameter lookup: --param KEY=VALUE overrides the instance block.
class Params {
 public:
  Params(Json block, const std::vector<std::string>& overrides) : block_(std::move(block)) {
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw InputError("--param expects KEY=VALUE, got '" + kv + "'");
      const std::string value = kv.substr(eq + 1);
      Json parsed = Json::parse(value, nullptr, false);
      block_[kv.substr(0, eq)] = parsed.is_discarded() ? Json(value) : parsed;
    }
  }

  bool has(const char* key) const { return block_.contains(key) && !block_[key].is_null(); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!block_[key].is_number()) throw InputError(std::string("parameter '") + key + "' must be a number");
    return block_[key].get<double>();
  }

  std::int64_t integer(const char* key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    if (!block_[key].is_number_integer()) throw InputError(std::string("parameter '") + key + "' must be an integer");
    return block_[key].get<std::int64_t>();
  }

  VectorXd vector(const char* key) const { return json_to_vector(block_[key], key); }

 private:
  Json block_;
};

std::size_t positive_count(std::int64_t v, const char* what) {
  if (v < 1) throw InputError(std::string(what) + " must be at least 1");
  return static_cast<std::size_t>(v);
}

std::optional<Instance> maybe_instance(const Options& opt) {
  if (opt.instance.empty()) return std::nullopt;
  return load_instance(opt.instance);
}

Instance require_instance(const Options& opt) {
  if (opt.instance.empty()) throw InputError("--instance is required");
  return load_instance(opt.instance);
}

template <class Report>
Output render(const Report& report, int status = kExitOk) {
  return Output{write_json(to_json(report)), to_csv(report), status};
}

Output cmd_fit(const Options& opt) {
  const Instance inst = require_instance(opt);
  if (!inst.train) throw InputError("fit needs a train block");
  const LabeledData& data = *inst.train;
  const ModelKind kind = parse_model_kind(opt.model);

  FitReport report;
  report.seed = opt.seed;
  switch (kind) {
    case ModelKind::core: report.model = fit_core(data); break;
    case ModelKind::full: report.model = fit_full(data); break;
    case ModelKind::multi: report.model = fit_multi(data); break;
    case ModelKind::rst: {
      if (!inst.unlabeled) throw InputError("--model rst needs an unlabeled block");
      report.model = fit_rst(data, *inst.unlabeled, fit_full(data));
      break;
    }
  }
  report.theta_norm_sq = report.model.theta_hat.squaredNorm();
  report.w_norm_sq = report.model.w_hat.squaredNorm();
  report.training_residual = training_residual(report.model, data);

  std::optional<GroundTruth> truth = data.truth();
  if (!truth && report.model.w_hat.size() == 0 && inst.truth) truth = inst.truth;
  if (truth && !inst.groups.empty()) {
    const Projection p = projection(data.z());
    for (const auto& g : inst.groups) {
      report.group_errors.emplace_back(g.label, population_error(report.model, *truth, g, p));
    }
  }
  return render(report);
}

Output cmd_analyze(const Options& opt) {
  const Instance inst = require_instance(opt);
  if (!inst.train) throw InputError("analyze needs a train block");
  if (!inst.truth || inst.truth->spurious_count() != 1) {
    throw InputError("analyze needs a ground_truth block with exactly one beta*");
  }
  const GroundTruth& truth = *inst.truth;
  const LabeledData data(inst.train->z(), inst.train->z().entries() * truth.beta_matrix(), inst.train->y(), truth);
  const LinearModel core = fit_core(data);
  const LinearModel full = fit_full(data);
  const Projection p = projection(data.z());

  AnalyzeReport report;
  report.seed = opt.seed;
  for (const auto& g : inst.groups) {
    AnalyzeRow row;
    row.group = g.label;
    row.error_core = population_error(core, truth, g, p);
    row.error_full = population_error(full, truth, g, p);
    row.delta = row.error_core - row.error_full;
    row.verdict = removal_verdict(truth, p, g);
    report.rows.push_back(std::move(row));
  }
  if (inst.robust) {
    report.robust = inst.robust;
    report.robust_samples = inst.robust_samples;
    for (std::size_t gi = 0; gi < inst.groups.size(); ++gi) {
      const auto& g = inst.groups[gi];
      // Group gi draws from stream seed + gi; core and full share the sample.
      const MatrixXd sample = draw_bounded_sample(g, *inst.robust, inst.robust_samples, opt.seed + gi);
      report.robust_rows.push_back(RobustRow{g.label, robust_error(core, truth, sample, *inst.robust),
                                             robust_error(full, truth, sample, *inst.robust),
                                             sample_error(core, truth, sample), sample_error(full, truth, sample)});
    }
  }
  return render(report);
}

Output cmd_construct(const Options& opt) {
  if (opt.mode.empty()) throw InputError("construct needs --mode disjoint|balanced");
  const ConstructionMode mode = parse_construction_mode(opt.mode);
  const auto inst = maybe_instance(opt);
  const Params params(inst ? inst->construct : Json::object(), opt.params);

  ConstructReport report;
  report.seed = opt.seed;
  if (mode == ConstructionMode::disjoint) {
    VectorXd theta;
    VectorXd beta;
    if (params.has("theta_star") && params.has("beta_star")) {
      theta = params.vector("theta_star");
      beta = params.vector("beta_star");
    } else if (inst && inst->truth && inst->truth->spurious_count() == 1) {
      theta = inst->truth->theta_star;
      beta = inst->truth->beta_stars.front();
    } else {
      throw InputError("disjoint mode needs theta_star and beta_star");
    }
    const auto n = params.integer("n", 2);
    report.bundle = construct_disjoint(theta, beta, static_cast<Index>(n), params.number("x", 0.1));
  } else {
    VectorXd s;
    VectorXd y;
    if (params.has("S") && params.has("Y")) {
      s = params.vector("S");
      y = params.vector("Y");
    } else if (inst && inst->train && inst->train->spurious_count() == 1) {
      s = inst->train->s().col(0);
      y = inst->train->y();
    } else {
      throw InputError("balanced mode needs S and Y");
    }
    const auto d = params.integer("d", std::max<std::int64_t>(4, s.size()));
    report.bundle = construct_balanced(s, y, static_cast<Index>(d));
  }
  return render(report, report.bundle.verification.passed ? kExitOk : kExitCheckFailed);
}

Output cmd_simulate(const Options& opt) {
  if (opt.scenario.empty()) throw InputError("simulate needs --scenario");
  const auto inst = maybe_instance(opt);
  const Params params(inst ? inst->scenario : Json::object(), opt.params);
  const std::uint64_t seed =
      opt.seed_given ? opt.seed : static_cast<std::uint64_t>(std::max<std::int64_t>(0, params.integer("seed", 0)));
  auto trials = [&](std::int64_t fallback) {
    return opt.trials_given ? positive_count(static_cast<std::int64_t>(opt.trials), "--trials")
                            : positive_count(params.integer("trials", fallback), "trials");
  };

  if (opt.scenario == "tables") {
    ScenarioReport report = worked_tables();
    report.seed = seed;
    return render(report, report.passed() ? kExitOk : kExitCheckFailed);
  }
  if (opt.scenario == "example1") {
    Example1Spec spec;
    spec.n = static_cast<Index>(params.integer("n", 20));
    spec.p = params.number("p", 0.9);
    spec.trials = trials(10000);
    spec.seed = seed;
    return render(example1_simulate(spec));
  }
  if (opt.scenario == "example2") {
    const auto n = static_cast<Index>(params.integer("n", 20));
    return render(example2_simulate(n, params.number("p_s", 0.9), trials(10000), seed, params.number("p_t", 0.5)));
  }
  if (opt.scenario == "ovb-simple") {
    OvbSimpleSpec spec;
    spec.gamma = params.number("gamma", spec.gamma);
    spec.sigma = params.number("sigma", spec.sigma);
    spec.threshold = params.number("threshold", spec.threshold);
    spec.p = params.number("p", spec.p);
    return render(ovb_simple_report(spec, trials(100000), seed));
  }
  throw InputError("unknown scenario '" + opt.scenario + "' (expected example1, example2, ovb-simple or tables)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum-norm regression with spurious features: fit, analyze, construct, simulate"};
  app.name("spurious-lens");
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--instance", opt.instance, "Instance JSON file");
    sub->add_option("--output", opt.output, "Write the report here instead of stdout");
    sub->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", opt.seed, "Random seed (default 0)");
    sub->add_option("--param", opt.params, "Scenario or construction parameter KEY=VALUE");
  };
  CLI::App* fit = app.add_subcommand("fit", "Fit a model on the instance's training data");
  common(fit);
  fit->add_option("--model", opt.model, "Model kind")->check(CLI::IsMember({"core", "full", "multi", "rst"}));
  CLI::App* analyze = app.add_subcommand("analyze", "Per-group errors and removal verdicts");
  common(analyze);
  CLI::App* construct = app.add_subcommand("construct", "Build a counterexample bundle");
  common(construct);
  construct->add_option("--mode", opt.mode, "Construction")->check(CLI::IsMember({"disjoint", "balanced"}));
  CLI::App* simulate = app.add_subcommand("simulate", "Run a scenario");
  common(simulate);
  simulate->add_option("--scenario", opt.scenario, "example1, example2, ovb-simple or tables");
  simulate->add_option("--trials", opt.trials, "Monte-Carlo trials");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  opt.seed_given = false;
  opt.trials_given = false;
  for (CLI::App* sub : {fit, analyze, construct, simulate}) {
    if (sub->parsed()) {
      opt.seed_given = sub->get_option("--seed")->count() > 0;
      if (sub == simulate) opt.trials_given = simulate->get_option("--trials")->count() > 0;
    }
  }

  Output result;
  try {
    if (fit->parsed()) result = cmd_fit(opt);
    if (analyze->parsed()) result = cmd_analyze(opt);
    if (construct->parsed()) result = cmd_construct(opt);
    if (simulate->parsed()) result = cmd_simulate(opt);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const Json::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }

  const std::string& text = opt.format == "csv" ? result.csv : result.json;
  if (opt.output.empty()) {
    out << text;
  } else {
    std::ofstream file(opt.output, std::ios::binary);
    if (!(file << text)) {
      err << "input error: cannot write '" << opt.output << "'\n";
      return kExitInput;
    }
  }
  if (result.status == kExitCheckFailed) err << "verification failed; see the report's checks\n";
  return result.status;
}

}  // namespace spurious
