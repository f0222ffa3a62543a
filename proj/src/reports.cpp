#include "spurious/reports.hpp"

#include <cmath>
#include <map>

#include "spurious/error.hpp"

namespace spurious {

namespace {

const Json& at(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("report is missing '") + key + "'");
  return *it;
}

double number_or_nan(const Json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

double get_double(const Json& j, const char* key) { return number_or_nan(at(j, key)); }

std::optional<double> get_optional(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw InputError("'" + text + "' is not a boolean");
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw InputError("bad seed");
    return v;
  } catch (const std::logic_error&) {
    throw InputError("'" + text + "' is not a seed");
  }
}

Index parse_index(const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 0) throw InputError("bad index");
    return static_cast<Index>(v);
  } catch (const std::logic_error&) {
    throw InputError("'" + text + "' is not an index");
  }
}

std::vector<CsvRow> csv_body(std::string_view text, const CsvRow& header) {
  auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != header) throw InputError("CSV header does not match");
  rows.erase(rows.begin());
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw InputError("CSV row has the wrong number of fields");
  }
  return rows;
}

/// Collects indexed entries (vectors keyed by i, matrices keyed by (r, c)).
struct Cells {
  std::map<std::pair<Index, Index>, double> values;

  void set(Index r, Index c, double v) { values[{r, c}] = v; }

  VectorXd vector() const {
    Index n = 0;
    for (const auto& [key, v] : values) n = std::max(n, key.first + 1);
    VectorXd out = VectorXd::Zero(n);
    for (const auto& [key, v] : values) out(key.first) = v;
    return out;
  }

  MatrixXd matrix() const {
    Index rows = 0;
    Index cols = 0;
    for (const auto& [key, v] : values) {
      rows = std::max(rows, key.first + 1);
      cols = std::max(cols, key.second + 1);
    }
    MatrixXd out = MatrixXd::Zero(rows, cols);
    for (const auto& [key, v] : values) out(key.first, key.second) = v;
    return out;
  }
};

const char* const kVerdictNumbers[] = {"lhs_seen_corr", "rhs_unseen_corr", "unseen_beta_var",
                                       "w_hat",         "error_core",      "error_full"};
const char* const kVerdictFlags[] = {"sign_match", "magnitude_holds", "full_better", "tie"};

double& verdict_number(RemovalVerdict& v, std::string_view name) {
  if (name == "lhs_seen_corr") return v.lhs_seen_corr;
  if (name == "rhs_unseen_corr") return v.rhs_unseen_corr;
  if (name == "unseen_beta_var") return v.unseen_beta_var;
  if (name == "w_hat") return v.w_hat;
  if (name == "error_core") return v.error_core;
  if (name == "error_full") return v.error_full;
  throw InputError("unknown verdict field '" + std::string(name) + "'");
}

bool& verdict_flag(RemovalVerdict& v, std::string_view name) {
  if (name == "sign_match") return v.sign_match;
  if (name == "magnitude_holds") return v.magnitude_holds;
  if (name == "full_better") return v.full_better;
  if (name == "tie") return v.tie;
  throw InputError("unknown verdict flag '" + std::string(name) + "'");
}

}  // namespace

Json to_json(const RemovalVerdict& v) {
  Json j = Json::object();
  RemovalVerdict copy = v;
  for (const char* f : kVerdictFlags) j[f] = verdict_flag(copy, f);
  for (const char* f : kVerdictNumbers) j[f] = verdict_number(copy, f);
  return j;
}

RemovalVerdict verdict_from_json(const Json& j) {
  RemovalVerdict v;
  for (const char* f : kVerdictFlags) verdict_flag(v, f) = at(j, f).get<bool>();
  for (const char* f : kVerdictNumbers) verdict_number(v, f) = get_double(j, f);
  return v;
}

// ---- fit ----

Json to_json(const FitReport& r) {
  Json j = Json::object();
  j["command"] = "fit";
  j["seed"] = r.seed;
  j["model"] = std::string(to_string(r.model.kind));
  j["theta_hat"] = vector_to_json(r.model.theta_hat);
  j["w_hat"] = vector_to_json(r.model.w_hat);
  j["theta_norm_sq"] = r.theta_norm_sq;
  j["w_norm_sq"] = r.w_norm_sq;
  j["norm_sq"] = r.theta_norm_sq + r.w_norm_sq;
  j["training_residual"] = r.training_residual;
  if (!r.group_errors.empty()) {
    Json groups = Json::array();
    for (const auto& [label, error] : r.group_errors) groups.push_back(Json{{"group", label}, {"error", error}});
    j["groups"] = std::move(groups);
  }
  return j;
}

FitReport fit_report_from_json(const Json& j) {
  FitReport r;
  r.seed = at(j, "seed").get<std::uint64_t>();
  r.model.kind = parse_model_kind(at(j, "model").get<std::string>());
  r.model.theta_hat = json_to_vector(at(j, "theta_hat"), "theta_hat");
  r.model.w_hat = json_to_vector(at(j, "w_hat"), "w_hat");
  r.theta_norm_sq = get_double(j, "theta_norm_sq");
  r.w_norm_sq = get_double(j, "w_norm_sq");
  r.training_residual = get_double(j, "training_residual");
  if (auto it = j.find("groups"); it != j.end()) {
    for (const auto& g : *it) r.group_errors.emplace_back(at(g, "group").get<std::string>(), get_double(g, "error"));
  }
  return r;
}

std::string to_csv(const FitReport& r) {
  std::vector<CsvRow> rows{{"field", "key", "value"}};
  rows.push_back({"seed", "", std::to_string(r.seed)});
  rows.push_back({"model", "", std::string(to_string(r.model.kind))});
  for (Index i = 0; i < r.model.theta_hat.size(); ++i) {
    rows.push_back({"theta_hat", std::to_string(i), format_shortest(r.model.theta_hat(i))});
  }
  for (Index i = 0; i < r.model.w_hat.size(); ++i) {
    rows.push_back({"w_hat", std::to_string(i), format_shortest(r.model.w_hat(i))});
  }
  rows.push_back({"theta_norm_sq", "", format_shortest(r.theta_norm_sq)});
  rows.push_back({"w_norm_sq", "", format_shortest(r.w_norm_sq)});
  rows.push_back({"training_residual", "", format_shortest(r.training_residual)});
  for (const auto& [label, error] : r.group_errors) rows.push_back({"group_error", label, format_shortest(error)});
  return write_csv(rows);
}

FitReport fit_report_from_csv(std::string_view text) {
  FitReport r;
  Cells theta;
  Cells w;
  for (const auto& row : csv_body(text, {"field", "key", "value"})) {
    const std::string& field = row[0];
    if (field == "seed") {
      r.seed = parse_seed(row[2]);
    } else if (field == "model") {
      r.model.kind = parse_model_kind(row[2]);
    } else if (field == "theta_hat") {
      theta.set(parse_index(row[1]), 0, parse_double(row[2]));
    } else if (field == "w_hat") {
      w.set(parse_index(row[1]), 0, parse_double(row[2]));
    } else if (field == "theta_norm_sq") {
      r.theta_norm_sq = parse_double(row[2]);
    } else if (field == "w_norm_sq") {
      r.w_norm_sq = parse_double(row[2]);
    } else if (field == "training_residual") {
      r.training_residual = parse_double(row[2]);
    } else if (field == "group_error") {
      r.group_errors.emplace_back(row[1], parse_double(row[2]));
    } else {
      throw InputError("unknown fit CSV field '" + field + "'");
    }
  }
  r.model.theta_hat = theta.vector();
  r.model.w_hat = w.vector();
  return r;
}

// ---- analyze ----

Json to_json(const AnalyzeReport& r) {
  Json j = Json::object();
  j["command"] = "analyze";
  j["seed"] = r.seed;
  Json groups = Json::array();
  for (const auto& row : r.rows) {
    Json g = Json::object();
    g["group"] = row.group;
    g["error_core"] = row.error_core;
    g["error_full"] = row.error_full;
    g["delta"] = row.delta;
    g["verdict"] = to_json(row.verdict);
    groups.push_back(std::move(g));
  }
  j["groups"] = std::move(groups);
  if (r.robust) {
    Json robust = Json::object();
    robust["gamma"] = r.robust->gamma;
    robust["norm_kind"] = std::string(to_string(r.robust->norm_kind));
    robust["samples"] = r.robust_samples;
    Json rows = Json::array();
    for (const auto& row : r.robust_rows) {
      rows.push_back(Json{{"group", row.group},
                          {"robust_core", row.robust_core},
                          {"robust_full", row.robust_full},
                          {"error_core_sample", row.error_core_sample},
                          {"error_full_sample", row.error_full_sample}});
    }
    robust["rows"] = std::move(rows);
    j["robust"] = std::move(robust);
  }
  return j;
}

AnalyzeReport analyze_report_from_json(const Json& j) {
  AnalyzeReport r;
  r.seed = at(j, "seed").get<std::uint64_t>();
  for (const auto& g : at(j, "groups")) {
    AnalyzeRow row;
    row.group = at(g, "group").get<std::string>();
    row.error_core = get_double(g, "error_core");
    row.error_full = get_double(g, "error_full");
    row.delta = get_double(g, "delta");
    row.verdict = verdict_from_json(at(g, "verdict"));
    r.rows.push_back(std::move(row));
  }
  if (auto it = j.find("robust"); it != j.end()) {
    RobustSpec spec;
    spec.gamma = get_double(*it, "gamma");
    spec.norm_kind = parse_norm_kind(at(*it, "norm_kind").get<std::string>());
    r.robust = spec;
    r.robust_samples = at(*it, "samples").get<Index>();
    for (const auto& row : at(*it, "rows")) {
      r.robust_rows.push_back(RobustRow{at(row, "group").get<std::string>(), get_double(row, "robust_core"),
                                        get_double(row, "robust_full"), get_double(row, "error_core_sample"),
                                        get_double(row, "error_full_sample")});
    }
  }
  return r;
}

namespace {

const CsvRow kAnalyzeHeader{"group",           "error_core",  "error_full",      "delta",
                            "sign_match",      "magnitude_holds", "full_better", "tie",
                            "w_hat",           "lhs_seen_corr", "rhs_unseen_corr", "unseen_beta_var",
                            "seed"};

}  // namespace

std::string to_csv(const AnalyzeReport& r) {
  std::vector<CsvRow> rows{kAnalyzeHeader};
  for (const auto& row : r.rows) {
    const auto& v = row.verdict;
    rows.push_back({row.group, format_shortest(row.error_core), format_shortest(row.error_full),
                    format_shortest(row.delta), bool_text(v.sign_match), bool_text(v.magnitude_holds),
                    bool_text(v.full_better), bool_text(v.tie), format_shortest(v.w_hat),
                    format_shortest(v.lhs_seen_corr), format_shortest(v.rhs_unseen_corr),
                    format_shortest(v.unseen_beta_var), std::to_string(r.seed)});
  }
  return write_csv(rows);
}

AnalyzeReport analyze_report_from_csv(std::string_view text) {
  AnalyzeReport r;
  for (const auto& f : csv_body(text, kAnalyzeHeader)) {
    AnalyzeRow row;
    row.group = f[0];
    row.error_core = parse_double(f[1]);
    row.error_full = parse_double(f[2]);
    row.delta = parse_double(f[3]);
    row.verdict.sign_match = parse_bool(f[4]);
    row.verdict.magnitude_holds = parse_bool(f[5]);
    row.verdict.full_better = parse_bool(f[6]);
    row.verdict.tie = parse_bool(f[7]);
    row.verdict.w_hat = parse_double(f[8]);
    row.verdict.lhs_seen_corr = parse_double(f[9]);
    row.verdict.rhs_unseen_corr = parse_double(f[10]);
    row.verdict.unseen_beta_var = parse_double(f[11]);
    row.verdict.error_core = row.error_core;
    row.verdict.error_full = row.error_full;
    r.seed = parse_seed(f[12]);
    r.rows.push_back(std::move(row));
  }
  return r;
}

// ---- construct ----

Json to_json(const ConstructReport& r) {
  const auto& b = r.bundle;
  Json j = Json::object();
  j["command"] = "construct";
  j["seed"] = r.seed;
  j["mode"] = std::string(to_string(b.mode));
  j["theta_star"] = vector_to_json(b.truth.theta_star);
  j["beta_star"] = vector_to_json(b.truth.beta_stars.front());
  j["x_param"] = optional_json(b.x_param);
  j["b_vector"] = b.b_vector ? vector_to_json(*b.b_vector) : Json(nullptr);
  Json directions = Json::array();
  for (const auto& d : b.directions) directions.push_back(vector_to_json(d));
  j["directions"] = std::move(directions);
  j["s_target"] = vector_to_json(b.s_target);
  j["y_target"] = vector_to_json(b.y_target);
  j["z_train"] = matrix_to_json(b.z_train.entries());
  j["z_test_full_wins"] = matrix_to_json(b.z_test_full_wins.entries());
  j["z_test_core_wins"] = matrix_to_json(b.z_test_core_wins.entries());
  const auto& v = b.verification;
  Json ver = Json::object();
  ver["passed"] = v.passed;
  ver["gap_full_wins"] = v.gap_full_wins;
  ver["gap_core_wins"] = v.gap_core_wins;
  ver["preservation_gap"] = optional_json(v.preservation_gap);
  ver["full_wins"] = to_json(v.full_wins);
  ver["core_wins"] = to_json(v.core_wins);
  j["verification"] = std::move(ver);
  return j;
}

ConstructReport construct_report_from_json(const Json& j) {
  ConstructReport r;
  auto& b = r.bundle;
  r.seed = at(j, "seed").get<std::uint64_t>();
  b.mode = parse_construction_mode(at(j, "mode").get<std::string>());
  b.truth = GroundTruth{json_to_vector(at(j, "theta_star"), "theta_star"),
                        {json_to_vector(at(j, "beta_star"), "beta_star")}};
  b.x_param = get_optional(j, "x_param");
  if (const Json& bv = at(j, "b_vector"); !bv.is_null()) b.b_vector = json_to_vector(bv, "b_vector");
  for (const auto& d : at(j, "directions")) b.directions.push_back(json_to_vector(d, "directions"));
  b.s_target = json_to_vector(at(j, "s_target"), "s_target");
  b.y_target = json_to_vector(at(j, "y_target"), "y_target");
  b.z_train = DesignMatrix(json_to_matrix(at(j, "z_train"), "z_train"));
  b.z_test_full_wins = DesignMatrix(json_to_matrix(at(j, "z_test_full_wins"), "z_test_full_wins"));
  b.z_test_core_wins = DesignMatrix(json_to_matrix(at(j, "z_test_core_wins"), "z_test_core_wins"));
  const Json& ver = at(j, "verification");
  b.verification.passed = at(ver, "passed").get<bool>();
  b.verification.gap_full_wins = get_double(ver, "gap_full_wins");
  b.verification.gap_core_wins = get_double(ver, "gap_core_wins");
  b.verification.preservation_gap = get_optional(ver, "preservation_gap");
  b.verification.full_wins = verdict_from_json(at(ver, "full_wins"));
  b.verification.core_wins = verdict_from_json(at(ver, "core_wins"));
  return r;
}

std::string to_csv(const ConstructReport& r) {
  const auto& b = r.bundle;
  std::vector<CsvRow> rows{{"field", "row", "col", "value"}};
  auto scalar = [&](const std::string& field, const std::string& value) { rows.push_back({field, "", "", value}); };
  auto vec = [&](const std::string& field, const VectorXd& v, const std::string& row = "") {
    for (Index i = 0; i < v.size(); ++i) {
      rows.push_back({field, row.empty() ? std::to_string(i) : row, row.empty() ? "" : std::to_string(i),
                      format_shortest(v(i))});
    }
  };
  auto mat = [&](const std::string& field, const MatrixXd& m) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index c = 0; c < m.cols(); ++c) {
        rows.push_back({field, std::to_string(i), std::to_string(c), format_shortest(m(i, c))});
      }
    }
  };
  scalar("seed", std::to_string(r.seed));
  scalar("mode", std::string(to_string(b.mode)));
  if (b.x_param) scalar("x_param", format_shortest(*b.x_param));
  vec("theta_star", b.truth.theta_star);
  vec("beta_star", b.truth.beta_stars.front());
  if (b.b_vector) vec("b_vector", *b.b_vector);
  for (std::size_t k = 0; k < b.directions.size(); ++k) vec("direction", b.directions[k], std::to_string(k));
  vec("s_target", b.s_target);
  vec("y_target", b.y_target);
  mat("z_train", b.z_train.entries());
  mat("z_test_full_wins", b.z_test_full_wins.entries());
  mat("z_test_core_wins", b.z_test_core_wins.entries());
  const auto& v = b.verification;
  scalar("verification.passed", bool_text(v.passed));
  scalar("verification.gap_full_wins", format_shortest(v.gap_full_wins));
  scalar("verification.gap_core_wins", format_shortest(v.gap_core_wins));
  if (v.preservation_gap) scalar("verification.preservation_gap", format_shortest(*v.preservation_gap));
  for (const auto* name : {"full_wins", "core_wins"}) {
    RemovalVerdict copy = std::string_view(name) == "full_wins" ? v.full_wins : v.core_wins;
    const std::string prefix = std::string("verification.") + name + ".";
    for (const char* f : kVerdictFlags) scalar(prefix + f, bool_text(verdict_flag(copy, f)));
    for (const char* f : kVerdictNumbers) scalar(prefix + f, format_shortest(verdict_number(copy, f)));
  }
  return write_csv(rows);
}

ConstructReport construct_report_from_csv(std::string_view text) {
  ConstructReport r;
  auto& b = r.bundle;
  std::map<std::string, Cells> cells;
  std::map<Index, Cells> directions;
  for (const auto& f : csv_body(text, {"field", "row", "col", "value"})) {
    const std::string& field = f[0];
    const std::string& value = f[3];
    if (field == "seed") {
      r.seed = parse_seed(value);
    } else if (field == "mode") {
      b.mode = parse_construction_mode(value);
    } else if (field == "x_param") {
      b.x_param = parse_double(value);
    } else if (field == "direction") {
      directions[parse_index(f[1])].set(parse_index(f[2]), 0, parse_double(value));
    } else if (field.rfind("verification.", 0) == 0) {
      const std::string rest = field.substr(13);
      auto& v = b.verification;
      if (rest == "passed") {
        v.passed = parse_bool(value);
      } else if (rest == "gap_full_wins") {
        v.gap_full_wins = parse_double(value);
      } else if (rest == "gap_core_wins") {
        v.gap_core_wins = parse_double(value);
      } else if (rest == "preservation_gap") {
        v.preservation_gap = parse_double(value);
      } else {
        const auto dot = rest.find('.');
        if (dot == std::string::npos) throw InputError("unknown construct CSV field '" + field + "'");
        const std::string which = rest.substr(0, dot);
        const std::string name = rest.substr(dot + 1);
        RemovalVerdict* target = which == "full_wins" ? &v.full_wins : which == "core_wins" ? &v.core_wins : nullptr;
        if (!target) throw InputError("unknown construct CSV field '" + field + "'");
        if (value == "true" || value == "false") {
          verdict_flag(*target, name) = parse_bool(value);
        } else {
          verdict_number(*target, name) = parse_double(value);
        }
      }
    } else {
      const Index row = parse_index(f[1]);
      const Index col = f[2].empty() ? 0 : parse_index(f[2]);
      cells[field].set(row, col, parse_double(value));
    }
  }
  b.truth = GroundTruth{cells["theta_star"].vector(), {cells["beta_star"].vector()}};
  if (cells.count("b_vector")) b.b_vector = cells["b_vector"].vector();
  for (const auto& [k, c] : directions) b.directions.push_back(c.vector());
  b.s_target = cells["s_target"].vector();
  b.y_target = cells["y_target"].vector();
  b.z_train = DesignMatrix(cells["z_train"].matrix());
  b.z_test_full_wins = DesignMatrix(cells["z_test_full_wins"].matrix());
  b.z_test_core_wins = DesignMatrix(cells["z_test_core_wins"].matrix());
  return r;
}

// ---- scenarios ----

Json to_json(const ScenarioReport& r) {
  Json j = Json::object();
  j["command"] = "simulate";
  j["scenario"] = r.name;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["passed"] = r.passed();
  Json quantities = Json::array();
  for (const auto& q : r.quantities) {
    Json e = Json::object();
    e["label"] = q.label;
    e["closed_form"] = optional_json(q.closed_form);
    e["estimate"] = q.estimate;
    e["std_error"] = q.std_error;
    e["reference"] = optional_json(q.reference);
    quantities.push_back(std::move(e));
  }
  j["quantities"] = std::move(quantities);
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(Json{{"label", c.label}, {"passed", c.passed}});
  j["checks"] = std::move(checks);
  Json groups = Json::array();
  for (const auto& g : r.group_rows) {
    groups.push_back(
        Json{{"group", g.group}, {"model", g.model}, {"estimate", g.estimate}, {"std_error", g.std_error}});
  }
  j["group_rows"] = std::move(groups);
  return j;
}

ScenarioReport scenario_report_from_json(const Json& j) {
  ScenarioReport r;
  r.name = at(j, "scenario").get<std::string>();
  r.seed = at(j, "seed").get<std::uint64_t>();
  r.trials = at(j, "trials").get<std::size_t>();
  for (const auto& q : at(j, "quantities")) {
    r.quantities.push_back(ScenarioQuantity{at(q, "label").get<std::string>(), get_optional(q, "closed_form"),
                                            get_double(q, "estimate"), get_double(q, "std_error"),
                                            get_optional(q, "reference")});
  }
  for (const auto& c : at(j, "checks")) {
    r.checks.push_back(ScenarioCheck{at(c, "label").get<std::string>(), at(c, "passed").get<bool>()});
  }
  for (const auto& g : at(j, "group_rows")) {
    r.group_rows.push_back(ScenarioGroupRow{at(g, "group").get<std::string>(), at(g, "model").get<std::string>(),
                                            get_double(g, "estimate"), get_double(g, "std_error")});
  }
  return r;
}

namespace {

const CsvRow kScenarioHeader{"kind", "label", "detail", "closed_form", "estimate", "std_error", "reference", "passed"};

std::string optional_text(const std::optional<double>& v) { return v ? format_shortest(*v) : ""; }

std::optional<double> parse_optional(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_double(text);
}

}  // namespace

std::string to_csv(const ScenarioReport& r) {
  std::vector<CsvRow> rows{kScenarioHeader};
  rows.push_back({"meta", "scenario", r.name, "", "", "", "", ""});
  rows.push_back({"meta", "seed", std::to_string(r.seed), "", "", "", "", ""});
  rows.push_back({"meta", "trials", std::to_string(r.trials), "", "", "", "", ""});
  for (const auto& q : r.quantities) {
    rows.push_back({"quantity", q.label, "", optional_text(q.closed_form), format_shortest(q.estimate),
                    format_shortest(q.std_error), optional_text(q.reference), ""});
  }
  for (const auto& c : r.checks) rows.push_back({"check", c.label, "", "", "", "", "", bool_text(c.passed)});
  for (const auto& g : r.group_rows) {
    rows.push_back({"group", g.group, g.model, "", format_shortest(g.estimate), format_shortest(g.std_error), "", ""});
  }
  return write_csv(rows);
}

ScenarioReport scenario_report_from_csv(std::string_view text) {
  ScenarioReport r;
  for (const auto& f : csv_body(text, kScenarioHeader)) {
    const std::string& kind = f[0];
    if (kind == "meta") {
      if (f[1] == "scenario") {
        r.name = f[2];
      } else if (f[1] == "seed") {
        r.seed = parse_seed(f[2]);
      } else if (f[1] == "trials") {
        r.trials = static_cast<std::size_t>(parse_seed(f[2]));
      } else {
        throw InputError("unknown meta row '" + f[1] + "'");
      }
    } else if (kind == "quantity") {
      r.quantities.push_back(ScenarioQuantity{f[1], parse_optional(f[3]), parse_double(f[4]), parse_double(f[5]),
                                              parse_optional(f[6])});
    } else if (kind == "check") {
      r.checks.push_back(ScenarioCheck{f[1], parse_bool(f[7])});
    } else if (kind == "group") {
      r.group_rows.push_back(ScenarioGroupRow{f[1], f[2], parse_double(f[4]), parse_double(f[5])});
    } else {
      throw InputError("unknown scenario CSV row kind '" + kind + "'");
    }
  }
  return r;
}

}  // namespace spurious
