#include "spurious/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spurious/error.hpp"

namespace spurious {

namespace {

[[noreturn]] void fail(std::string_view what, const std::string& why) {
  throw InputError(std::string(what) + ": " + why);
}

double json_number(const Json& j, std::string_view what) {
  if (!j.is_number()) fail(what, "expected a number");
  return j.get<double>();
}

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

void require_object(const Json& j, std::string_view what) {
  if (!j.is_object()) fail(what, "expected an object");
}

GroundTruth parse_truth(const Json& j) {
  require_object(j, "ground_truth");
  const Json* theta = find(j, "theta_star");
  if (!theta) fail("ground_truth", "missing theta_star");
  GroundTruth truth{json_to_vector(*theta, "ground_truth.theta_star"), {}};
  if (const Json* betas = find(j, "beta_stars")) {
    if (!betas->is_array()) fail("ground_truth.beta_stars", "expected an array of vectors");
    for (const auto& b : *betas) truth.beta_stars.push_back(json_to_vector(b, "ground_truth.beta_stars"));
  }
  if (const Json* beta = find(j, "beta_star")) {
    truth.beta_stars.push_back(json_to_vector(*beta, "ground_truth.beta_star"));
  }
  for (const auto& b : truth.beta_stars) {
    if (b.size() != truth.dim()) fail("ground_truth", "beta* and theta* lengths differ");
  }
  return truth;
}

/// A flat array is one column; an array of rows is n x k.
MatrixXd parse_columns(const Json& j, std::string_view what) {
  if (j.is_array() && !j.empty() && j.front().is_number()) {
    const VectorXd v = json_to_vector(j, what);
    return MatrixXd(v);
  }
  return json_to_matrix(j, what);
}

LabeledData parse_train(const Json& j, const std::optional<GroundTruth>& truth) {
  require_object(j, "train");
  const Json* z_json = find(j, "Z");
  if (!z_json) fail("train", "missing Z");
  MatrixXd z = json_to_matrix(*z_json, "train.Z");
  if (truth && truth->dim() != z.cols()) fail("train.Z", "column count differs from ground_truth dimension");

  MatrixXd s;
  if (const Json* s_json = find(j, "S")) {
    s = parse_columns(*s_json, "train.S");
  } else if (truth) {
    s = z * truth->beta_matrix();
  } else {
    s.resize(z.rows(), 0);
  }
  VectorXd y;
  if (const Json* y_json = find(j, "Y")) {
    y = json_to_vector(*y_json, "train.Y");
  } else if (truth) {
    y = z * truth->theta_star;
  } else {
    fail("train", "needs Y or a ground_truth block");
  }
  if (s.rows() != z.rows()) fail("train.S", "row count differs from Z");
  if (y.size() != z.rows()) fail("train.Y", "length differs from Z row count");
  std::optional<GroundTruth> paired;
  if (truth && truth->spurious_count() == s.cols()) paired = truth;
  return LabeledData(DesignMatrix(std::move(z)), std::move(s), std::move(y), std::move(paired));
}

UnlabeledData parse_unlabeled(const Json& j, const std::optional<GroundTruth>& truth) {
  require_object(j, "unlabeled");
  const Json* zu_json = find(j, "Zu");
  if (!zu_json) fail("unlabeled", "missing Zu");
  MatrixXd zu = json_to_matrix(*zu_json, "unlabeled.Zu");
  if (const Json* su_json = find(j, "Su")) {
    MatrixXd su = parse_columns(*su_json, "unlabeled.Su");
    if (su.rows() != zu.rows()) fail("unlabeled.Su", "row count differs from Zu");
    return UnlabeledData{std::move(zu), std::move(su)};
  }
  if (!truth) fail("unlabeled", "needs Su or a ground_truth block");
  if (truth->dim() != zu.cols()) fail("unlabeled.Zu", "column count differs from ground_truth dimension");
  return UnlabeledData::from_truth(std::move(zu), *truth);
}

TestDistribution parse_group(const Json& j, std::size_t index) {
  require_object(j, "groups[]");
  std::string label = "group" + std::to_string(index);
  if (const Json* l = find(j, "label")) {
    if (!l->is_string()) fail("groups[].label", "expected a string");
    label = l->get<std::string>();
  }
  const Json* sigma_json = find(j, "sigma");
  if (!sigma_json) fail("groups[" + std::to_string(index) + "]", "missing sigma");
  MatrixXd sigma;
  if (sigma_json->is_object()) {
    const Json* diag = find(*sigma_json, "diag");
    if (!diag) fail("groups[].sigma", "object form needs a diag array");
    sigma = json_to_vector(*diag, "groups[].sigma.diag").asDiagonal();
  } else {
    sigma = json_to_matrix(*sigma_json, "groups[].sigma");
  }
  try {
    return TestDistribution::make(std::move(sigma), std::move(label));
  } catch (const Error& e) {
    fail("groups[" + std::to_string(index) + "]", e.what());
  }
}

}  // namespace

VectorXd json_to_vector(const Json& j, std::string_view what) {
  if (!j.is_array()) fail(what, "expected an array of numbers");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = json_number(j[i], what);
  return v;
}

MatrixXd json_to_matrix(const Json& j, std::string_view what) {
  if (!j.is_array() || j.empty()) fail(what, "expected a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) fail(what, "rows must be non-empty arrays");
  MatrixXd m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(what, "rows have unequal lengths");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = json_number(j[r][c], what);
    }
  }
  return m;
}

Json vector_to_json(const VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_to_json(const MatrixXd& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

Instance parse_instance(const Json& doc) {
  require_object(doc, "instance");
  Instance inst;
  if (const Json* t = find(doc, "ground_truth")) inst.truth = parse_truth(*t);
  if (const Json* t = find(doc, "train")) inst.train = parse_train(*t, inst.truth);
  if (const Json* u = find(doc, "unlabeled")) inst.unlabeled = parse_unlabeled(*u, inst.truth);
  if (const Json* g = find(doc, "groups")) {
    if (!g->is_array()) fail("groups", "expected an array");
    for (std::size_t i = 0; i < g->size(); ++i) inst.groups.push_back(parse_group((*g)[i], i));
  }
  if (const Json* r = find(doc, "robust")) {
    require_object(*r, "robust");
    RobustSpec spec;
    if (const Json* gamma = find(*r, "gamma")) spec.gamma = json_number(*gamma, "robust.gamma");
    if (const Json* norm = find(*r, "norm_kind")) {
      if (!norm->is_string()) fail("robust.norm_kind", "expected \"l2\" or \"linf\"");
      try {
        spec.norm_kind = parse_norm_kind(norm->get<std::string>());
      } catch (const Error& e) {
        fail("robust.norm_kind", e.what());
      }
    }
    if (const Json* samples = find(*r, "samples")) {
      if (!samples->is_number_integer() || samples->get<long long>() < 1) {
        fail("robust.samples", "expected a positive integer");
      }
      inst.robust_samples = samples->get<Index>();
    }
    inst.robust = spec;
  }
  if (const Json* s = find(doc, "scenario")) {
    require_object(*s, "scenario");
    inst.scenario = *s;
  }
  if (const Json* c = find(doc, "construct")) {
    require_object(*c, "construct");
    inst.construct = *c;
  }
  if (inst.train && inst.groups.size() > 0 && inst.groups.front().sigma.rows() != inst.train->dim()) {
    fail("groups", "sigma dimension differs from train.Z columns");
  }
  for (const auto& g : inst.groups) {
    if (g.sigma.rows() != inst.groups.front().sigma.rows()) fail("groups", "sigmas have different dimensions");
  }
  return inst;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) { return parse_instance(read_json_file(path)); }

namespace {

void write_value(std::ostringstream& out, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << Json(key).dump() << (indent > 0 ? ": " : ":");
        write_value(out, value, indent, depth + 1);
      }
      out << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line so matrices read as rows.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out << '[';
      if (!flat) out << nl;
      bool first = true;
      for (const auto& value : j) {
        if (!first) out << (flat ? ", " : ",") << (flat ? "" : nl);
        first = false;
        if (!flat) out << pad;
        write_value(out, value, indent, depth + 1);
      }
      if (!flat) out << nl << close_pad;
      out << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out << "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string text(buf);
      // Keep integral floats recognizable as floats when read back.
      if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
      out << text;
      return;
    }
    default:
      out << j.dump();
  }
}

}  // namespace

std::string write_json(const Json& doc, int indent) {
  std::ostringstream out;
  write_value(out, doc, indent, 0);
  out << '\n';
  return out.str();
}

std::string format_shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError("'" + std::string(text) + "' is not a number");
  }
  return v;
}

std::string write_csv(const std::vector<CsvRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      const std::string& field = row[i];
      if (field.find_first_of(",\"\n\r") == std::string::npos) {
        out += field;
        continue;
      }
      out += '"';
      for (char c : field) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += '\n';
  }
  return out;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_started || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      row_started = false;
    } else {
      field += c;
      row_started = true;
    }
  }
  if (quoted) throw InputError("unterminated quoted CSV field");
  if (row_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace spurious
