#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spurious/analysis.hpp"
#include "spurious/estimators.hpp"

namespace spurious {

using Json = nlohmann::ordered_json;

/// Malformed or incomplete input documents.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem instance. Every block is optional; commands check for the
/// blocks they need.
struct Instance {
  std::optional<GroundTruth> truth;
  std::optional<LabeledData> train;
  std::optional<UnlabeledData> unlabeled;
  std::vector<TestDistribution> groups;
  std::optional<RobustSpec> robust;
  Index robust_samples = 10000;
  /// Free-form parameter blocks, read by simulate and construct.
  Json scenario = Json::object();
  Json construct = Json::object();
};

/// Matrices are arrays of rows. In "train", a flat S is one spurious column
/// and missing S or Y are derived from ground_truth. Group sigmas are full
/// matrices or {"diag": [...]}. Throws InputError; library errors raised
/// while pairing data with the truth propagate unchanged.
Instance parse_instance(const Json& doc);
Instance load_instance(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);

VectorXd json_to_vector(const Json& j, std::string_view what);
MatrixXd json_to_matrix(const Json& j, std::string_view what);
Json vector_to_json(const VectorXd& v);
Json matrix_to_json(const MatrixXd& m);

/// Serializes with fixed key order (insertion order) and 17 significant
/// digits for every floating-point number; non-finite numbers become null.
std::string write_json(const Json& doc, int indent = 2);

/// Shortest representation that parses back to the same double.
std::string format_shortest(double v);
double parse_double(std::string_view text);

/// Minimal RFC 4180 CSV: fields with commas, quotes or newlines are quoted.
using CsvRow = std::vector<std::string>;
std::string write_csv(const std::vector<CsvRow>& rows);
std::vector<CsvRow> parse_csv(std::string_view text);

}  // namespace spurious
