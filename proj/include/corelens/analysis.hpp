#pragma once

// Analysis routines over assemblies: a name-keyed tool registry plus the two
// built-ins, pin power percentage differences and k-means clustering.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "corelens/model.hpp"

namespace corelens {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

/// Named matrix with labelled axes. Missing values are NaN.
struct Table {
  std::string name;
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  Matrix values;

  // Bitwise on values so NaN gaps compare equal.
  bool operator==(const Table& o) const;
};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;

  bool operator==(const Series&) const = default;
};

struct Artifact {
  std::string filename;
  std::string bytes;

  bool operator==(const Artifact&) const = default;
};

struct AnalysisResult {
  std::string tool;
  std::chrono::system_clock::time_point created_at{};
  std::vector<Table> tables;
  std::vector<Series> series;
  std::map<std::string, double> scalars;
  std::vector<Artifact> artifacts;
  bool auto_plot = false;

  const Table& table(std::string_view name) const;
  /// Everything except the timestamp.
  bool same_content(const AnalysisResult& other) const;
};

enum class ParamType { integer, real, text, choice };
std::string_view to_string(ParamType t);

using ParamValue = std::variant<std::int64_t, double, std::string>;
using Params = std::map<std::string, ParamValue, std::less<>>;

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::text;
  ParamValue default_value;
  std::vector<std::string> choices;  // choice parameters only
  std::string description;
};

using ToolEntry =
    std::function<AnalysisResult(std::span<const AssemblyView>, const Params&)>;

struct AnalysisTool {
  std::string name;
  std::string description;
  bool enabled_by_default = false;
  std::size_t input_count = 1;  // assemblies the tool consumes
  std::vector<ParamSpec> params;
  ToolEntry entry;
};

/// Applies defaults and checks every supplied value against the schema.
/// Throws invalid-argument for unknown names or mistyped values.
Params resolve_params(const AnalysisTool& tool, const Params& given);

std::int64_t param_int(const Params& p, std::string_view name);
double param_real(const Params& p, std::string_view name);
const std::string& param_text(const Params& p, std::string_view name);

class ToolRegistry {
 public:
  /// Throws conflict when the name is taken, invalid-argument when a default
  /// does not satisfy its own type.
  void register_tool(AnalysisTool tool);
  std::vector<std::string> list_tools() const;
  const AnalysisTool& find(std::string_view name) const;
  bool contains(std::string_view name) const;

  /// Resolves parameters, checks the input count and stamps created_at.
  AnalysisResult run(std::string_view name, std::span<const AssemblyView> inputs,
                     const Params& params) const;

 private:
  std::map<std::string, AnalysisTool, std::less<>> tools_;
};

/// Registry holding "pin_diff" (enabled by default) and "kmeans".
ToolRegistry make_default_registry();
AnalysisTool pin_diff_tool();
AnalysisTool kmeans_tool();

/// Percentage difference of normalized axial series for the named pins.
/// Each assembly is scaled so the mean over all pins carrying the feature
/// and all axial levels is 1; then diff = 100 (in - ref) / ref per level.
/// Zero reference points become gaps (NaN in the table, absent from series).
AnalysisResult pin_diff(const AssemblyView& input, const AssemblyView& reference,
                        std::string_view feature, std::span<const std::string> pins,
                        double time);

struct KMeansResult {
  std::vector<std::size_t> assignments;
  Matrix centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Inertia after each centroid update.
  std::vector<double> inertia_history;
};

/// Lloyd's algorithm from k-means++ seeds. Deterministic in
/// (points, k, seed, max_iter); nearest-centroid ties go to the lowest index
/// and an emptied cluster takes the point farthest from its centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100);

/// Sum of squared distances of each point to its assigned centroid.
double kmeans_inertia(const Matrix& points, std::span<const std::size_t> assignments,
                      const Matrix& centroids);

struct PinFeatures {
  std::vector<std::string> labels;  // row-major over occupied pins
  Matrix values;                    // one row per pin, one column per level
};

/// Axial series of every occupied pin as matrix rows. Throws shape-error
/// naming the pin when one lacks the feature or has a different level count.
PinFeatures pin_feature_vectors(const AssemblyView& view, std::string_view feature,
                                double time);

/// "2026-10-19T08:30:00Z".
std::string iso8601(std::chrono::system_clock::time_point t);
/// "20261019T083000Z", safe in file names.
std::string iso8601_basic(std::chrono::system_clock::time_point t);

/// Writes each artifact as <dir>/<stamp>_<tool>_<filename>; returns the paths.
std::vector<std::string> write_artifacts(const AnalysisResult& result,
                                         const std::string& dir);

/// Comma-separated rendering of a table (NaN cells left empty).
std::string table_csv(const Table& table);

}  // namespace corelens
