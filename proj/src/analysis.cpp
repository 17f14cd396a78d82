#include "corelens/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "corelens/nrdf.hpp"

namespace corelens {

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) {
      return false;
    }
  }
  return true;
}

bool type_matches(ParamType type, const ParamValue& v,
                  const std::vector<std::string>& choices) {
  switch (type) {
    case ParamType::integer:
      return std::holds_alternative<std::int64_t>(v);
    case ParamType::real:
      return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
    case ParamType::text:
      return std::holds_alternative<std::string>(v);
    case ParamType::choice: {
      const auto* s = std::get_if<std::string>(&v);
      return s && std::find(choices.begin(), choices.end(), *s) != choices.end();
    }
  }
  return false;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

// Uniform in [0, 1) from the raw engine output, identical on every platform.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t nearest(const Matrix& centroids, std::span<const double> p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.rows; ++j) {
    const double d = squared_distance(centroids.row(j), p);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

void update_centroid(const Matrix& points, std::span<const std::size_t> assign,
                     std::size_t cluster, Matrix& centroids) {
  std::vector<double> sum(points.cols, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < points.rows; ++i) {
    if (assign[i] != cluster) continue;
    ++count;
    for (std::size_t c = 0; c < points.cols; ++c) sum[c] += points(i, c);
  }
  if (count == 0) return;
  for (std::size_t c = 0; c < points.cols; ++c) {
    centroids(cluster, c) = sum[c] / static_cast<double>(count);
  }
}

Matrix seed_plus_plus(const Matrix& points, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = points.rows;
  Matrix centroids(k, points.cols);
  std::vector<bool> chosen(n, false);
  auto take = [&](std::size_t slot, std::size_t i) {
    chosen[i] = true;
    for (std::size_t c = 0; c < points.cols; ++c) centroids(slot, c) = points(i, c);
  };
  take(0, std::min(n - 1, static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n))));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centroids.row(0));

  for (std::size_t slot = 1; slot < k; ++slot) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit_draw(rng) * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        cumulative += d2[i];
        pick = i;
        if (cumulative > target) break;
      }
    } else {
      // Every point coincides with a chosen center.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    take(slot, pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(slot)));
    }
  }
  return centroids;
}

std::string number_label(double v) { return nrdf::format_double(v); }

Artifact csv_artifact(const Table& t) { return {t.name + ".csv", table_csv(t)}; }

}  // namespace

// ---------------------------------------------------------------------------
// Result types

bool Table::operator==(const Table& o) const {
  return name == o.name && row_labels == o.row_labels &&
         column_labels == o.column_labels && values.rows == o.values.rows &&
         values.cols == o.values.cols && same_bits(values.data, o.values.data);
}

const Table& AnalysisResult::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  fail(ErrorCode::not_found, "result has no table '" + std::string(name) + "'");
}

bool AnalysisResult::same_content(const AnalysisResult& o) const {
  return tool == o.tool && tables == o.tables && series == o.series &&
         scalars == o.scalars && artifacts == o.artifacts && auto_plot == o.auto_plot;
}

std::string_view to_string(ParamType t) {
  switch (t) {
    case ParamType::integer: return "int";
    case ParamType::real: return "float";
    case ParamType::text: return "string";
    case ParamType::choice: return "choice";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parameters and registry

Params resolve_params(const AnalysisTool& tool, const Params& given) {
  for (const auto& [name, _] : given) {
    const bool known = std::any_of(tool.params.begin(), tool.params.end(),
                                   [&](const ParamSpec& s) { return s.name == name; });
    if (!known) {
      fail(ErrorCode::invalid_argument,
           "tool '" + tool.name + "' has no parameter '" + name + "'");
    }
  }
  Params out;
  for (const auto& spec : tool.params) {
    auto it = given.find(spec.name);
    ParamValue v = it == given.end() ? spec.default_value : it->second;
    if (!type_matches(spec.type, v, spec.choices)) {
      fail(ErrorCode::invalid_argument, "parameter '" + spec.name + "' must be " +
                                            std::string(to_string(spec.type)));
    }
    if (spec.type == ParamType::real) {
      if (const auto* i = std::get_if<std::int64_t>(&v)) v = static_cast<double>(*i);
    }
    out.emplace(spec.name, std::move(v));
  }
  return out;
}

std::int64_t param_int(const Params& p, std::string_view name) {
  auto it = p.find(name);
  if (it == p.end() || !std::holds_alternative<std::int64_t>(it->second)) {
    fail(ErrorCode::invalid_argument, "missing integer parameter '" + std::string(name) + "'");
  }
  return std::get<std::int64_t>(it->second);
}

double param_real(const Params& p, std::string_view name) {
  auto it = p.find(name);
  if (it != p.end()) {
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  }
  fail(ErrorCode::invalid_argument, "missing real parameter '" + std::string(name) + "'");
}

const std::string& param_text(const Params& p, std::string_view name) {
  auto it = p.find(name);
  if (it == p.end() || !std::holds_alternative<std::string>(it->second)) {
    fail(ErrorCode::invalid_argument, "missing string parameter '" + std::string(name) + "'");
  }
  return std::get<std::string>(it->second);
}

void ToolRegistry::register_tool(AnalysisTool tool) {
  if (tool.name.empty()) fail(ErrorCode::invalid_argument, "tool name must be non-empty");
  if (!tool.entry) fail(ErrorCode::invalid_argument, "tool '" + tool.name + "' has no entry point");
  if (tools_.count(tool.name)) {
    fail(ErrorCode::conflict, "tool '" + tool.name + "' is already registered");
  }
  for (const auto& spec : tool.params) {
    if (!type_matches(spec.type, spec.default_value, spec.choices)) {
      fail(ErrorCode::invalid_argument,
           "default of parameter '" + spec.name + "' does not match its type");
    }
  }
  std::string key = tool.name;
  tools_.emplace(std::move(key), std::move(tool));
}

std::vector<std::string> ToolRegistry::list_tools() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tools_) out.push_back(name);
  return out;
}

bool ToolRegistry::contains(std::string_view name) const {
  return tools_.find(name) != tools_.end();
}

const AnalysisTool& ToolRegistry::find(std::string_view name) const {
  auto it = tools_.find(name);
  if (it == tools_.end()) fail(ErrorCode::not_found, "no tool '" + std::string(name) + "'");
  return it->second;
}

AnalysisResult ToolRegistry::run(std::string_view name,
                                 std::span<const AssemblyView> inputs,
                                 const Params& params) const {
  const AnalysisTool& tool = find(name);
  if (inputs.size() != tool.input_count) {
    fail(ErrorCode::invalid_argument,
         "tool '" + tool.name + "' takes " + std::to_string(tool.input_count) +
             " assemblies, got " + std::to_string(inputs.size()));
  }
  AnalysisResult result = tool.entry(inputs, resolve_params(tool, params));
  result.tool = tool.name;
  result.created_at = std::chrono::system_clock::now();
  return result;
}

// ---------------------------------------------------------------------------
// pin_diff

namespace {

double feature_mean(const AssemblyView& view, std::string_view feature, double time) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < view.size(); ++r) {
    for (std::size_t c = 0; c < view.size(); ++c) {
      const auto* bucket = view.find_entries(r, c, feature, time);
      if (!bucket) continue;
      for (const auto& e : *bucket) sum += e.value;
      count += bucket->size();
    }
  }
  if (count == 0) {
    fail(ErrorCode::not_found, "assembly '" + view.def().name() + "' has no '" +
                                   std::string(feature) + "' data");
  }
  const double mean = sum / static_cast<double>(count);
  if (!(mean != 0.0) || !std::isfinite(mean)) {
    fail(ErrorCode::invalid_argument, "cannot normalize '" + std::string(feature) +
                                          "': mean is " + number_label(mean));
  }
  return mean;
}

}  // namespace

AnalysisResult pin_diff(const AssemblyView& input, const AssemblyView& reference,
                        std::string_view feature, std::span<const std::string> pins,
                        double time) {
  if (input.size() != reference.size()) {
    fail(ErrorCode::shape_error, "assemblies differ in size (" +
                                     std::to_string(input.size()) + " vs " +
                                     std::to_string(reference.size()) + ")");
  }
  const double in_mean = feature_mean(input, feature, time);
  const double ref_mean = feature_mean(reference, feature, time);

  AnalysisResult result;
  result.tool = "pin_diff";
  result.auto_plot = true;

  Table table;
  table.name = "diff";
  std::size_t levels = 0;
  std::vector<std::vector<double>> rows;
  for (const auto& pin : pins) {
    const auto [r, c] = parse_cell_label(input.labels(), pin);
    const auto in = axial_series(input, r, c, feature, time);
    const auto ref = axial_series(reference, r, c, feature, time);
    if (in.size() != ref.size()) {
      fail(ErrorCode::shape_error, "pin " + pin + " has " + std::to_string(in.size()) +
                                       " input levels but " + std::to_string(ref.size()) +
                                       " reference levels");
    }
    if (rows.empty()) {
      levels = in.size();
      for (const auto& p : in) table.column_labels.push_back(number_label(p.z));
    } else if (in.size() != levels) {
      fail(ErrorCode::shape_error, "pin " + pin + " has " + std::to_string(in.size()) +
                                       " levels, expected " + std::to_string(levels));
    }
    Series s;
    s.name = pin;
    std::vector<double> row(levels);
    for (std::size_t k = 0; k < levels; ++k) {
      const double a = in[k].value / in_mean;
      const double b = ref[k].value / ref_mean;
      if (b == 0.0 || !std::isfinite(a) || !std::isfinite(b)) {
        row[k] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      row[k] = 100.0 * (a - b) / b;
      s.points.emplace_back(in[k].z, row[k]);
    }
    table.row_labels.push_back(pin);
    rows.push_back(std::move(row));
    result.series.push_back(std::move(s));
  }
  table.values = Matrix(rows.size(), levels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), table.values.data.begin() + i * levels);
  }
  result.scalars["input_mean"] = in_mean;
  result.scalars["reference_mean"] = ref_mean;
  result.artifacts.push_back(csv_artifact(table));
  result.tables.push_back(std::move(table));
  return result;
}

// ---------------------------------------------------------------------------
// k-means

double kmeans_inertia(const Matrix& points, std::span<const std::size_t> assignments,
                      const Matrix& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows; ++i) {
    total += squared_distance(points.row(i), centroids.row(assignments[i]));
  }
  return total;
}

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter) {
  const std::size_t n = points.rows;
  if (k < 1 || k > n) {
    fail(ErrorCode::invalid_argument, "k must satisfy 1 <= k <= n (k=" +
                                          std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  if (points.cols < 1) fail(ErrorCode::invalid_argument, "points need at least one dimension");
  if (max_iter < 1) fail(ErrorCode::invalid_argument, "max_iter must be >= 1");
  for (double v : points.data) {
    if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "points must be finite");
  }

  KMeansResult out;
  out.centroids = seed_plus_plus(points, k, seed);
  std::vector<std::size_t> assign(n, k);  // k marks "unassigned"
  std::vector<std::size_t> next(n);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) next[i] = nearest(out.centroids, points.row(i));
    if (next == assign) {
      out.converged = true;
      break;
    }
    assign = next;
    for (std::size_t j = 0; j < k; ++j) update_centroid(points, assign, j, out.centroids);

    // Refill each empty cluster with the point farthest from its centroid,
    // taken from a cluster that keeps at least one member.
    std::vector<std::size_t> counts(k, 0);
    for (auto a : assign) ++counts[a];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] < 2) continue;
        const double d = squared_distance(points.row(i), out.centroids.row(assign[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      const std::size_t donor = assign[far];
      assign[far] = j;
      --counts[donor];
      ++counts[j];
      update_centroid(points, assign, j, out.centroids);
      update_centroid(points, assign, donor, out.centroids);
    }
    out.inertia_history.push_back(kmeans_inertia(points, assign, out.centroids));
    ++out.iterations;
  }
  out.assignments = std::move(assign);
  out.inertia = kmeans_inertia(points, out.assignments, out.centroids);
  return out;
}

PinFeatures pin_feature_vectors(const AssemblyView& view, std::string_view feature,
                                double time) {
  PinFeatures out;
  std::vector<std::vector<AxialPoint>> rows;
  for (std::size_t r = 0; r < view.size(); ++r) {
    for (std::size_t c = 0; c < view.size(); ++c) {
      if (!view.occupied(r, c)) continue;
      const std::string label = cell_label(view.labels(), r, c);
      if (!view.has_feature(r, c, feature, time)) {
        fail(ErrorCode::shape_error, "pin " + label + " has no '" + std::string(feature) +
                                         "' data");
      }
      auto series = axial_series(view, r, c, feature, time);
      if (!rows.empty() && series.size() != rows.front().size()) {
        fail(ErrorCode::shape_error, "pin " + label + " has " +
                                         std::to_string(series.size()) +
                                         " levels, expected " +
                                         std::to_string(rows.front().size()));
      }
      out.labels.push_back(label);
      rows.push_back(std::move(series));
    }
  }
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  out.values = Matrix(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) out.values(i, k) = rows[i][k].value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in tools

AnalysisTool pin_diff_tool() {
  AnalysisTool t;
  t.name = "pin_diff";
  t.description = "Normalized percentage difference of axial pin data against a reference";
  t.enabled_by_default = true;
  t.input_count = 2;
  t.params = {
      {"feature", ParamType::text, std::string("Axial Power"), {}, "data feature to compare"},
      {"pins", ParamType::text, std::string(""), {},
       "comma-separated pin labels, empty for every pin"},
      {"time", ParamType::real, 0.0, {}, "state point time (s)"},
  };
  t.entry = [](std::span<const AssemblyView> in, const Params& p) {
    const auto& feature = param_text(p, "feature");
    std::vector<std::string> pins;
    std::stringstream ss(param_text(p, "pins"));
    for (std::string item; std::getline(ss, item, ',');) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) pins.push_back(item);
    }
    if (pins.empty()) {
      const auto& v = in[0];
      for (std::size_t r = 0; r < v.size(); ++r) {
        for (std::size_t c = 0; c < v.size(); ++c) {
          if (v.occupied(r, c)) pins.push_back(cell_label(v.labels(), r, c));
        }
      }
    }
    return pin_diff(in[0], in[1], feature, pins, param_real(p, "time"));
  };
  return t;
}

AnalysisTool kmeans_tool() {
  AnalysisTool t;
  t.name = "kmeans";
  t.description = "k-means clustering of pins by their axial data";
  t.enabled_by_default = false;
  t.input_count = 1;
  t.params = {
      {"feature", ParamType::text, std::string("Axial Power"), {}, "data feature to cluster"},
      {"k", ParamType::integer, std::int64_t{3}, {}, "number of clusters"},
      {"seed", ParamType::integer, std::int64_t{0}, {}, "k-means++ seed"},
      {"max_iter", ParamType::integer, std::int64_t{100}, {}, "iteration cap"},
      {"time", ParamType::real, 0.0, {}, "state point time (s)"},
  };
  t.entry = [](std::span<const AssemblyView> in, const Params& p) {
    const auto features = pin_feature_vectors(in[0], param_text(p, "feature"),
                                              param_real(p, "time"));
    const auto k = param_int(p, "k");
    const auto max_iter = param_int(p, "max_iter");
    if (k < 1 || max_iter < 1) {
      fail(ErrorCode::invalid_argument, "k and max_iter must be positive");
    }
    const auto km = kmeans(features.values, static_cast<std::size_t>(k),
                           static_cast<std::uint64_t>(param_int(p, "seed")),
                           static_cast<std::size_t>(max_iter));
    AnalysisResult result;
    result.tool = "kmeans";

    Table assignments;
    assignments.name = "assignments";
    assignments.row_labels = features.labels;
    assignments.column_labels = {"cluster"};
    assignments.values = Matrix(features.labels.size(), 1);
    for (std::size_t i = 0; i < km.assignments.size(); ++i) {
      assignments.values(i, 0) = static_cast<double>(km.assignments[i]);
    }

    Table centroids;
    centroids.name = "centroids";
    for (std::size_t j = 0; j < km.centroids.rows; ++j) {
      centroids.row_labels.push_back(std::to_string(j));
    }
    for (std::size_t c = 0; c < km.centroids.cols; ++c) {
      centroids.column_labels.push_back(std::to_string(c + 1));
    }
    centroids.values = km.centroids;

    result.scalars["inertia"] = km.inertia;
    result.scalars["iterations"] = static_cast<double>(km.iterations);
    result.scalars["converged"] = km.converged ? 1.0 : 0.0;
    result.artifacts.push_back(csv_artifact(assignments));
    result.artifacts.push_back(csv_artifact(centroids));
    result.tables.push_back(std::move(assignments));
    result.tables.push_back(std::move(centroids));
    return result;
  };
  return t;
}

ToolRegistry make_default_registry() {
  ToolRegistry r;
  r.register_tool(pin_diff_tool());
  r.register_tool(kmeans_tool());
  return r;
}

// ---------------------------------------------------------------------------
// Export

namespace {
std::string format_utc(std::chrono::system_clock::time_point t, const char* fmt) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}
}  // namespace

std::string iso8601(std::chrono::system_clock::time_point t) {
  return format_utc(t, "%Y-%m-%dT%H:%M:%SZ");
}

std::string iso8601_basic(std::chrono::system_clock::time_point t) {
  return format_utc(t, "%Y%m%dT%H%M%SZ");
}

std::string table_csv(const Table& t) {
  std::string out = "label";
  for (const auto& c : t.column_labels) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < t.values.rows; ++r) {
    out += t.row_labels.at(r);
    for (std::size_t c = 0; c < t.values.cols; ++c) {
      out += ',';
      const double v = t.values(r, c);
      if (!std::isnan(v)) out += nrdf::format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> write_artifacts(const AnalysisResult& result,
                                         const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create '" + dir + "': " + ec.message());
  const std::string stamp = iso8601_basic(result.created_at);
  std::vector<std::string> paths;
  for (const auto& a : result.artifacts) {
    const fs::path path = fs::path(dir) / (stamp + "_" + result.tool + "_" + a.filename);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << a.bytes;
    if (!os) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
    paths.push_back(path.string());
  }
  return paths;
}

}  // namespace corelens
