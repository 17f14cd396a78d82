#include "corelens/server.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <httplib.h>
#include <json.hpp>

#include "corelens/layout.hpp"
#include "corelens/nrdf.hpp"
#include "corelens/render.hpp"

namespace corelens::server {

using nlohmann::json;

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::invalid_argument:
    case ErrorCode::type_error: return 400;
    case ErrorCode::shape_error: return 422;
    default: return 500;
  }
}

Response reply(int status, json body) {
  body["schema_version"] = kSchemaVersion;
  return {status, body.dump(), "application/json"};
}

Response error_reply(int status, const std::string& code, const std::string& message) {
  return reply(status, json{{"error", {{"code", code}, {"message", message}}}});
}

[[noreturn]] void not_found(const std::string& message) {
  throw HttpError{404, "not-found", message};
}

[[noreturn]] void bad_request(const std::string& message) {
  throw HttpError{400, "invalid-argument", message};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const std::size_t j = path.find('/', i);
    out.push_back(path.substr(i, j == std::string::npos ? std::string::npos : j - i));
    if (j == std::string::npos) break;
    i = j;
  }
  return out;
}

const std::string* query_value(const Request& r, const std::string& key) {
  auto it = r.query.find(key);
  return it == r.query.end() || it->second.empty() ? nullptr : &it->second;
}

double parse_double(const std::string& s, const std::string& name) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
    bad_request("parameter '" + name + "' must be a number");
  }
  return v;
}

int parse_int(const std::string& s, const std::string& name) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    bad_request("parameter '" + name + "' must be an integer");
  }
  return v;
}

json labels_json(const GridLabels& l) { return {{"rows", l.rows}, {"columns", l.columns}}; }

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::pair<std::size_t, std::size_t> cell_from_labels(const GridLabels& labels,
                                                     const std::string& row,
                                                     const std::string& col,
                                                     const std::string& what) {
  const auto r = labels.find_row(row);
  const auto c = labels.find_column(col);
  if (!r || !c) not_found("no " + what + " position '" + row + col + "'");
  return {*r, *c};
}

json series_points(const std::vector<AxialPoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) {
    out.push_back({{"z", p.z}, {"value", p.value}, {"uncertainty", p.uncertainty}});
  }
  return out;
}

json result_json(const std::string& id, const AnalysisResult& r) {
  json tables = json::array();
  for (const auto& t : r.tables) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.values.rows; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < t.values.cols; ++j) {
        const double v = t.values(i, j);
        row.push_back(std::isnan(v) ? json(nullptr) : json(v));
      }
      rows.push_back(std::move(row));
    }
    tables.push_back({{"name", t.name},
                      {"row_labels", t.row_labels},
                      {"column_labels", t.column_labels},
                      {"values", std::move(rows)}});
  }
  json series = json::array();
  for (const auto& s : r.series) {
    json pts = json::array();
    for (const auto& [x, y] : s.points) pts.push_back({x, y});
    series.push_back({{"name", s.name}, {"points", std::move(pts)}});
  }
  json artifacts = json::array();
  for (const auto& a : r.artifacts) artifacts.push_back(a.filename);
  json scalars = json::object();
  for (const auto& [k, v] : r.scalars) scalars[k] = v;
  return {{"result_id", id},
          {"tool", r.tool},
          {"created_at", iso8601(r.created_at)},
          {"tables", std::move(tables)},
          {"series", std::move(series)},
          {"scalars", std::move(scalars)},
          {"artifacts", std::move(artifacts)},
          {"auto_plot", r.auto_plot}};
}

json param_spec_json(const ParamSpec& p) {
  json def;
  std::visit([&](const auto& v) { def = v; }, p.default_value);
  return {{"name", p.name},
          {"type", std::string(to_string(p.type))},
          {"default", def},
          {"choices", p.choices},
          {"description", p.description}};
}

// Feature-independent description of an assembly definition.
json assembly_def_json(const AssemblyDef& def, std::uint32_t index) {
  return {{"index", index},
          {"name", def.name()},
          {"type", std::string(to_string(def.type()))},
          {"size", def.size()},
          {"rod_pitch", def.rod_pitch()},
          {"duct_thickness", optional_number(def.duct_thickness())}};
}

}  // namespace

// ---------------------------------------------------------------------------

Session::Session(std::vector<LoadedFile> files, ToolRegistry registry)
    : files_(std::move(files)), registry_(std::move(registry)) {}

std::unique_ptr<Session> Session::open(const std::vector<std::string>& paths) {
  std::vector<LoadedFile> files;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    files.push_back({"f" + std::to_string(i), paths[i], open_reactors(paths[i])});
  }
  return std::make_unique<Session>(std::move(files));
}

std::size_t Session::result_count() const {
  std::lock_guard lock(results_mutex_);
  return results_.size();
}

Response Session::handle(const Request& request) {
  try {
    return route(request);
  } catch (const HttpError& e) {
    return error_reply(e.status, e.code, e.message);
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), std::string(to_string(e.code())), e.detail());
  } catch (const json::exception& e) {
    return error_reply(400, "invalid-argument", std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

Response Session::route(const Request& req) {
  const auto seg = split_path(req.path);
  if (seg.empty() || seg[0] != "api") not_found("no route for '" + req.path + "'");
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";

  auto find_file = [&](const std::string& id) -> const LoadedFile& {
    for (const auto& f : files_) {
      if (f.id == id) return f;
    }
    not_found("no file '" + id + "'");
  };
  auto find_reactor = [&](const LoadedFile& f, const std::string& name) -> const Reactor& {
    for (const auto& r : f.reactors) {
      if (r.name() == name) return r;
    }
    not_found("no reactor '" + name + "' in file '" + f.id + "'");
  };
  auto type_param = [&](const Reactor& r, const std::string* given) {
    const AssemblyType t = given ? parse_assembly_type(*given) : AssemblyType::fuel;
    if (!accepts(r.type(), t)) {
      not_found(std::string(to_string(r.type())) + " reactors have no '" +
                std::string(to_string(t)) + "' grid");
    }
    return t;
  };
  auto placed_def = [&](const Reactor& r, AssemblyType t, const std::string& row,
                        const std::string& col) {
    const auto [cr, cc] = cell_from_labels(r.labels(), row, col, "core");
    const auto idx = r.assembly_at(t, cr, cc);
    if (!idx) {
      not_found("no " + std::string(to_string(t)) + " assembly at " + row + col);
    }
    return *idx;
  };

  // /api/files
  if (seg.size() == 2 && seg[1] == "files" && get) {
    json files = json::array();
    for (const auto& f : files_) {
      json names = json::array();
      for (const auto& r : f.reactors) names.push_back(r.name());
      files.push_back({{"id", f.id}, {"path", f.path}, {"reactors", std::move(names)}});
    }
    return reply(200, {{"files", std::move(files)}});
  }

  // /api/tools, /api/tools/{name}
  if (seg.size() >= 2 && seg[1] == "tools") {
    if (seg.size() == 2 && get) {
      json tools = json::array();
      for (const auto& name : registry_.list_tools()) {
        const auto& t = registry_.find(name);
        json params = json::array();
        for (const auto& p : t.params) params.push_back(param_spec_json(p));
        tools.push_back({{"name", t.name},
                         {"description", t.description},
                         {"enabled_by_default", t.enabled_by_default},
                         {"input_count", t.input_count},
                         {"params", std::move(params)}});
      }
      return reply(200, {{"tools", std::move(tools)}});
    }
    if (seg.size() == 3 && post) {
      const std::string& name = seg[2];
      registry_.find(name);
      const json body = req.body.empty() ? json::object() : json::parse(req.body);
      if (!body.is_object()) bad_request("request body must be a JSON object");

      std::vector<AssemblyView> inputs;
      const json inputs_json = body.value("inputs", json::array());
      if (!inputs_json.is_array()) bad_request("'inputs' must be an array");
      for (const auto& in : inputs_json) {
        if (!in.is_object() || !in.contains("file") || !in["file"].is_string()) {
          bad_request("each input needs a 'file' id");
        }
        const LoadedFile& f = find_file(in["file"].get<std::string>());
        if (f.reactors.empty()) not_found("file '" + f.id + "' holds no reactors");
        const Reactor& r = in.contains("reactor")
                               ? find_reactor(f, in["reactor"].get<std::string>())
                               : f.reactors.front();
        if (in.contains("assembly")) {
          const auto want = in["assembly"].get<std::string>();
          const auto& defs = r.assembly_defs();
          std::optional<std::uint32_t> idx;
          for (std::uint32_t i = 0; i < defs.size() && !idx; ++i) {
            if (defs[i].name() == want) idx = i;
          }
          if (!idx) not_found("no assembly definition '" + want + "'");
          inputs.emplace_back(r, *idx);
        } else if (in.contains("row") && in.contains("col")) {
          const std::string* type = nullptr;
          std::string type_text;
          if (in.contains("type")) {
            type_text = in["type"].get<std::string>();
            type = &type_text;
          }
          const auto t = type_param(r, type);
          inputs.emplace_back(r, placed_def(r, t, in["row"].get<std::string>(),
                                            in["col"].get<std::string>()));
        } else {
          bad_request("each input needs 'assembly' or 'row' and 'col'");
        }
      }

      Params params;
      const json params_json = body.value("params", json::object());
      if (!params_json.is_object()) bad_request("'params' must be an object");
      for (const auto& [key, v] : params_json.items()) {
        if (v.is_number_integer()) {
          params[key] = v.get<std::int64_t>();
        } else if (v.is_number_float()) {
          params[key] = v.get<double>();
        } else if (v.is_string()) {
          params[key] = v.get<std::string>();
        } else {
          bad_request("parameter '" + key + "' must be a number or a string");
        }
      }

      AnalysisResult result = registry_.run(name, inputs, params);
      std::string id;
      {
        std::lock_guard lock(results_mutex_);
        id = "r" + std::to_string(next_result_++);
        results_.emplace(id, StoredResult{id, result});
      }
      return reply(200, result_json(id, result));
    }
  }

  // /api/results, /api/results/{id}
  if (seg.size() >= 2 && seg[1] == "results" && get) {
    std::lock_guard lock(results_mutex_);
    if (seg.size() == 2) {
      json list = json::array();
      for (const auto& [id, stored] : results_) {
        list.push_back({{"id", id},
                        {"tool", stored.result.tool},
                        {"created_at", iso8601(stored.result.created_at)}});
      }
      return reply(200, {{"results", std::move(list)}});
    }
    if (seg.size() == 3) {
      auto it = results_.find(seg[2]);
      if (it == results_.end()) not_found("no result '" + seg[2] + "'");
      return reply(200, result_json(it->first, it->second.result));
    }
  }

  // /api/reactors/...
  if (seg.size() >= 3 && seg[1] == "reactors" && get) {
    const LoadedFile& file = find_file(seg[2]);
    if (seg.size() == 3) {
      json reactors = json::array();
      for (const auto& r : file.reactors) {
        json defs = json::array();
        for (std::uint32_t i = 0; i < r.assembly_defs().size(); ++i) {
          defs.push_back(assembly_def_json(r.assembly_defs()[i], i));
        }
        json grids = json::array();
        for (const auto& [t, g] : r.grids()) grids.push_back(std::string(to_string(t)));
        json rods = json::array();
        for (const auto& rod : r.rod_defs()) {
          rods.push_back({{"name", rod.name}, {"kind", std::string(to_string(rod.kind))}});
        }
        reactors.push_back({{"name", r.name()},
                            {"reactor_type", std::string(to_string(r.type()))},
                            {"size", r.size()},
                            {"assembly_pitch", r.assembly_pitch()},
                            {"lattice_pitch", r.lattice_pitch()},
                            {"flat_to_flat", r.flat_to_flat()},
                            {"labels", labels_json(r.labels())},
                            {"units", r.units()},
                            {"assembly_types", std::move(grids)},
                            {"assembly_defs", std::move(defs)},
                            {"rod_defs", std::move(rods)}});
      }
      return reply(200, {{"id", file.id}, {"path", file.path}, {"reactors", std::move(reactors)}});
    }
    const Reactor& reactor = find_reactor(file, seg[3]);

    if (seg.size() == 5 && seg[4] == "core") {
      const auto t = type_param(reactor, query_value(req, "type"));
      const auto& grid = reactor.grid(t);
      const std::size_t n = reactor.size();
      json cells = json::array();
      std::map<std::uint32_t, bool> used;
      for (std::size_t r = 0; r < n; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < n; ++c) {
          const auto idx = grid.at(r, c);
          row.push_back(idx ? json(*idx) : json(nullptr));
          if (idx) used[*idx] = true;
        }
        cells.push_back(std::move(row));
      }
      json defs = json::array();
      for (const auto& [i, _] : used) defs.push_back(assembly_def_json(reactor.assembly_defs()[i], i));
      json types = json::array();
      for (const auto& [gt, g] : reactor.grids()) types.push_back(std::string(to_string(gt)));
      return reply(200, {{"file", file.id},
                         {"reactor", reactor.name()},
                         {"reactor_type", std::string(to_string(reactor.type()))},
                         {"type", std::string(to_string(t))},
                         {"types", std::move(types)},
                         {"size", n},
                         {"pitch", reactor.core_pitch()},
                         {"labels", labels_json(reactor.labels())},
                         {"grid", std::move(cells)},
                         {"assemblies", std::move(defs)}});
    }

    if (seg.size() == 8 && seg[4] == "assembly") {
      const auto t = type_param(reactor, &seg[5]);
      const auto index = placed_def(reactor, t, seg[6], seg[7]);
      const AssemblyView view(reactor, index);
      const std::size_t n = view.size();

      json occupied = json::array();
      json rods = json::array();
      for (std::size_t r = 0; r < n; ++r) {
        json orow = json::array();
        json rrow = json::array();
        for (std::size_t c = 0; c < n; ++c) {
          orow.push_back(view.occupied(r, c));
          rrow.push_back(view.occupied(r, c) ? json(view.rod(r, c).name) : json(nullptr));
        }
        occupied.push_back(std::move(orow));
        rods.push_back(std::move(rrow));
      }
      json rod_kinds = json::object();
      for (const auto& rod : reactor.rod_defs()) rod_kinds[rod.name] = std::string(to_string(rod.kind));

      const auto features = view.feature_names();
      json out{{"file", file.id},
               {"reactor", reactor.name()},
               {"reactor_type", std::string(to_string(reactor.type()))},
               {"type", std::string(to_string(t))},
               {"row", seg[6]},
               {"col", seg[7]},
               {"assembly", assembly_def_json(view.def(), index)},
               {"labels", labels_json(view.labels())},
               {"occupied", std::move(occupied)},
               {"rods", std::move(rods)},
               {"rod_kinds", std::move(rod_kinds)},
               {"features", features}};

      const ScaleScope scope = query_value(req, "norm")
                                   ? parse_scale_scope(*query_value(req, "norm"))
                                   : ScaleScope::selected_level;
      const std::string* fq = query_value(req, "feature");
      if (!fq && features.empty()) {
        out.update({{"feature", nullptr}, {"times", json::array()}, {"time", nullptr},
                    {"levels", json::array()}, {"level", nullptr}, {"values", nullptr},
                    {"scale", nullptr}, {"units", nullptr}});
        return reply(200, std::move(out));
      }
      const std::string feature = fq ? *fq : features.front();
      const auto times = view.times(feature);
      if (times.empty()) not_found("assembly has no feature '" + feature + "'");
      const double time = query_value(req, "time")
                              ? parse_double(*query_value(req, "time"), "time")
                              : times.front();
      const auto levels = axial_levels(view, feature, time);
      if (levels.empty()) not_found("no '" + feature + "' data at the requested time");
      const int level = query_value(req, "level") ? parse_int(*query_value(req, "level"), "level") : 1;
      if (level < 1 || static_cast<std::size_t>(level) > levels.size()) {
        bad_request("level must be within 1.." + std::to_string(levels.size()));
      }

      json values = json::array();
      json units = nullptr;
      for (std::size_t r = 0; r < n; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < n; ++c) {
          const auto v = level_value(view, r, c, feature, time, level);
          row.push_back(v && !std::isnan(*v) ? json(*v) : json(nullptr));
          if (units.is_null() && v) {
            const auto* bucket = view.find_entries(r, c, feature, time);
            const auto id = bucket->front().units_id;
            if (id < reactor.units().size()) units = reactor.units()[id];
          }
        }
        values.push_back(std::move(row));
      }
      json scale = nullptr;
      try {
        const auto s = compute_scale(view, feature, time, level, scope);
        scale = {{"min", s.min}, {"max", s.max}, {"scope", std::string(to_string(s.scope))}};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::not_found) throw;
      }
      out.update({{"feature", feature}, {"times", times}, {"time", time}, {"levels", levels},
                  {"level", level}, {"values", std::move(values)}, {"scale", std::move(scale)},
                  {"units", units}});
      return reply(200, std::move(out));
    }

    if (seg.size() == 9 && seg[4] == "rod") {
      const auto t = type_param(reactor, query_value(req, "type"));
      const auto index = placed_def(reactor, t, seg[5], seg[6]);
      const AssemblyView view(reactor, index);
      const auto [pr, pc] = cell_from_labels(view.labels(), seg[7], seg[8], "pin");
      const RodDef& rod = view.rod(pr, pc);

      json blocks = json::array();
      for (const auto& b : rod.blocks) {
        json rings = json::array();
        for (const auto& ring : b.rings) {
          rings.push_back({{"material", ring.material.name},
                           {"phase", std::string(to_string(ring.material.phase))},
                           {"color", material_color(ring.material).hex()},
                           {"inner_radius", ring.inner_radius},
                           {"outer_radius", ring.outer_radius},
                           {"height", ring.height}});
        }
        blocks.push_back({{"z_start", b.z_start}, {"z_end", b.z_end}, {"rings", std::move(rings)}});
      }
      const std::string* tq = query_value(req, "time");
      const std::optional<double> want_time =
          tq ? std::optional<double>(parse_double(*tq, "time")) : std::nullopt;
      json series = json::object();
      for (const auto& feature : view.feature_names()) {
        const auto times = view.times(feature);
        const double time = want_time.value_or(times.front());
        if (!view.has_feature(pr, pc, feature, time)) continue;
        series[feature] = {{"time", time},
                           {"points", series_points(axial_series(view, pr, pc, feature, time))}};
      }
      return reply(200, {{"file", file.id},
                         {"reactor", reactor.name()},
                         {"assembly", assembly_def_json(view.def(), index)},
                         {"pin", cell_label(view.labels(), pr, pc)},
                         {"rod", {{"name", rod.name},
                                  {"kind", std::string(to_string(rod.kind))},
                                  {"pressure", optional_number(rod.pressure)},
                                  {"height", rod.height()},
                                  {"outer_radius", rod.outer_radius()}}},
                         {"blocks", std::move(blocks)},
                         {"series", std::move(series)}});
    }
  }

  if (!get && !post) throw HttpError{405, "method-not-allowed", "method " + req.method};
  not_found("no route for " + req.method + " '" + req.path + "'");
}

// ---------------------------------------------------------------------------
// HTTP glue

bool is_local_origin(const std::string& origin) {
  for (const char* scheme : {"http://", "https://"}) {
    const std::string s(scheme);
    if (origin.rfind(s, 0) != 0) continue;
    std::string host = origin.substr(s.size());
    if (!host.empty() && host.back() == '/') host.pop_back();
    if (host.rfind("[::1]", 0) == 0) {
      host = host.substr(5);
      if (host.empty() || host[0] == ':') return true;
      return false;
    }
    const auto colon = host.find(':');
    const std::string name = host.substr(0, colon);
    if (colon != std::string::npos) {
      const std::string port = host.substr(colon + 1);
      if (port.empty() || port.find_first_not_of("0123456789") != std::string::npos) return false;
    }
    return name == "localhost" || name == "127.0.0.1";
  }
  return false;
}

struct HttpServer::Impl {
  Session& session;
  ServeOptions options;
  httplib::Server http;

  Impl(Session& s, ServeOptions o) : session(s), options(std::move(o)) {}
};

HttpServer::HttpServer(Session& session, ServeOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {
  auto& http = impl_->http;
  Session* s = &session;
  auto cors = [](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (!origin.empty() && is_local_origin(origin)) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  };
  auto forward = [s, cors](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    r.body = req.body;
    const Response out = s->handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
    cors(req, res);
  };
  http.Get("/api/.*", forward);
  http.Post("/api/.*", forward);
  http.Options("/api/.*", [cors](const httplib::Request& req, httplib::Response& res) {
    res.status = 204;
    cors(req, res);
  });
  if (!impl_->options.static_dir.empty() &&
      !http.set_mount_point("/", impl_->options.static_dir)) {
    fail(ErrorCode::io_error, "static directory '" + impl_->options.static_dir + "' not found");
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->http.bind_to_any_port(o.host);
    if (port < 0) fail(ErrorCode::io_error, "cannot bind " + o.host);
    o.port = port;
    return port;
  }
  if (!impl_->http.bind_to_port(o.host, o.port)) {
    fail(ErrorCode::io_error, "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  return o.port;
}

void HttpServer::listen() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace corelens::server
