#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "corelens/analysis.hpp"
#include "corelens/ingest.hpp"
#include "corelens/layout.hpp"
#include "corelens/nrdf.hpp"
#include "corelens/render.hpp"
#include "corelens/samples.hpp"
#include "corelens/server.hpp"

namespace corelens::cli {

namespace {

// Carries an exit code out of a subcommand.
struct Exit {
  int code;
  std::string message;
};

int file_error_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::io_error:
    case ErrorCode::not_nrdf:
    case ErrorCode::corrupt_file:
    case ErrorCode::unsupported_version:
    case ErrorCode::encode_error: return kFileError;
    default: return kUsage;
  }
}

// Runs `fn`, turning library errors into the given exit code.
template <class F>
auto stage(int code, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Exit{code, e.what()};
  }
}

std::vector<Reactor> load(const std::string& path) {
  try {
    return load_reactors(nrdf::read_file(path));
  } catch (const Error& e) {
    throw Exit{kFileError, path + ": " + e.what()};
  }
}

const Reactor& pick_reactor(const std::vector<Reactor>& reactors, const std::string& name) {
  for (const auto& r : reactors) {
    if (name.empty() || r.name() == name) return r;
  }
  throw Exit{kUsage, name.empty() ? "file holds no reactors" : "no reactor named '" + name + "'"};
}

// The named assembly definition, the one placed at a core label, or the first
// fuel definition.
std::uint32_t pick_assembly(const Reactor& r, const std::string& name, const std::string& at,
                            const std::string& type) {
  const auto& defs = r.assembly_defs();
  if (!name.empty()) {
    for (std::uint32_t i = 0; i < defs.size(); ++i) {
      if (defs[i].name() == name) return i;
    }
    throw Exit{kUsage, "no assembly definition named '" + name + "'"};
  }
  if (!at.empty()) {
    return stage(kUsage, [&] {
      const auto t = type.empty() ? AssemblyType::fuel : parse_assembly_type(type);
      const auto [row, col] = parse_cell_label(r.labels(), at);
      const auto idx = r.assembly_at(t, row, col);
      if (!idx) fail(ErrorCode::not_found, "no " + std::string(to_string(t)) + " assembly at " + at);
      return *idx;
    });
  }
  for (std::uint32_t i = 0; i < defs.size(); ++i) {
    if (defs[i].type() == AssemblyType::fuel) return i;
  }
  if (!defs.empty()) return 0;
  throw Exit{kUsage, "reactor '" + r.name() + "' has no assembly definitions"};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw Exit{kFileError, "cannot write '" + path + "'"};
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Exit{kFileError, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// ---------------------------------------------------------------------------

void cmd_info(const std::string& path, std::ostream& out) {
  const auto reactors = load(path);
  for (const auto& r : reactors) {
    out << "reactor " << r.name() << ": " << to_string(r.type()) << " " << r.size() << "x"
        << r.size() << ", " << r.rod_defs().size() << " rod definitions, "
        << r.assembly_defs().size() << " assembly definitions\n";
    out << "  units: " << join(r.units(), ", ") << "\n";
    for (std::uint32_t i = 0; i < r.assembly_defs().size(); ++i) {
      const AssemblyView view(r, i);
      const auto& def = view.def();
      std::size_t rods = 0;
      for (const auto& cell : def.rod_grid().cells()) rods += cell.has_value();
      std::size_t placed = 0;
      for (const auto& cell : r.grid(def.type()).cells()) placed += cell == i;
      out << "  assembly " << def.name() << " (" << to_string(def.type()) << "): " << def.size()
          << "x" << def.size() << ", " << rods << " rods, placed " << placed << "x\n";
      for (const auto& feature : view.feature_names()) {
        const auto times = view.times(feature);
        std::vector<std::string> ts;
        for (double t : times) ts.push_back(nrdf::format_double(t));
        const auto levels = axial_levels(view, feature, times.front());
        out << "    feature \"" << feature << "\": times " << join(ts, ", ") << "; "
            << levels.size() << " axial level" << (levels.size() == 1 ? "" : "s") << "\n";
      }
    }
  }
}

struct RenderArgs {
  std::string file, view = "core", reactor, type, select, assembly, at, mode = "geometry",
              feature, norm = "selected_level", pin, pins, window, output;
  int level = 1;
  double time = 0.0;
  std::optional<double> z;
  bool quarter = false;
};

std::string cmd_render(const RenderArgs& a) {
  const auto reactors = load(a.file);
  const Reactor& r = pick_reactor(reactors, a.reactor);
  if (a.view == "core") {
    return stage(kUsage, [&] {
      std::optional<AssemblyType> t;
      if (!a.type.empty()) t = parse_assembly_type(a.type);
      std::optional<std::pair<std::size_t, std::size_t>> sel;
      if (!a.select.empty()) sel = parse_cell_label(r.labels(), a.select);
      return render_core(r, t, sel);
    });
  }
  const AssemblyView view(r, pick_assembly(r, a.assembly, a.at, a.type));
  if (a.view == "assembly") {
    return stage(kUsage, [&] {
      ViewSpec spec;
      spec.axial_level = a.level;
      spec.feature = a.feature;
      spec.time = a.time;
      if (a.mode == "data") {
        spec.kind = ViewKind::assembly_data;
        if (spec.feature.empty()) {
          const auto f = view.feature_names();
          if (f.empty()) fail(ErrorCode::not_found, "assembly has no data");
          spec.feature = f.front();
        }
        spec.scale = compute_scale(view, spec.feature, a.time, a.level, parse_scale_scope(a.norm));
      } else if (a.mode != "geometry") {
        fail(ErrorCode::invalid_argument, "--mode must be geometry or data");
      }
      const std::size_t n = view.size();
      if (a.quarter) {
        spec.window = GridWindow{n / 2, n / 2, n - n / 2, n - n / 2};
      } else if (!a.window.empty()) {
        const auto parts = split_list(a.window);
        if (parts.size() != 4) fail(ErrorCode::invalid_argument, "--window needs row0,col0,rows,cols");
        spec.window = GridWindow{std::stoul(parts[0]), std::stoul(parts[1]), std::stoul(parts[2]),
                                 std::stoul(parts[3])};
      }
      return render_assembly(view, spec);
    });
  }
  if (a.view == "rod") {
    return stage(kUsage, [&] {
      if (a.pin.empty()) fail(ErrorCode::invalid_argument, "--pin is required for the rod view");
      const auto [pr, pc] = parse_cell_label(view.labels(), a.pin);
      const RodDef& rod = view.rod(pr, pc);
      double z = a.z.value_or(0.5 * (rod.blocks.empty() ? 0.0
                                                        : rod.blocks.front().z_start +
                                                              rod.blocks.back().z_end));
      std::optional<RodOverlay> overlay;
      if (!a.feature.empty()) {
        const auto levels = axial_levels(view, a.feature, a.time);
        if (a.level < 1 || static_cast<std::size_t>(a.level) > levels.size()) {
          fail(ErrorCode::invalid_argument, "level outside 1.." + std::to_string(levels.size()));
        }
        if (!a.z) z = levels[static_cast<std::size_t>(a.level) - 1];
        const auto v = level_value(view, pr, pc, a.feature, a.time, a.level);
        overlay = RodOverlay{v.value_or(std::numeric_limits<double>::quiet_NaN()),
                             compute_scale(view, a.feature, a.time, a.level,
                                           parse_scale_scope(a.norm))};
      }
      return render_rod(rod, z, overlay);
    });
  }
  if (a.view == "axial") {
    return stage(kUsage, [&] {
      if (a.feature.empty() || a.pins.empty()) {
        fail(ErrorCode::invalid_argument, "--feature and --pins are required for the axial view");
      }
      std::vector<Series> series;
      for (const auto& pin : split_list(a.pins)) {
        const auto [pr, pc] = parse_cell_label(view.labels(), pin);
        Series s{pin, {}};
        for (const auto& p : axial_series(view, pr, pc, a.feature, a.time)) {
          s.points.emplace_back(p.z, p.value);
        }
        series.push_back(std::move(s));
      }
      return render_plot(series, a.feature, "height (cm)", a.feature);
    });
  }
  throw Exit{kUsage, "--view must be core, assembly, rod or axial"};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"corelens: reactor results toolkit", "corelens"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // dump
  std::string dump_file;
  bool dump_full = false;
  auto* dump = app.add_subcommand("dump", "Print the node tree of an NRDF file");
  dump->add_option("file", dump_file)->required();
  dump->add_flag("--full", dump_full, "Include attribute values and array payloads");

  // info
  std::string info_file;
  auto* info = app.add_subcommand("info", "Summarize reactors, features and times");
  info->add_option("file", info_file)->required();

  // convert csv
  std::string csv_file, skeleton_file, convert_out, convert_reactor, convert_assembly;
  auto* convert = app.add_subcommand("convert", "Convert external results to NRDF");
  convert->require_subcommand(1);
  auto* csv = convert->add_subcommand("csv", "Add pin data from CSV to a skeleton reactor");
  csv->add_option("csv", csv_file)->required();
  csv->add_option("--reactor-spec", skeleton_file, "Skeleton NRDF file")->required();
  csv->add_option("-o,--output", convert_out)->required();
  csv->add_option("--reactor", convert_reactor, "Reactor name in the skeleton");
  csv->add_option("--assembly", convert_assembly, "Assembly definition receiving the data");

  // diff
  std::string diff_input, diff_reference, diff_feature, diff_pins, diff_plot, diff_assembly,
      diff_reactor, diff_out_dir;
  double diff_time = 0.0;
  auto* diff = app.add_subcommand("diff", "Normalized percentage difference of pin data");
  diff->add_option("input", diff_input)->required();
  diff->add_option("reference", diff_reference)->required();
  diff->add_option("--feature", diff_feature)->required();
  diff->add_option("--pins", diff_pins, "Comma-separated pin labels")->required();
  diff->add_option("--plot", diff_plot, "Write the diff series as an SVG plot");
  diff->add_option("--assembly", diff_assembly, "Assembly definition name");
  diff->add_option("--reactor", diff_reactor);
  diff->add_option("--time", diff_time);
  diff->add_option("--out-dir", diff_out_dir, "Write time-stamped CSV artifacts here");

  // cluster
  std::string cluster_file, cluster_feature, cluster_assembly, cluster_reactor;
  std::int64_t cluster_k = 3;
  std::uint64_t cluster_seed = 0;
  std::int64_t cluster_max_iter = 100;
  double cluster_time = 0.0;
  auto* cluster = app.add_subcommand("cluster", "k-means clustering of pins by axial data");
  cluster->add_option("file", cluster_file)->required();
  cluster->add_option("--feature", cluster_feature)->required();
  cluster->add_option("--k", cluster_k)->required();
  cluster->add_option("--seed", cluster_seed)->required();
  cluster->add_option("--max-iter", cluster_max_iter);
  cluster->add_option("--assembly", cluster_assembly);
  cluster->add_option("--reactor", cluster_reactor);
  cluster->add_option("--time", cluster_time);

  // render
  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render a view as SVG");
  render->add_option("file", ra.file)->required();
  render->add_option("--view", ra.view, "core, assembly, rod or axial")
      ->check(CLI::IsMember({"core", "assembly", "rod", "axial"}));
  render->add_option("-o,--output", ra.output)->required();
  render->add_option("--reactor", ra.reactor);
  render->add_option("--type", ra.type, "Assembly type");
  render->add_option("--select", ra.select, "Core cell to outline, e.g. B2");
  render->add_option("--assembly", ra.assembly, "Assembly definition name");
  render->add_option("--at", ra.at, "Core position of the assembly, e.g. B2");
  render->add_option("--mode", ra.mode, "geometry or data")
      ->check(CLI::IsMember({"geometry", "data"}));
  render->add_option("--feature", ra.feature);
  render->add_option("--level", ra.level, "Axial level, 1 = bottom");
  render->add_option("--norm", ra.norm, "selected_level, whole_assembly or all_assemblies");
  render->add_option("--time", ra.time);
  render->add_option("--pin", ra.pin, "Pin label for the rod view");
  render->add_option("--pins", ra.pins, "Pin labels for the axial view");
  render->add_option("--z", ra.z, "Height of the rod cross-section (cm)");
  render->add_flag("--quarter", ra.quarter, "Only the lower-right quarter of the assembly");
  render->add_option("--window", ra.window, "row0,col0,rows,cols");

  // gen-sample
  std::string preset, sample_out;
  auto* gen = app.add_subcommand("gen-sample", "Write a synthetic sample reactor");
  gen->add_option("--preset", preset)->required()->check(CLI::IsMember({"3a", "sfr7"}));
  gen->add_option("-o,--output", sample_out)->required();

  // bench
  samples::BenchOptions bench_opts;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time writing and reading a large core");
  bench->add_option("--pins", bench_opts.pins)->check(CLI::PositiveNumber);
  bench->add_option("--levels", bench_opts.levels)->check(CLI::PositiveNumber);
  bench->add_option("--features", bench_opts.features)->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_opts.seed);
  bench->add_option("-o,--output", bench_out, "Keep the benchmark file at this path");

  // serve
  server::ServeOptions serve_opts;
  std::vector<std::string> serve_files;
  auto* serve = app.add_subcommand("serve", "Serve files over a local JSON API");
  serve->add_option("files", serve_files)->required();
  serve->add_option("--port", serve_opts.port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_opts.host);
  serve->add_option("--static", serve_opts.static_dir, "Directory of viewer assets");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (dump->parsed()) {
      const auto file = stage(kFileError, [&] { return nrdf::read_file(dump_file); });
      out << nrdf::dump(file, dump_full ? nrdf::DumpMode::full : nrdf::DumpMode::tree);
    } else if (info->parsed()) {
      cmd_info(info_file, out);
    } else if (csv->parsed()) {
      const auto skeletons = load(skeleton_file);
      const Reactor& skeleton = pick_reactor(skeletons, convert_reactor);
      const std::string text = read_text(csv_file);
      const Reactor result = stage(kFileError, [&] {
        return ingest_csv(skeleton, text, IngestOptions{convert_assembly});
      });
      std::vector<const Reactor*> all;
      for (const auto& r : skeletons) all.push_back(&r == &skeleton ? &result : &r);
      stage(kFileError, [&] { save_reactors(convert_out, all); });
      out << "wrote " << convert_out << "\n";
    } else if (diff->parsed()) {
      const auto in_file = load(diff_input);
      const auto ref_file = load(diff_reference);
      const Reactor& in_r = pick_reactor(in_file, diff_reactor);
      const Reactor& ref_r = pick_reactor(ref_file, diff_reactor);
      const AssemblyView in(in_r, pick_assembly(in_r, diff_assembly, "", ""));
      const AssemblyView ref(ref_r, pick_assembly(ref_r, diff_assembly, "", ""));
      const auto pins = split_list(diff_pins);
      if (pins.empty()) throw Exit{kUsage, "--pins needs at least one label"};
      auto result = stage(kAnalysisError, [&] {
        auto r = pin_diff(in, ref, diff_feature, pins, diff_time);
        r.created_at = std::chrono::system_clock::now();
        return r;
      });
      out << table_csv(result.table("diff"));
      if (!diff_plot.empty()) {
        std::vector<Series> series;
        for (const auto& s : result.series) {
          if (!s.points.empty()) series.push_back(s);
        }
        if (series.empty()) throw Exit{kAnalysisError, "no finite differences to plot"};
        write_text(diff_plot, stage(kAnalysisError, [&] {
                     return render_plot(series, diff_feature + " difference", "height (cm)",
                                        "difference (%)");
                   }));
      }
      if (!diff_out_dir.empty()) {
        for (const auto& p : stage(kFileError, [&] { return write_artifacts(result, diff_out_dir); })) {
          err << "wrote " << p << "\n";
        }
      }
    } else if (cluster->parsed()) {
      const auto reactors = load(cluster_file);
      const Reactor& r = pick_reactor(reactors, cluster_reactor);
      const AssemblyView view(r, pick_assembly(r, cluster_assembly, "", ""));
      stage(kAnalysisError, [&] {
        if (cluster_k < 1 || cluster_max_iter < 1) {
          fail(ErrorCode::invalid_argument, "--k and --max-iter must be positive");
        }
        const auto pf = pin_feature_vectors(view, cluster_feature, cluster_time);
        const auto km = kmeans(pf.values, static_cast<std::size_t>(cluster_k), cluster_seed,
                               static_cast<std::size_t>(cluster_max_iter));
        out << "pin,cluster\n";
        for (std::size_t i = 0; i < pf.labels.size(); ++i) {
          out << pf.labels[i] << "," << km.assignments[i] << "\n";
        }
        std::vector<std::size_t> counts(km.centroids.rows, 0);
        for (auto a : km.assignments) ++counts[a];
        for (std::size_t j = 0; j < counts.size(); ++j) {
          err << "cluster " << j << ": " << counts[j] << " pins\n";
        }
        err << "inertia " << nrdf::format_double(km.inertia) << ", " << km.iterations
            << " iterations" << (km.converged ? "" : " (not converged)") << "\n";
      });
    } else if (render->parsed()) {
      write_text(ra.output, cmd_render(ra));
    } else if (gen->parsed()) {
      const Reactor r = samples::make_preset(preset);
      const Reactor* list[] = {&r};
      stage(kFileError, [&] { save_reactors(sample_out, list); });
      out << "wrote " << sample_out << "\n";
    } else if (bench->parsed()) {
      namespace fs = std::filesystem;
      const std::string path =
          bench_out.empty() ? (fs::temp_directory_path() / "corelens_bench.nrdf").string()
                            : bench_out;
      auto t0 = std::chrono::steady_clock::now();
      const Reactor r = samples::make_bench(bench_opts);
      const double build_s = seconds_since(t0);
      t0 = std::chrono::steady_clock::now();
      const Reactor* list[] = {&r};
      stage(kFileError, [&] { save_reactors(path, list); });
      const double write_s = seconds_since(t0);
      t0 = std::chrono::steady_clock::now();
      const auto file = stage(kFileError, [&] { return nrdf::read_file(path); });
      const auto loaded = stage(kFileError, [&] { return load_reactors(file); });
      const double read_s = seconds_since(t0);
      if (loaded.size() != 1 || !(loaded.front() == r)) {
        throw Exit{kFileError, "benchmark file did not read back identically"};
      }
      const nrdf::NodeView root(file, file.root);
      const auto node = root.get_child("reactors").children().front();
      std::size_t pins = 0;
      for (const auto& def : r.assembly_defs()) {
        for (std::size_t i = 0; i < def.provider_grid().cells().size(); ++i) {
          pins += !def.provider_grid().cells()[i].empty();
        }
      }
      out << "pins " << pins << ", assemblies " << r.assembly_defs().size() << ", levels "
          << bench_opts.levels << ", features " << bench_opts.features << "\n";
      out << "rod_def nodes " << node.get_child("rod_defs").children().size()
          << ", assembly_def nodes " << node.get_child("assembly_defs").children().size()
          << "\n";
      out << "file bytes " << fs::file_size(path) << "\n";
      out << "build " << fixed(build_s, 3) << " s\n";
      out << "write " << fixed(write_s, 3) << " s\n";
      out << "read " << fixed(read_s, 3) << " s\n";
      if (bench_out.empty()) fs::remove(path);
    } else if (serve->parsed()) {
      std::unique_ptr<server::Session> session;
      try {
        session = server::Session::open(serve_files);
      } catch (const Error& e) {
        throw Exit{kFileError, e.what()};
      }
      server::HttpServer http(*session, serve_opts);
      const int port = stage(kFileError, [&] { return http.bind(); });
      out << "serving " << serve_files.size() << " file(s) on http://" << serve_opts.host << ":"
          << port << "\n"
          << std::flush;
      http.listen();
    }
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return file_error_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFileError;
  }
  return kOk;
}

}  // namespace corelens::cli
