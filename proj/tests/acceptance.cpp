// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Tolerances and sizes are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "corelens/analysis.hpp"
#include "corelens/layout.hpp"
#include "corelens/nrdf.hpp"
#include "corelens/render.hpp"
#include "corelens/samples.hpp"
#include "generators.hpp"
#include "golden_cases.hpp"

using namespace corelens;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kRoundTripReactors = 1000;
constexpr double kRoundTripSeconds = 60.0;
constexpr double kBenchWriteSeconds = 10.0;
constexpr double kBenchReadSeconds = 10.0;
constexpr double kScaleRelTol = 1e-12;
constexpr int kKMeansInstances = 20;
constexpr int kKMeansSeeds = 10;
constexpr double kKMeansTol = 1e-9;
constexpr std::size_t kMutations = 100000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// -- shared fixtures --------------------------------------------------------

Reactor series_reactor(std::size_t size, const std::vector<std::vector<double>>& values) {
  Reactor r("r", ReactorType::pwr, 1);
  r.add_unit("W");
  RodDef rod;
  rod.name = "fuel";
  MaterialBlock b;
  b.z_end = 10.0;
  Ring ring;
  ring.material = {"uo2", Phase::solid};
  ring.outer_radius = 0.4;
  ring.height = 10.0;
  b.rings.push_back(ring);
  rod.blocks.push_back(b);
  r.add_rod_def(rod);
  AssemblyDef def("a", AssemblyType::fuel, size, 1.26);
  for (std::size_t i = 0; i < size * size; ++i) {
    def.set_rod(i / size, i % size, 0u);
    for (std::size_t k = 0; k < values[i].size(); ++k) {
      DataEntry e;
      e.value = values[i][k];
      e.position.z = static_cast<double>(k);
      def.add_pin_data(i / size, i % size, "P", e);
    }
  }
  r.add_assembly_def(def);
  r.set_assembly(AssemblyType::fuel, 0, 0, 0u);
  r.freeze();
  return r;
}

double best_partition_inertia(const Matrix& pts, std::size_t k) {
  const std::size_t n = pts.rows;
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (n - i < k - used) return;
    if (i == n) {
      double total = 0.0;
      for (std::size_t g = 0; g < k; ++g) {
        std::vector<double> mean(pts.cols, 0.0);
        double count = 0;
        for (std::size_t p = 0; p < n; ++p) {
          if (label[p] != g) continue;
          count += 1;
          for (std::size_t d = 0; d < pts.cols; ++d) mean[d] += pts(p, d);
        }
        for (std::size_t p = 0; p < n; ++p) {
          if (label[p] != g) continue;
          for (std::size_t d = 0; d < pts.cols; ++d) {
            const double dx = pts(p, d) - mean[d] / count;
            total += dx * dx;
          }
        }
      }
      best = std::min(best, total);
      return;
    }
    for (std::size_t g = 0; g <= used && g < k; ++g) {
      label[i] = g;
      rec(i + 1, g == used ? used + 1 : used);
    }
  };
  rec(0, 0);
  return best;
}

// -- criteria ---------------------------------------------------------------

Outcome round_trip() {
  std::mt19937_64 rng(20240501);
  const testing::ReactorShape shape{17, 6, 1, 5, 3, 4};
  int failures = 0, pwr = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < kRoundTripReactors; ++i) {
    const Reactor r = testing::random_reactor(rng, shape);
    pwr += r.type() == ReactorType::pwr;
    try {
      if (!(load_reactor(nrdf::decode(nrdf::encode(store_reactor(r)))) == r)) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < kRoundTripSeconds,
          std::to_string(kRoundTripReactors) + " reactors (" + std::to_string(pwr) + " PWR), " +
              std::to_string(failures) + " failures, " + fmt("%.2f", secs) + " s (limit " +
              fmt("%.0f", kRoundTripSeconds) + " s)"};
}

Outcome bench() {
  const samples::BenchOptions opts;  // 52,800 pins, 49 levels, 2 features
  const Reactor r = samples::make_bench(opts);
  const auto path = (std::filesystem::temp_directory_path() / "corelens_acceptance_bench.nrdf").string();
  const Reactor* one[] = {&r};

  auto t0 = Clock::now();
  save_reactors(path, one);
  const double write_s = seconds_since(t0);
  const auto bytes = std::filesystem::file_size(path);

  t0 = Clock::now();
  const auto file = nrdf::read_file(path);
  const auto loaded = load_reactors(file);
  const double read_s = seconds_since(t0);
  std::filesystem::remove(path);

  const auto node = nrdf::NodeView(file, file.root).get_child("reactors").get_child(r.name());
  const auto rod_nodes = node.get_child("rod_defs").children().size();
  const auto asm_nodes = node.get_child("assembly_defs").children().size();
  std::size_t pins = 0;
  for (const auto& def : r.assembly_defs()) {
    for (const auto& cell : def.rod_grid().cells()) {
      pins += cell && r.rod_defs()[*cell].kind == RodKind::fuel;
    }
  }
  // Dedup: one node per definition, however often a definition is used.
  const bool dedup = rod_nodes == r.rod_defs().size() && rod_nodes == 5 &&
                     asm_nodes == r.assembly_defs().size();
  const bool same = loaded.size() == 1 && loaded[0] == r;
  return {write_s < kBenchWriteSeconds && read_s < kBenchReadSeconds && dedup && same,
          std::to_string(pins) + " fuel pins, " + std::to_string(asm_nodes) + " assembly defs, " +
              std::to_string(rod_nodes) + " rod defs stored once, " + std::to_string(bytes) +
              " bytes, write " + fmt("%.2f", write_s) + " s, read " + fmt("%.2f", read_s) +
              " s" + (same ? "" : ", read-back mismatch")};
}

Outcome diff_properties() {
  std::mt19937_64 rng(99);
  const auto labels = make_default_labels(4);
  std::vector<std::string> pins;
  for (std::size_t i = 0; i < 16; ++i) pins.push_back(cell_label(labels, i / 4, i % 4));
  auto random_values = [&] {
    std::vector<std::vector<double>> v(16, std::vector<double>(6));
    for (auto& row : v) {
      for (auto& x : row) x = 0.05 + testing::unit(rng);
    }
    return v;
  };
  double worst_identity = 0.0, worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto va = random_values();
    const auto vb = random_values();
    const double c = std::exp(12.0 * testing::unit(rng) - 6.0);
    const double d = std::exp(12.0 * testing::unit(rng) - 6.0);
    auto vca = va, vdb = vb;
    for (auto& row : vca) {
      for (auto& x : row) x *= c;
    }
    for (auto& row : vdb) {
      for (auto& x : row) x *= d;
    }
    const Reactor a = series_reactor(4, va), b = series_reactor(4, vb);
    const Reactor ca = series_reactor(4, vca), db = series_reactor(4, vdb);
    const AssemblyView av(a, 0), bv(b, 0), cav(ca, 0), dbv(db, 0);
    const auto identity = pin_diff(av, av, "P", pins, 0.0);
    for (double v : identity.table("diff").values.data) {
      worst_identity = std::max(worst_identity, std::abs(v));
    }
    const auto x = pin_diff(av, bv, "P", pins, 0.0).table("diff").values.data;
    const auto y = pin_diff(cav, dbv, "P", pins, 0.0).table("diff").values.data;
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst_rel = std::max(worst_rel, std::abs(x[i] - y[i]) / std::max(std::abs(x[i]), 1.0));
    }
  }
  return {worst_identity == 0.0 && worst_rel <= kScaleRelTol,
          "100 random pairs; max |diff(A,A)| = " + fmt("%.3g", worst_identity) +
              ", max relative change under scaling = " + fmt("%.3g", worst_rel) + " (limit " +
              fmt("%.0e", kScaleRelTol) + ")"};
}

Outcome diff_hand_case() {
  const Reactor in = series_reactor(1, {{1.0, 3.0}});
  const Reactor ref = series_reactor(1, {{2.0, 2.0}});
  const std::vector<std::string> pins{"A1"};
  const auto t = pin_diff(AssemblyView(in, 0), AssemblyView(ref, 0), "P", pins, 0.0).table("diff");
  const bool ok = t.values.data == std::vector<double>{-50.0, 50.0};
  return {ok, "input [1,3] vs reference [2,2] -> [" + nrdf::format_double(t.values.data[0]) + ", " +
                  nrdf::format_double(t.values.data[1]) + "]"};
}

Outcome kmeans_oracle() {
  std::mt19937_64 rng(4242);
  int mismatches = 0, runs = 0, nonmonotone = 0;
  double worst = 0.0;
  for (int inst = 0; inst < kKMeansInstances; ++inst) {
    const std::size_t n = testing::pick(rng, 1, 8);
    const std::size_t d = testing::pick(rng, 1, 2);
    Matrix pts(n, d);
    for (auto& x : pts.data) x = 10.0 * testing::unit(rng) - 5.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double oracle = best_partition_inertia(pts, k);
      double best = std::numeric_limits<double>::infinity();
      for (int seed = 0; seed < kKMeansSeeds; ++seed) {
        const auto res = kmeans(pts, k, static_cast<std::uint64_t>(seed));
        ++runs;
        best = std::min(best, res.inertia);
        for (std::size_t i = 1; i < res.inertia_history.size(); ++i) {
          if (res.inertia_history[i] > res.inertia_history[i - 1]) {
            ++nonmonotone;
            break;
          }
        }
      }
      const double gap = std::abs(best - oracle);
      worst = std::max(worst, gap);
      if (gap > kKMeansTol) ++mismatches;
    }
  }
  return {mismatches == 0 && nonmonotone == 0,
          std::to_string(kKMeansInstances) + " instances, " + std::to_string(runs) +
              " runs; max gap to exhaustive oracle " + fmt("%.3g", worst) + " (limit " +
              fmt("%.0e", kKMeansTol) + "), " + std::to_string(nonmonotone) +
              " runs with rising inertia"};
}

Outcome parser_robustness() {
  std::size_t truncations = 0, unstructured = 0, accepted_truncations = 0;
  std::vector<std::vector<std::byte>> goldens;
  for (const auto& [name, _] : testing::nrdf_cases()) {
    goldens.push_back(testing::read_bytes(testing::golden_path(name)));
  }
  for (const auto& g : goldens) {
    for (std::size_t n = 0; n < g.size(); ++n) {
      ++truncations;
      try {
        nrdf::decode(std::span(g).first(n));
        ++accepted_truncations;
      } catch (const Error&) {
      } catch (...) {
        ++unstructured;
      }
    }
  }
  std::mt19937_64 rng(777);
  std::size_t rejected = 0, parsed = 0, layout_ok = 0;
  for (std::size_t i = 0; i < kMutations; ++i) {
    auto bytes = goldens[i % goldens.size()];
    const std::size_t edits = testing::pick(rng, 1, 8);
    for (std::size_t e = 0; e < edits; ++e) {
      const auto op = testing::pick(rng, 0, 9);
      const std::size_t at = testing::pick(rng, 0, bytes.size() - 1);
      if (op < 7) {
        bytes[at] = static_cast<std::byte>(rng() & 0xFF);
      } else if (op == 7) {
        bytes.resize(at);
        if (bytes.empty()) break;
      } else if (op == 8) {
        bytes.insert(bytes.begin() + static_cast<std::ptrdiff_t>(at), static_cast<std::byte>(rng() & 0xFF));
      } else {
        // Large values in length and count fields.
        for (std::size_t b = at; b < std::min(at + 4, bytes.size()); ++b) bytes[b] = std::byte{0xFF};
      }
    }
    try {
      const auto f = nrdf::decode(bytes);
      ++parsed;
      try {
        load_reactors(f);
        ++layout_ok;
      } catch (const Error&) {
      }
    } catch (const Error&) {
      ++rejected;
    } catch (...) {
      ++unstructured;
    }
  }
  return {unstructured == 0 && accepted_truncations == 0,
          std::to_string(truncations) + " truncations of " + std::to_string(goldens.size()) +
              " goldens all rejected with structured errors; " + std::to_string(kMutations) +
              " mutations: " + std::to_string(rejected) + " rejected, " + std::to_string(parsed) +
              " parsed (" + std::to_string(layout_ok) + " still valid reactors), " +
              std::to_string(unstructured) + " unstructured failures"};
}

Outcome render_goldens() {
  int mismatched = 0;
  std::string which;
  for (const auto& [name, make] : testing::svg_cases()) {
    const std::string expected = testing::read_text(testing::golden_path(name));
    if (make() != expected || make() != expected) {
      ++mismatched;
      which += " " + name;
    }
  }
  return {mismatched == 0, std::to_string(testing::svg_cases().size()) +
                               " views re-rendered twice and compared byte for byte" +
                               (mismatched ? "; mismatched:" + which : "")};
}

Outcome preset_pipeline() {
  const Reactor made = samples::make_preset("3a");
  const auto bytes = nrdf::encode(store_reactor(made));
  const Reactor r = load_reactor(nrdf::decode(bytes));
  const auto fuel = r.assembly_at(AssemblyType::fuel, 1, 1);
  if (!fuel) return {false, "no fuel assembly at the core center"};
  const AssemblyView v(r, *fuel);
  const auto features = v.feature_names();
  const bool has_features = features == std::vector<std::string>{"Axial Power", "Total Power"};
  const auto levels = axial_levels(v, "Axial Power", 0.0).size();
  const std::vector<std::string> pins{"B2", "E4", "H7"};
  const auto diff = pin_diff(v, v, "Axial Power", pins, 0.0);
  const auto& t = diff.table("diff");
  const auto vectors = pin_feature_vectors(v, "Axial Power", 0.0);
  const auto km = kmeans(vectors.values, 3, 1);
  const bool ok = r == made && v.size() == 17 && levels == 49 && has_features &&
                  t.values.rows == 3 && t.values.cols == 49 && vectors.values.rows == 289 &&
                  km.assignments.size() == 289;
  return {ok, std::to_string(v.size()) + "x" + std::to_string(v.size()) + " assembly, " +
                  std::to_string(levels) + " levels, features " +
                  (has_features ? "Axial Power/Total Power" : "missing") + ", diff table " +
                  std::to_string(t.values.rows) + "x" + std::to_string(t.values.cols) +
                  ", kmeans over " + std::to_string(vectors.values.rows) + " pins"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"round-trip fidelity", round_trip},
      {"performance envelope", bench},
      {"diff identity and scale invariance", diff_properties},
      {"diff hand case", diff_hand_case},
      {"k-means correctness", kmeans_oracle},
      {"parser robustness", parser_robustness},
      {"render determinism", render_goldens},
      {"3a preset pipeline", preset_pipeline},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
