#include <doctest.h>

#include <cmath>
#include <limits>
#include <regex>

#include "corelens/render.hpp"
#include "corelens/samples.hpp"
#include "generators.hpp"
#include "golden_cases.hpp"

using namespace corelens;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

// (x, y) of every translate() in document order.
std::vector<std::pair<double, double>> translations(const std::string& svg) {
  static const std::regex re(R"(translate\((-?[0-9.]+) (-?[0-9.]+)\))");
  std::vector<std::pair<double, double>> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator();
       ++it) {
    out.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  }
  return out;
}

// Same core as make_3a but with every pitch scaled.
Reactor scaled_core(double factor) {
  Reactor r("core", ReactorType::pwr, 3);
  r.set_assembly_pitch(21.5 * factor);
  const auto d = r.add_assembly_def(AssemblyDef("f", AssemblyType::fuel, 1, 1.26));
  for (std::size_t i = 0; i < 9; ++i) r.set_assembly(AssemblyType::fuel, i / 3, i % 3, d);
  r.freeze();
  return r;
}

double expected_hue(const Rgb& c) {
  // Hue of a fully saturated, half-lightness colour, from its RGB.
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  if (mx == mn) return 0.0;
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / (mx - mn), 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / (mx - mn) + 2.0);
  } else {
    h = 60.0 * ((r - g) / (mx - mn) + 4.0);
  }
  return h < 0 ? h + 360.0 : h;
}

}  // namespace

TEST_SUITE("render") {
  TEST_CASE("color anchors") {
    const ColorScale s{0.0, 10.0, ScaleScope::selected_level};
    CHECK(color_for(0.0, s) == Rgb{0, 0, 255});
    CHECK(color_for(10.0, s) == Rgb{255, 0, 0});
    CHECK(color_for(5.0, s) == Rgb{0, 255, 0});
    CHECK(color_for(std::nan(""), s) == kMissingGray);
    CHECK(kMissingGray.hex() == "#808080");
    CHECK(hue_for(0.0, s) == 240.0);
    CHECK(hue_for(10.0, s) == 0.0);
    CHECK(hue_for(3.0, {3.0, 3.0, ScaleScope::selected_level}) == 120.0);
    CHECK(std::isnan(hue_for(std::nan(""), s)));
    // Values outside the range clamp to the ends.
    CHECK(color_for(-5.0, s) == Rgb{0, 0, 255});
    CHECK(color_for(50.0, s) == Rgb{255, 0, 0});
    CHECK(hsl_to_rgb(60.0, 1.0, 0.5) == Rgb{255, 255, 0});
    CHECK(Rgb{1, 171, 255}.hex() == "#01abff");
  }

  TEST_CASE("hue decreases monotonically with value") {
    const ColorScale s{-3.0, 7.0, ScaleScope::whole_assembly};
    double prev_hue = 361.0;
    for (int i = 0; i <= 1000; ++i) {
      const double v = -3.0 + 10.0 * i / 1000.0;
      const double h = hue_for(v, s);
      CHECK(h <= prev_hue);
      prev_hue = h;
      // The RGB colour carries the same hue, up to 8-bit rounding.
      const Rgb c = color_for(v, s);
      CHECK(std::abs(expected_hue(c) - h) < 1.5);
    }
  }

  TEST_CASE("scale scopes") {
    const Reactor r = samples::make_3a(6);
    const AssemblyView v(r, 0);
    const auto lvl = compute_scale(v, "Axial Power", 0.0, 1, ScaleScope::selected_level);
    const auto whole = compute_scale(v, "Axial Power", 0.0, 1, ScaleScope::whole_assembly);
    const auto all = compute_scale(v, "Axial Power", 0.0, 1, ScaleScope::all_assemblies);
    CHECK(whole.min <= lvl.min);
    CHECK(whole.max >= lvl.max);
    CHECK(all.min <= whole.min);
    CHECK(all.max >= whole.max);
    CHECK(lvl.scope == ScaleScope::selected_level);
    CHECK_THROWS_AS(compute_scale(v, "Nope", 0.0, 1, ScaleScope::selected_level), Error);
    CHECK(parse_scale_scope("whole_assembly") == ScaleScope::whole_assembly);
    CHECK_THROWS_AS(parse_scale_scope("x"), Error);
  }

  TEST_CASE("core cell counts") {
    const Reactor r = samples::make_3a(3);
    const auto svg = render_core(r, std::nullopt);
    CHECK(count(svg, "<g class=\"cell\"") == 9);
    CHECK(count(svg, "data-type=\"fuel\"") == 1);
    CHECK(count(svg, "data-type=\"control_bank\"") == 8);
    const auto fuel_only = render_core(r, AssemblyType::fuel);
    CHECK(count(fuel_only, "<g class=\"cell\"") == 1);
    CHECK(count(fuel_only, "<g class=\"empty\"") == 8);
    CHECK(count(render_core(r, AssemblyType::fuel, std::pair<std::size_t, std::size_t>{1, 1}),
                "class=\"selection\"") == 1);
    try {
      render_core(r, AssemblyType::reflector);
      FAIL("expected not-found");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_found);
    }

    const Reactor sfr = samples::make_sfr7(3);
    const auto hex = render_core(sfr, std::nullopt);
    CHECK(count(hex, "<g class=\"cell\"") == 7);
    CHECK(count(hex, "<polygon") == 7);
    CHECK(count(hex, "<g class=\"empty\"") == 0);
  }

  TEST_CASE("doubling the pitch doubles every cell offset") {
    const auto a = translations(render_core(scaled_core(1.0), AssemblyType::fuel));
    const auto b = translations(render_core(scaled_core(2.0), AssemblyType::fuel));
    REQUIRE(a.size() == 9);
    REQUIRE(b.size() == 9);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i].first == doctest::Approx(2 * a[i].first).epsilon(1e-3));
      CHECK(b[i].second == doctest::Approx(2 * a[i].second).epsilon(1e-3));
      if (i > 0) CHECK(b[i].first - b[0].first == doctest::Approx(2 * (a[i].first - a[0].first)));
    }
  }

  TEST_CASE("assembly views") {
    const Reactor r = samples::make_3a(4);
    const AssemblyView v(r, 0);
    ViewSpec geo;
    const auto full = render_assembly(v, geo);
    CHECK(count(full, "<g class=\"cell\"") == 289);
    CHECK(count(full, "data-kind=\"control\"") == 24);
    CHECK(count(full, "class=\"axial-level\"") == 4);

    geo.window = GridWindow{8, 8, 9, 9};
    CHECK(count(render_assembly(v, geo), "<g class=\"cell\"") == 81);
    geo.window = GridWindow{10, 10, 9, 9};
    CHECK_THROWS_AS(render_assembly(v, geo), Error);

    ViewSpec data;
    data.kind = ViewKind::assembly_data;
    data.feature = "Axial Power";
    data.axial_level = 2;
    data.scale = compute_scale(v, data.feature, 0.0, 2, ScaleScope::selected_level);
    const auto svg = render_assembly(v, data);
    CHECK(count(svg, "data-value=") == 289);
    CHECK(count(svg, "data-level=\"2\" ") == 1);
    CHECK(svg.find("fill=\"#333333\"") != std::string::npos);

    data.axial_level = 5;
    try {
      render_assembly(v, data);
      FAIL("expected invalid-argument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_argument);
    }
    data.axial_level = 1;
    data.feature = "Nope";
    CHECK_THROWS_AS(render_assembly(v, data), Error);
    data.feature.clear();
    CHECK_THROWS_AS(render_assembly(v, data), Error);
  }

  TEST_CASE("missing data renders gray") {
    const Reactor r = samples::make_3a(2);
    const AssemblyView v(r, 0);
    Reactor sparse = r.thawed();
    // A pin with only one level leaves level 2 empty.
    AssemblyDef def("sparse", AssemblyType::fuel, 2, 1.26);
    def.set_rod(0, 0, 0u);
    def.set_rod(1, 1, 0u);
    DataEntry e;
    e.value = 1.0;
    def.add_pin_data(0, 0, "P", e);
    e.position.z = 1.0;
    def.add_pin_data(0, 0, "P", e);
    e.position.z = 0.0;
    def.add_pin_data(1, 1, "P", e);
    const auto idx = sparse.add_assembly_def(def);
    sparse.freeze();
    const AssemblyView sv(sparse, idx);
    ViewSpec spec;
    spec.kind = ViewKind::assembly_data;
    spec.feature = "P";
    spec.axial_level = 2;
    spec.scale = {0.0, 2.0, ScaleScope::selected_level};
    const auto svg = render_assembly(sv, spec);
    CHECK(count(svg, "fill=\"#808080\"") == 1);
    CHECK(svg.find("data-value=\"n/a\"") != std::string::npos);
  }

  TEST_CASE("rod cross-sections") {
    const Reactor r = samples::make_3a(2);
    const RodDef& fuel = r.rod_defs().front();
    const auto svg = render_rod(fuel, samples::kPwrRodHeight / 2);
    CHECK(count(svg, "class=\"ring\"") == 3);
    const auto outside = render_rod(fuel, samples::kPwrRodHeight + 10);
    CHECK(count(outside, "class=\"hollow\"") == 1);
    CHECK(outside.find("no material at z=") != std::string::npos);
    const auto overlay = render_rod(fuel, 10.0, RodOverlay{5.0, {0.0, 10.0, ScaleScope::selected_level}});
    CHECK(count(overlay, "class=\"data-ring\"") == 1);
    CHECK(overlay.find("#00ff00") != std::string::npos);
    RodDef empty;
    empty.name = "e";
    CHECK_THROWS_AS(render_rod(empty, 0.0), Error);
  }

  TEST_CASE("plots") {
    const std::vector<Series> s{{"a", {{0, 1}, {1, 2}}}, {"b", {{0, 3}}}};
    const auto svg = render_plot(s, "t", "x", "y");
    CHECK(count(svg, "class=\"series\"") == 2);
    CHECK(svg.find("data-name=\"b\"") != std::string::npos);
    const std::vector<Series> single{{"p", {{2.0, 5.0}}}};
    CHECK_NOTHROW(render_plot(single, "t", "x", "y"));
    CHECK_THROWS_AS(render_plot({}, "t", "x", "y"), Error);
    CHECK_THROWS_AS(render_plot({{"e", {}}}, "t", "x", "y"), Error);
    CHECK_THROWS_AS(render_plot({{"n", {{0, std::nan("")}}}}, "t", "x", "y"), Error);
    // Names are escaped.
    CHECK(render_plot({{"<&>", {{0, 1}}}}, "t", "x", "y").find("&lt;&amp;&gt;") !=
          std::string::npos);
  }

  TEST_CASE("renders are deterministic") {
    for (const auto& [name, make] : testing::svg_cases()) {
      CHECK_MESSAGE(make() == make(), name);
    }
  }

  TEST_CASE("renders match the checked-in goldens") {
    for (const auto& [name, make] : testing::svg_cases()) {
      const auto expected = testing::read_text(testing::golden_path(name));
      CHECK_MESSAGE(make() == expected, name);
    }
  }

  TEST_CASE("palettes") {
    CHECK(assembly_color(AssemblyType::fuel).hex() == "#2ca02c");
    CHECK(rod_color(RodKind::empty) == Rgb{255, 255, 255});
    CHECK(material_color({"Gas", Phase::gas}) == Rgb{255, 221, 0});
    CHECK(material_color({"UO2 3.1%", Phase::solid}).r > 200);
    CHECK(material_color({"Zircaloy-4", Phase::solid}).g > material_color({"Zircaloy-4", Phase::solid}).r);
  }
}
