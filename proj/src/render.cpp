#include "corelens/render.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace corelens {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kCanvasWidth = 800.0;
constexpr std::string_view kFont = "sans-serif";

// Fixed-point text with trailing zeros removed; never "-0".
std::string num(double v, int decimals = 3) {
  if (!std::isfinite(v)) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

// Compact value text for labels.
std::string short_value(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Box {
  double x0, y0, x1, y1;
  void include(double x, double y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
};

Box empty_box() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {inf, inf, -inf, -inf};
}

std::string open_svg(const Box& b) {
  const double w = b.x1 - b.x0;
  const double h = b.y1 - b.y0;
  const double px_h = w > 0 ? kCanvasWidth * h / w : kCanvasWidth;
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(kCanvasWidth, 0) + "\" height=\"" + num(px_h, 0) + "\" viewBox=\"" +
         num(b.x0) + " " + num(b.y0) + " " + num(w) + " " + num(h) +
         "\" font-family=\"" + std::string(kFont) + "\">\n";
}

std::string text(double x, double y, double size, std::string_view content,
                 std::string_view cls, std::string_view anchor = "middle") {
  return "<text class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
         "\" font-size=\"" + num(size) + "\" text-anchor=\"" + std::string(anchor) +
         "\" dominant-baseline=\"middle\">" + escape(content) + "</text>\n";
}

std::string hex_points(double radius) {
  std::string pts;
  for (int i = 0; i < 6; ++i) {
    const double a = i * 3.14159265358979323846 / 3.0;
    if (i) pts += ' ';
    pts += num(radius * std::cos(a)) + "," + num(radius * std::sin(a));
  }
  return pts;
}

// Flat-top hexagon centers for axial (q = col, r = row) coordinates with
// center-to-center distance `pitch`.
std::pair<double, double> hex_center(std::size_t row, std::size_t col, double pitch) {
  const double q = static_cast<double>(col);
  const double r = static_cast<double>(row);
  return {kSqrt3 / 2.0 * pitch * q, pitch * (r + q / 2.0)};
}

std::pair<double, double> square_center(std::size_t row, std::size_t col, double pitch) {
  return {(static_cast<double>(col) + 0.5) * pitch, (static_cast<double>(row) + 0.5) * pitch};
}

// Cells of a size x size rhombus that fall inside the centered hexagon.
bool inside_hexagon(std::size_t row, std::size_t col, std::size_t size) {
  if (size % 2 == 0) return true;
  const auto c = static_cast<long>(size / 2);
  const long dq = static_cast<long>(col) - c;
  const long dr = static_cast<long>(row) - c;
  return (std::labs(dq) + std::labs(dr) + std::labs(dq + dr)) / 2 <= c;
}

std::string translate(double x, double y) {
  return "transform=\"translate(" + num(x) + " " + num(y) + ")\"";
}

bool contains_any(const std::string& haystack, std::initializer_list<std::string_view> needles) {
  for (auto n : needles) {
    if (haystack.find(n) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Colors

std::string Rgb::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string_view to_string(ScaleScope s) {
  switch (s) {
    case ScaleScope::selected_level: return "selected_level";
    case ScaleScope::whole_assembly: return "whole_assembly";
    case ScaleScope::all_assemblies: return "all_assemblies";
  }
  return "?";
}

ScaleScope parse_scale_scope(std::string_view s) {
  for (auto v : {ScaleScope::selected_level, ScaleScope::whole_assembly,
                 ScaleScope::all_assemblies}) {
    if (to_string(v) == s) return v;
  }
  fail(ErrorCode::invalid_argument, "unknown normalization scope '" + std::string(s) + "'");
}

double hue_for(double value, const ColorScale& scale) {
  if (std::isnan(value)) return std::numeric_limits<double>::quiet_NaN();
  double t = 0.5;
  if (scale.max > scale.min) {
    t = std::clamp((value - scale.min) / (scale.max - scale.min), 0.0, 1.0);
  }
  return 240.0 * (1.0 - t);
}

Rgb hsl_to_rgb(double hue, double saturation, double lightness) {
  const double c = (1.0 - std::abs(2.0 * lightness - 1.0)) * saturation;
  const double hp = std::fmod(std::fmod(hue, 360.0) + 360.0, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c, g = x;
  } else if (hp < 2) {
    r = x, g = c;
  } else if (hp < 3) {
    g = c, b = x;
  } else if (hp < 4) {
    g = x, b = c;
  } else if (hp < 5) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = lightness - c / 2.0;
  auto to8 = [m](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v + m, 0.0, 1.0) * 255.0));
  };
  return {to8(r), to8(g), to8(b)};
}

Rgb color_for(double value, const ColorScale& scale) {
  if (std::isnan(value)) return kMissingGray;
  return hsl_to_rgb(hue_for(value, scale), 1.0, 0.5);
}

Rgb assembly_color(AssemblyType type) {
  switch (type) {
    case AssemblyType::fuel: return {44, 160, 44};
    case AssemblyType::control_bank:
    case AssemblyType::control: return {255, 215, 0};
    case AssemblyType::incore_instrument: return {148, 103, 189};
    case AssemblyType::rod_cluster: return {255, 127, 14};
    case AssemblyType::reflector: return {140, 140, 140};
    case AssemblyType::shield: return {107, 66, 38};
    case AssemblyType::test: return {23, 190, 207};
  }
  return {0, 0, 0};
}

Rgb rod_color(RodKind kind) {
  switch (kind) {
    case RodKind::fuel: return {214, 39, 40};
    case RodKind::control: return {31, 58, 147};
    case RodKind::poison: return {148, 103, 189};
    case RodKind::empty: return {255, 255, 255};
    case RodKind::reflector: return {127, 127, 127};
  }
  return {0, 0, 0};
}

Rgb material_color(const Material& material) {
  std::string name = material.name;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (material.phase == Phase::gas) return {255, 221, 0};
  if (contains_any(name, {"fuel", "uo2", "mox"})) return {214, 39, 40};
  if (contains_any(name, {"clad", "zirc", "zr", "ht9", "steel"})) return {44, 160, 44};
  return {150, 150, 150};
}

namespace {
constexpr Rgb kCoolant{158, 202, 225};
constexpr Rgb kEmptyCell{240, 240, 240};
constexpr std::array<Rgb, 8> kSeriesPalette{{{31, 119, 180},
                                             {214, 39, 40},
                                             {44, 160, 44},
                                             {255, 127, 14},
                                             {148, 103, 189},
                                             {140, 86, 75},
                                             {227, 119, 194},
                                             {23, 190, 207}}};
}  // namespace

// ---------------------------------------------------------------------------
// Data helpers

std::vector<double> axial_levels(const AssemblyView& view, std::string_view feature,
                                 double time) {
  std::set<double> zs;
  for (std::size_t r = 0; r < view.size(); ++r) {
    for (std::size_t c = 0; c < view.size(); ++c) {
      if (const auto* bucket = view.find_entries(r, c, feature, time)) {
        for (const auto& e : *bucket) zs.insert(e.position.z);
      }
    }
  }
  return {zs.begin(), zs.end()};
}

std::optional<double> level_value(const AssemblyView& view, std::size_t row,
                                  std::size_t col, std::string_view feature,
                                  double time, int level) {
  if (level < 1 || !view.has_feature(row, col, feature, time)) return std::nullopt;
  const auto series = axial_series(view, row, col, feature, time);
  if (static_cast<std::size_t>(level) > series.size()) return std::nullopt;
  return series[static_cast<std::size_t>(level) - 1].value;
}

ColorScale compute_scale(const AssemblyView& view, std::string_view feature,
                         double time, int level, ScaleScope scope) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto visit = [&](const AssemblyView& v, bool one_level) {
    for (std::size_t r = 0; r < v.size(); ++r) {
      for (std::size_t c = 0; c < v.size(); ++c) {
        if (!v.has_feature(r, c, feature, time)) continue;
        const auto series = axial_series(v, r, c, feature, time);
        for (std::size_t k = 0; k < series.size(); ++k) {
          if (one_level && static_cast<int>(k) + 1 != level) continue;
          const double x = series[k].value;
          if (std::isnan(x)) continue;
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
      }
    }
  };
  switch (scope) {
    case ScaleScope::selected_level: visit(view, true); break;
    case ScaleScope::whole_assembly: visit(view, false); break;
    case ScaleScope::all_assemblies:
      for (std::uint32_t i = 0; i < view.reactor().assembly_defs().size(); ++i) {
        visit(AssemblyView(view.reactor(), i), false);
      }
      break;
  }
  if (lo > hi) {
    fail(ErrorCode::not_found, "no '" + std::string(feature) + "' values for the " +
                                   std::string(to_string(scope)) + " scale");
  }
  return {lo, hi, scope};
}

// ---------------------------------------------------------------------------
// Core

std::string render_core(const Reactor& reactor, std::optional<AssemblyType> type,
                        std::optional<std::pair<std::size_t, std::size_t>> selected) {
  std::vector<AssemblyType> order;
  if (type) {
    reactor.grid(*type);
    order.push_back(*type);
  } else {
    for (const auto& [t, _] : reactor.grids()) order.push_back(t);
  }
  const std::size_t n = reactor.size();
  const double p = reactor.core_pitch();
  const bool hex = reactor.type() == ReactorType::sfr;
  const auto& labels = reactor.labels();
  if (selected && (selected->first >= n || selected->second >= n)) {
    fail(ErrorCode::invalid_argument, "selected core position out of range");
  }

  auto center = [&](std::size_t r, std::size_t c) {
    return hex ? hex_center(r, c, p) : square_center(r, c, p);
  };
  const std::string shape =
      hex ? "<polygon points=\"" + hex_points(0.95 * p / kSqrt3) + "\""
          : "<rect x=\"" + num(-0.47 * p) + "\" y=\"" + num(-0.47 * p) + "\" width=\"" +
                num(0.94 * p) + "\" height=\"" + num(0.94 * p) + "\"";

  Box box = empty_box();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const auto [x, y] = center(r, c);
      box.include(x - 0.6 * p, y - 0.6 * p);
      box.include(x + 0.6 * p, y + 0.6 * p);
    }
  }
  // Room for the row and column labels.
  box.include(box.x0 - 0.9 * p, box.y0 - 0.9 * p);

  std::string body;
  const double font = 0.35 * p;
  for (std::size_t c = 0; c < n; ++c) {
    const auto [x, y_top] = center(0, c);
    body += text(x, y_top - 0.85 * p, font, labels.columns[c], "col-label");
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto [x_left, y] = hex ? hex_center(r, 0, p) : center(r, 0);
    const double lx = hex ? x_left - 0.9 * p : x_left - 0.85 * p;
    const double ly = hex ? y - 0.5 * p : y;
    body += text(lx, ly, font, labels.rows[r], "row-label");
  }

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::optional<AssemblyType> drawn;
      std::optional<std::uint32_t> def;
      // Fuel sorts first among the grid types, so it is drawn on top.
      for (auto t : order) {
        if (auto idx = reactor.grid(t).at(r, c)) {
          drawn = t;
          def = idx;
          break;
        }
      }
      const auto [x, y] = center(r, c);
      const std::string label = cell_label(labels, r, c);
      if (!drawn) {
        if (hex && !inside_hexagon(r, c, n)) continue;
        body += "<g class=\"empty\" data-cell=\"" + escape(label) + "\" " + translate(x, y) +
                ">" + shape + " fill=\"" + kEmptyCell.hex() +
                "\" stroke=\"#bbbbbb\" stroke-width=\"" + num(0.02 * p) + "\"/></g>\n";
        continue;
      }
      body += "<g class=\"cell\" data-cell=\"" + escape(label) + "\" data-type=\"" +
              std::string(to_string(*drawn)) + "\" data-assembly=\"" +
              escape(reactor.assembly_defs()[*def].name()) + "\" " + translate(x, y) + ">" +
              shape + " fill=\"" + assembly_color(*drawn).hex() +
              "\" stroke=\"#333333\" stroke-width=\"" + num(0.02 * p) + "\"/></g>\n";
    }
  }
  if (selected) {
    const auto [x, y] = center(selected->first, selected->second);
    body += "<g class=\"selection\" " + translate(x, y) + ">" + shape +
            " fill=\"none\" stroke=\"#000000\" stroke-width=\"" + num(0.08 * p) + "\"/></g>\n";
  }

  return open_svg(box) + "<title>" + escape(reactor.name()) + " core (" +
         (type ? std::string(to_string(*type)) : std::string("all types")) + ")</title>\n" +
         body + "</svg>\n";
}

// ---------------------------------------------------------------------------
// Assembly

std::string render_assembly(const AssemblyView& view, const ViewSpec& spec) {
  if (spec.kind != ViewKind::assembly_geometry && spec.kind != ViewKind::assembly_data) {
    fail(ErrorCode::invalid_argument, "render_assembly needs an assembly view kind");
  }
  const bool data = spec.kind == ViewKind::assembly_data;
  const std::size_t n = view.size();
  const GridWindow win = spec.window.value_or(GridWindow{0, 0, n, n});
  if (win.rows == 0 || win.cols == 0 || win.row0 + win.rows > n || win.col0 + win.cols > n) {
    fail(ErrorCode::invalid_argument, "view window outside the assembly");
  }
  const double p = view.def().rod_pitch();
  const bool hex = view.reactor().type() == ReactorType::sfr;

  // Feature driving the axial levels: the requested one, else the first
  // feature stored on the assembly (geometry views only).
  std::string feature = spec.feature;
  const auto features = view.feature_names();
  if (data || !feature.empty()) {
    if (std::find(features.begin(), features.end(), feature) == features.end()) {
      fail(ErrorCode::not_found, "assembly '" + view.def().name() + "' has no feature '" +
                                     feature + "'");
    }
  } else if (!features.empty()) {
    feature = features.front();
  }
  const auto levels = feature.empty() ? std::vector<double>{}
                                      : axial_levels(view, feature, spec.time);
  double z = 0.0;
  if (!levels.empty()) {
    if (spec.axial_level < 1 || static_cast<std::size_t>(spec.axial_level) > levels.size()) {
      fail(ErrorCode::invalid_argument,
           "axial level " + std::to_string(spec.axial_level) + " outside 1.." +
               std::to_string(levels.size()));
    }
    z = levels[static_cast<std::size_t>(spec.axial_level) - 1];
  } else if (data) {
    fail(ErrorCode::not_found, "no '" + feature + "' data at the requested time");
  } else {
    // No data at all: cut through the middle of the first rod.
    for (std::size_t i = 0; i < n * n; ++i) {
      if (view.occupied(i / n, i % n)) {
        const auto& rod = view.rod(i / n, i % n);
        if (!rod.blocks.empty()) {
          z = 0.5 * (rod.blocks.front().z_start + rod.blocks.back().z_end);
        }
        break;
      }
    }
  }

  auto center = [&](std::size_t lr, std::size_t lc) {
    return hex ? hex_center(lr, lc, p) : square_center(lr, lc, p);
  };

  Box box = empty_box();
  for (std::size_t r = 0; r < win.rows; ++r) {
    for (std::size_t c = 0; c < win.cols; ++c) {
      const auto [x, y] = center(r, c);
      box.include(x - 0.55 * p, y - 0.55 * p);
      box.include(x + 0.55 * p, y + 0.55 * p);
    }
  }
  const Box cells_box = box;
  const double strip_x = cells_box.x1 + 0.5 * p;
  const double strip_w = 0.6 * p;
  box.include(strip_x + strip_w + 0.3 * p, cells_box.y1 + 0.9 * p);
  box.include(cells_box.x0 - 0.9 * p, cells_box.y0 - 0.9 * p);

  std::string body;
  if (!data) {
    body += "<rect class=\"coolant\" x=\"" + num(cells_box.x0) + "\" y=\"" + num(cells_box.y0) +
            "\" width=\"" + num(cells_box.x1 - cells_box.x0) + "\" height=\"" +
            num(cells_box.y1 - cells_box.y0) + "\" fill=\"" + kCoolant.hex() + "\"/>\n";
  }
  const double font = 0.35 * p;
  const auto& labels = view.labels();
  for (std::size_t c = 0; c < win.cols; ++c) {
    const auto [x, y] = center(0, c);
    body += text(x, y - 0.85 * p, font, labels.columns[win.col0 + c], "col-label");
  }
  for (std::size_t r = 0; r < win.rows; ++r) {
    const auto [x, y] = center(r, 0);
    body += text(x - 0.85 * p, hex ? y - 0.5 * p : y, font, labels.rows[win.row0 + r],
                 "row-label");
  }

  const std::string data_shape =
      hex ? "<polygon points=\"" + hex_points(0.95 * p / kSqrt3) + "\""
          : "<rect x=\"" + num(-0.48 * p) + "\" y=\"" + num(-0.48 * p) + "\" width=\"" +
                num(0.96 * p) + "\" height=\"" + num(0.96 * p) + "\"";

  for (std::size_t r = 0; r < win.rows; ++r) {
    for (std::size_t c = 0; c < win.cols; ++c) {
      const std::size_t gr = win.row0 + r;
      const std::size_t gc = win.col0 + c;
      if (!view.occupied(gr, gc)) continue;
      const auto [x, y] = center(r, c);
      const std::string head = "<g class=\"cell\" data-cell=\"" +
                               escape(cell_label(labels, gr, gc)) + "\" ";
      const RodDef& rod = view.rod(gr, gc);
      if (data) {
        const auto v = level_value(view, gr, gc, feature, spec.time, spec.axial_level);
        const double value = v.value_or(std::numeric_limits<double>::quiet_NaN());
        body += head + "data-value=\"" + short_value(value) + "\" " + translate(x, y) + ">" +
                data_shape + " fill=\"" + color_for(value, spec.scale).hex() +
                "\" stroke=\"#ffffff\" stroke-width=\"" + num(0.02 * p) + "\"/></g>\n";
      } else {
        double radius = 0.0;
        if (const auto* block = block_at(rod, z)) {
          for (const auto& ring : block->rings) radius = std::max(radius, ring.outer_radius);
        }
        if (radius <= 0.0) radius = rod.outer_radius();
        if (radius <= 0.0) radius = 0.4 * p;
        radius = std::min(radius, 0.5 * p);
        body += head + "data-kind=\"" + std::string(to_string(rod.kind)) + "\" " +
                translate(x, y) + "><circle r=\"" + num(radius) + "\" fill=\"" +
                rod_color(rod.kind).hex() + "\" stroke=\"#222222\" stroke-width=\"" +
                num(0.01 * p) + "\"/></g>\n";
      }
    }
  }

  // Axial strip: level 1 at the bottom, the selected level dark.
  const std::size_t nlevels = std::max<std::size_t>(levels.size(), 1);
  const double strip_h = cells_box.y1 - cells_box.y0;
  const double seg = strip_h / static_cast<double>(nlevels);
  body += "<g class=\"axial-strip\">\n";
  for (std::size_t k = 1; k <= nlevels; ++k) {
    const bool sel = levels.empty() || static_cast<int>(k) == spec.axial_level;
    body += "<rect class=\"axial-level\" data-level=\"" + std::to_string(k) + "\" x=\"" +
            num(strip_x) + "\" y=\"" + num(cells_box.y1 - static_cast<double>(k) * seg) +
            "\" width=\"" + num(strip_w) + "\" height=\"" + num(seg) + "\" fill=\"" +
            (sel ? "#333333" : "#dddddd") + "\" stroke=\"#ffffff\" stroke-width=\"" +
            num(std::min(0.01 * p, seg / 4)) + "\"/>\n";
  }
  body += "</g>\n";
  const double caption_y = cells_box.y1 + 0.5 * p;
  std::string caption = "level " + std::to_string(levels.empty() ? 1 : spec.axial_level) +
                        " z=" + short_value(z);
  if (data) {
    caption += " " + feature + " [" + short_value(spec.scale.min) + ", " +
               short_value(spec.scale.max) + "] " + std::string(to_string(spec.scale.scope));
  }
  body += text(cells_box.x0, caption_y, font, caption, "caption", "start");
  // Rough text extent so the caption is not clipped.
  box.include(cells_box.x0 + 0.6 * font * static_cast<double>(caption.size()), caption_y);

  return open_svg(box) + "<title>" + escape(view.def().name()) +
         (data ? " data" : " geometry") + "</title>\n" + body + "</svg>\n";
}

// ---------------------------------------------------------------------------
// Rod

std::string render_rod(const RodDef& rod, double z, std::optional<RodOverlay> overlay) {
  if (rod.blocks.empty()) fail(ErrorCode::invalid_argument, "rod '" + rod.name + "' has no blocks");
  double outer = rod.outer_radius();
  if (outer <= 0.0) outer = 1.0;
  const double extent = 1.6 * outer;
  Box box{-extent, -extent, extent, extent + 0.5 * outer};
  std::string body;
  const double font = 0.18 * outer;
  const MaterialBlock* block = block_at(rod, z);
  if (!block) {
    body += "<circle class=\"hollow\" r=\"" + num(outer) +
            "\" fill=\"none\" stroke=\"#555555\" stroke-dasharray=\"" + num(0.1 * outer) +
            "\" stroke-width=\"" + num(0.03 * outer) + "\"/>\n";
    body += text(0, extent + 0.1 * outer, font, "no material at z=" + short_value(z), "caption");
  } else {
    // Outermost first; a gap inside a ring is painted background again.
    for (std::size_t i = block->rings.size(); i-- > 0;) {
      const Ring& ring = block->rings[i];
      body += "<circle class=\"ring\" data-material=\"" + escape(ring.material.name) +
              "\" r=\"" + num(ring.outer_radius, 4) + "\" fill=\"" +
              material_color(ring.material).hex() + "\"/>\n";
      const double below = i == 0 ? 0.0 : block->rings[i - 1].outer_radius;
      if (ring.inner_radius > below) {
        body += "<circle class=\"gap\" r=\"" + num(ring.inner_radius, 4) +
                "\" fill=\"#ffffff\"/>\n";
      }
    }
    body += text(0, extent + 0.1 * outer, font,
                 rod.name + " z=" + short_value(z), "caption");
  }
  if (overlay) {
    const double r = 1.3 * outer;
    body += "<circle class=\"data-ring\" r=\"" + num(r, 4) + "\" fill=\"none\" stroke=\"" +
            color_for(overlay->value, overlay->scale).hex() + "\" stroke-width=\"" +
            num(0.2 * outer, 4) + "\"/>\n";
    body += text(0, -extent + 0.05 * outer, font, short_value(overlay->value), "value");
  }
  return open_svg(box) + "<title>" + escape(rod.name) + "</title>\n" + body + "</svg>\n";
}

// ---------------------------------------------------------------------------
// Plot

namespace {

struct Axis {
  double lo;
  double hi;
  double step;
  int decimals;
};

Axis make_axis(double lo, double hi) {
  if (hi <= lo) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step) + 1e-9)));
  return {lo, hi, step, decimals};
}

}  // namespace

std::string render_plot(const std::vector<Series>& series, std::string_view title,
                        std::string_view x_label, std::string_view y_label) {
  if (series.empty()) fail(ErrorCode::invalid_argument, "plot needs at least one series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.points.empty()) {
      fail(ErrorCode::invalid_argument, "series '" + s.name + "' is empty");
    }
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        fail(ErrorCode::invalid_argument, "series '" + s.name + "' has non-finite points");
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  const Axis xa = make_axis(xmin, xmax);
  const Axis ya = make_axis(ymin, ymax);

  constexpr double W = 640, H = 420, left = 80, right = 140, top = 40, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - xa.lo) / (xa.hi - xa.lo) * pw; };
  auto py = [&](double y) { return top + ph - (y - ya.lo) / (ya.hi - ya.lo) * ph; };

  std::string body;
  body += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + num(W) + "\" height=\"" +
          num(H) + "\" fill=\"#ffffff\"/>\n";
  body += "<rect class=\"frame\" x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" +
          num(pw) + "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#000000\"/>\n";

  auto ticks = [](const Axis& a) {
    std::vector<std::pair<double, std::string>> out;
    const auto first = static_cast<long long>(std::ceil(a.lo / a.step - 1e-9));
    const auto last = static_cast<long long>(std::floor(a.hi / a.step + 1e-9));
    for (long long i = first; i <= last; ++i) {
      const double v = static_cast<double>(i) * a.step;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f", a.decimals, v);
      std::string label(buf);
      if (label.find_first_not_of("-0.") == std::string::npos) label = num(0.0);
      out.emplace_back(v, label);
    }
    return out;
  };
  for (const auto& [v, label] : ticks(xa)) {
    const double x = px(v);
    body += "<line class=\"tick\" x1=\"" + num(x) + "\" y1=\"" + num(top + ph) + "\" x2=\"" +
            num(x) + "\" y2=\"" + num(top + ph + 5) + "\" stroke=\"#000000\"/>\n";
    body += text(x, top + ph + 16, 11, label, "tick-label");
  }
  for (const auto& [v, label] : ticks(ya)) {
    const double y = py(v);
    body += "<line class=\"grid\" x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" +
            num(left + pw) + "\" y2=\"" + num(y) + "\" stroke=\"#e0e0e0\"/>\n";
    body += text(left - 6, y, 11, label, "tick-label", "end");
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = kSeriesPalette[i % kSeriesPalette.size()].hex();
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!pts.empty()) pts += ' ';
      pts += num(px(x), 2) + "," + num(py(y), 2);
    }
    body += "<polyline class=\"series\" data-name=\"" + escape(s.name) + "\" points=\"" + pts +
            "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    const double ly = top + 10 + 18 * static_cast<double>(i);
    body += "<line class=\"legend-swatch\" x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly) +
            "\" x2=\"" + num(left + pw + 32) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
            "\" stroke-width=\"2\"/>\n";
    body += text(left + pw + 38, ly, 12, s.name, "legend", "start");
  }

  body += text(left + pw / 2, 20, 14, title, "title");
  body += text(left + pw / 2, H - 18, 12, x_label, "x-label");
  body += "<text class=\"y-label\" x=\"18\" y=\"" + num(top + ph / 2) +
          "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
          num(top + ph / 2) + ")\">" + escape(y_label) + "</text>\n";

  return open_svg(Box{0, 0, W, H}) + "<title>" + escape(title) + "</title>\n" + body +
         "</svg>\n";
}

}  // namespace corelens
