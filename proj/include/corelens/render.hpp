#pragma once

// Deterministic SVG views of cores, assemblies, rods and line plots.
// All functions are pure: identical input gives byte-identical output.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corelens/analysis.hpp"
#include "corelens/model.hpp"

namespace corelens {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
  std::string hex() const;  // "#rrggbb"
};

enum class ScaleScope { selected_level, whole_assembly, all_assemblies };
std::string_view to_string(ScaleScope s);
ScaleScope parse_scale_scope(std::string_view s);

struct ColorScale {
  double min = 0.0;
  double max = 1.0;
  ScaleScope scope = ScaleScope::selected_level;

  bool operator==(const ColorScale&) const = default;
};

/// Hue in degrees: 240 (blue) at min down to 0 (red) at max; 120 when
/// min == max; NaN for a NaN value.
double hue_for(double value, const ColorScale& scale);
/// HSL(hue_for(value), 1, 0.5) as RGB; NaN values map to 50% gray.
Rgb color_for(double value, const ColorScale& scale);
Rgb hsl_to_rgb(double hue, double saturation, double lightness);

inline constexpr Rgb kMissingGray{128, 128, 128};

enum class ViewKind {
  core,
  assembly_geometry,
  assembly_data,
  rod_geometry,
  rod_data,
  axial_plot,
  diff_plot,
};

/// Sub-rectangle of an assembly grid, e.g. a quarter assembly.
struct GridWindow {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct ViewSpec {
  ViewKind kind = ViewKind::assembly_geometry;
  int axial_level = 1;  // 1-based, bottom level first
  std::string feature;
  double time = 0.0;
  ColorScale scale;
  std::optional<GridWindow> window;
};

/// Sorted distinct z of a feature over all pins of the assembly.
std::vector<double> axial_levels(const AssemblyView& view, std::string_view feature,
                                 double time);

/// Value of the pin at 1-based axial `level`, if the pin has that many.
std::optional<double> level_value(const AssemblyView& view, std::size_t row,
                                  std::size_t col, std::string_view feature,
                                  double time, int level);

/// Min/max over the scope's population: this level of this assembly, all
/// levels of this assembly, or all levels of every assembly definition in
/// the reactor carrying the feature. Throws not-found without data.
ColorScale compute_scale(const AssemblyView& view, std::string_view feature,
                         double time, int level, ScaleScope scope);

/// Core map. With a type, only that type's grid is drawn; without one every
/// grid is composited (fuel on top). Throws not-found for a type the reactor
/// has no grid for.
std::string render_core(const Reactor& reactor, std::optional<AssemblyType> type,
                        std::optional<std::pair<std::size_t, std::size_t>> selected = {});

std::string render_assembly(const AssemblyView& view, const ViewSpec& spec);

struct RodOverlay {
  double value = 0.0;
  ColorScale scale;
};

/// Cross-section of a rod at height z; with an overlay, also a colored data
/// ring and the numeric value.
std::string render_rod(const RodDef& rod, double z,
                       std::optional<RodOverlay> overlay = std::nullopt);

/// Multi-series line plot. Throws invalid-argument for no series, an empty
/// series or non-finite points.
std::string render_plot(const std::vector<Series>& series, std::string_view title,
                        std::string_view x_label, std::string_view y_label);

/// Palette lookups shared by the views.
Rgb assembly_color(AssemblyType type);
Rgb rod_color(RodKind kind);
Rgb material_color(const Material& material);

}  // namespace corelens
