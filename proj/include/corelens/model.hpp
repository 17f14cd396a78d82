#pragma once

// In-memory reactor Parts: reactors hold shared rod and assembly definitions
// that lattice grids reference by index. Any Part can carry a DataProvider.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corelens/error.hpp"

namespace corelens {

enum class Phase : std::uint8_t { gas, liquid, solid };
enum class RodKind : std::uint8_t { fuel, control, poison, empty, reflector };
enum class ReactorType : std::uint8_t { pwr, sfr };

// PWR assemblies use fuel, control_bank, incore_instrument and rod_cluster;
// SFR assemblies use fuel, control, reflector, shield and test.
enum class AssemblyType : std::uint8_t {
  fuel,
  control_bank,
  incore_instrument,
  rod_cluster,
  control,
  reflector,
  shield,
  test,
};

std::string_view to_string(Phase p);
std::string_view to_string(RodKind k);
std::string_view to_string(ReactorType t);
std::string_view to_string(AssemblyType t);

// Parsers throw invalid-argument on unknown names.
Phase parse_phase(std::string_view s);
RodKind parse_rod_kind(std::string_view s);
ReactorType parse_reactor_type(std::string_view s);
AssemblyType parse_assembly_type(std::string_view s);

/// Assembly types a reactor of the given type accepts, in declaration order.
std::vector<AssemblyType> assembly_types_for(ReactorType t);
bool accepts(ReactorType reactor, AssemblyType assembly);

/// Square size x size array addressed by (row, col). Hex lattices use the
/// same storage as a rhombus in axial coordinates (row = r, col = q).
template <class T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::size_t size, const T& fill = T{})
      : size_(size), cells_(size * size, fill) {}

  std::size_t size() const noexcept { return size_; }

  const T& at(std::size_t row, std::size_t col) const {
    check(row, col);
    return cells_[row * size_ + col];
  }
  T& at(std::size_t row, std::size_t col) {
    check(row, col);
    return cells_[row * size_ + col];
  }

  // Row-major cell storage.
  const std::vector<T>& cells() const noexcept { return cells_; }
  std::vector<T>& cells() noexcept { return cells_; }

  bool operator==(const Grid&) const = default;

 private:
  void check(std::size_t row, std::size_t col) const {
    if (row >= size_ || col >= size_) {
      fail(ErrorCode::invalid_argument,
           "grid position (" + std::to_string(row) + ", " +
               std::to_string(col) + ") outside " + std::to_string(size_) +
               "x" + std::to_string(size_) + " grid");
    }
  }

  std::size_t size_ = 0;
  std::vector<T> cells_;
};

struct GridLabels {
  std::vector<std::string> rows;
  std::vector<std::string> columns;

  bool operator==(const GridLabels&) const = default;

  /// Throws invalid-argument unless both axes have `size` unique entries.
  void validate(std::size_t size) const;

  std::optional<std::size_t> find_row(std::string_view label) const;
  std::optional<std::size_t> find_column(std::string_view label) const;
};

/// Rows A, B, ..., Z, AA, ... (bijective base 26); columns "1".."size".
GridLabels make_default_labels(std::size_t size);

/// Splits a pin label such as "H7" or "AB12" into grid (row, col) using the
/// given labels. Throws not-found when either part is unknown.
std::pair<std::size_t, std::size_t> parse_cell_label(const GridLabels& labels,
                                                     std::string_view label);
std::string cell_label(const GridLabels& labels, std::size_t row,
                       std::size_t col);

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Position&) const = default;
};

/// One state-point value. Uncertainty 0.0 means "not reported".
struct DataEntry {
  double value = 0.0;
  double uncertainty = 0.0;
  std::uint32_t units_id = 0;
  Position position;
  double time = 0.0;

  bool operator==(const DataEntry&) const = default;
};

/// Feature-tagged container of timed entries. Entries within one
/// (feature, time) bucket keep insertion order.
class DataProvider {
 public:
  using Bucket = std::vector<DataEntry>;
  using TimeMap = std::map<double, Bucket>;

  void add(const std::string& feature, const DataEntry& entry);

  bool empty() const noexcept { return features_.empty(); }
  bool has(std::string_view feature) const;
  bool has(std::string_view feature, double time) const;

  std::vector<std::string> feature_names() const;
  std::vector<double> times(std::string_view feature) const;

  /// Throws not-found for an unknown feature or time.
  const Bucket& entries(std::string_view feature, double time) const;
  const TimeMap* find(std::string_view feature) const;

  const std::map<std::string, TimeMap, std::less<>>& features() const noexcept {
    return features_;
  }

  bool operator==(const DataProvider&) const = default;

 private:
  std::map<std::string, TimeMap, std::less<>> features_;
};

struct Material {
  std::string name;
  Phase phase = Phase::solid;

  bool operator==(const Material&) const = default;
};

/// Annulus of one material, radii and height in cm.
struct Ring {
  Material material;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  double height = 0.0;
  DataProvider data;

  bool operator==(const Ring&) const = default;
  void validate() const;
};

/// Axial segment [z_start, z_end) of a rod made of concentric rings.
struct MaterialBlock {
  double z_start = 0.0;
  double z_end = 0.0;
  std::vector<Ring> rings;
  DataProvider data;

  bool operator==(const MaterialBlock&) const = default;
  void validate() const;
};

struct RodDef {
  std::string name;
  RodKind kind = RodKind::fuel;
  std::vector<MaterialBlock> blocks;
  std::optional<double> pressure;  // MPa
  DataProvider data;

  bool operator==(const RodDef&) const = default;
  void validate() const;

  /// max z_end - min z_start, or 0 for a rod without blocks.
  double height() const;
  double outer_radius() const;
};

/// The block containing z (z_start <= z < z_end), if any.
const MaterialBlock* block_at(const RodDef& rod, double z);
/// The ring of the block containing z with inner <= r < outer, if any.
std::optional<Ring> ring_at(const RodDef& rod, double z, double r);

class AssemblyDef {
 public:
  AssemblyDef(std::string name, AssemblyType type, std::size_t size,
              double rod_pitch);

  const std::string& name() const noexcept { return name_; }
  AssemblyType type() const noexcept { return type_; }
  std::size_t size() const noexcept { return rods_.size(); }
  double rod_pitch() const noexcept { return rod_pitch_; }

  std::optional<double> duct_thickness() const noexcept { return duct_; }
  void set_duct_thickness(std::optional<double> cm);

  const GridLabels& labels() const noexcept { return labels_; }
  void set_labels(GridLabels labels);

  void set_rod(std::size_t row, std::size_t col,
               std::optional<std::uint32_t> rod_index);
  std::optional<std::uint32_t> rod_at(std::size_t row, std::size_t col) const {
    return rods_.at(row, col);
  }
  bool occupied(std::size_t row, std::size_t col) const {
    return rods_.at(row, col).has_value();
  }
  const Grid<std::optional<std::uint32_t>>& rod_grid() const noexcept {
    return rods_;
  }

  /// Stores state-point data for the rod at (row, col); the cell must hold a
  /// rod.
  void add_pin_data(std::size_t row, std::size_t col, const std::string& feature,
                    const DataEntry& entry);
  const DataProvider& pin_data(std::size_t row, std::size_t col) const {
    return providers_.at(row, col);
  }
  const Grid<DataProvider>& provider_grid() const noexcept { return providers_; }

  // Data attached to the assembly as a whole.
  DataProvider& data() noexcept { return data_; }
  const DataProvider& data() const noexcept { return data_; }

  bool operator==(const AssemblyDef&) const = default;

 private:
  std::string name_;
  AssemblyType type_;
  double rod_pitch_;
  std::optional<double> duct_;
  GridLabels labels_;
  Grid<std::optional<std::uint32_t>> rods_;
  Grid<DataProvider> providers_;
  DataProvider data_;
};

using AssemblyGrid = Grid<std::optional<std::uint32_t>>;

/// Root of the Part hierarchy. Mutable while being built; `freeze()` checks
/// every cross-reference and locks the object.
class Reactor {
 public:
  Reactor(std::string name, ReactorType type, std::size_t size);

  const std::string& name() const noexcept { return name_; }
  ReactorType type() const noexcept { return type_; }
  std::size_t size() const noexcept { return labels_.rows.size(); }

  double assembly_pitch() const noexcept { return assembly_pitch_; }
  double lattice_pitch() const noexcept { return lattice_pitch_; }
  double flat_to_flat() const noexcept { return flat_to_flat_; }
  void set_assembly_pitch(double cm);
  void set_lattice_pitch(double cm);
  void set_flat_to_flat(double cm);

  /// Center-to-center assembly spacing for drawing: assembly pitch for PWRs,
  /// lattice pitch for SFRs.
  double core_pitch() const noexcept {
    return type_ == ReactorType::pwr ? assembly_pitch_ : lattice_pitch_;
  }

  const GridLabels& labels() const noexcept { return labels_; }
  void set_labels(GridLabels labels);

  const std::vector<std::string>& units() const noexcept { return units_; }
  /// Index of `name` in the units table, appending it when new.
  std::uint32_t add_unit(std::string_view name);
  std::optional<std::uint32_t> find_unit(std::string_view name) const;

  const std::vector<RodDef>& rod_defs() const noexcept { return rod_defs_; }
  std::uint32_t add_rod_def(RodDef def);

  const std::vector<AssemblyDef>& assembly_defs() const noexcept {
    return assembly_defs_;
  }
  std::uint32_t add_assembly_def(AssemblyDef def);
  AssemblyDef& assembly_def(std::uint32_t index);
  const AssemblyDef& assembly_def(std::uint32_t index) const;

  /// Places (or clears, with nullopt) an assembly definition in the grid of
  /// its type. Grids of other types are untouched.
  void set_assembly(AssemblyType type, std::size_t row, std::size_t col,
                    std::optional<std::uint32_t> def_index);
  std::optional<std::uint32_t> assembly_at(AssemblyType type, std::size_t row,
                                           std::size_t col) const;
  const AssemblyGrid& grid(AssemblyType type) const;
  const std::map<AssemblyType, AssemblyGrid>& grids() const noexcept {
    return grids_;
  }

  DataProvider& data();
  const DataProvider& data() const noexcept { return data_; }

  /// Validates all invariants and makes the reactor read-only.
  void freeze();
  bool frozen() const noexcept { return frozen_; }
  /// Mutable deep copy, e.g. to add data to a loaded reactor.
  Reactor thawed() const;
  /// Throws on the first violated invariant without freezing.
  void validate() const;

  // Deep equality over content; the frozen flag is not compared.
  bool operator==(const Reactor& other) const;

 private:
  void ensure_mutable() const;

  std::string name_;
  ReactorType type_;
  double assembly_pitch_ = 21.5;
  double lattice_pitch_ = 14.0;
  double flat_to_flat_ = 13.6;
  GridLabels labels_;
  std::vector<std::string> units_;
  std::vector<RodDef> rod_defs_;
  std::vector<AssemblyDef> assembly_defs_;
  std::map<AssemblyType, AssemblyGrid> grids_;
  DataProvider data_;
  bool frozen_ = false;
};

/// Axial sample of one rod: height, value and uncertainty.
struct AxialPoint {
  double z = 0.0;
  double value = 0.0;
  double uncertainty = 0.0;

  bool operator==(const AxialPoint&) const = default;
};

/// Read access to a placed assembly definition together with the reactor that
/// owns its rod definitions. This is what analysis tools receive.
class AssemblyView {
 public:
  AssemblyView(const Reactor& reactor, std::uint32_t def_index);

  const Reactor& reactor() const noexcept { return *reactor_; }
  const AssemblyDef& def() const noexcept { return *def_; }
  std::uint32_t def_index() const noexcept { return index_; }
  std::size_t size() const noexcept { return def_->size(); }
  const GridLabels& labels() const noexcept { return def_->labels(); }

  bool occupied(std::size_t row, std::size_t col) const {
    return def_->occupied(row, col);
  }
  /// Throws not-found for an empty position.
  const RodDef& rod(std::size_t row, std::size_t col) const;

  /// Bucket for (feature, time) at a rod, looking first at the assembly's
  /// provider for that cell, then at the rod definition's own provider.
  /// Returns nullptr when neither has it.
  const DataProvider::Bucket* find_entries(std::size_t row, std::size_t col,
                                           std::string_view feature,
                                           double time) const;
  bool has_feature(std::size_t row, std::size_t col, std::string_view feature,
                   double time) const {
    return find_entries(row, col, feature, time) != nullptr;
  }

  /// Union of feature names over every occupied cell (sorted).
  std::vector<std::string> feature_names() const;
  /// Union of times for a feature over every occupied cell (sorted).
  std::vector<double> times(std::string_view feature) const;

 private:
  const Reactor* reactor_;
  const AssemblyDef* def_;
  std::uint32_t index_;
};

/// Entries of (feature, time) at a rod sorted ascending by z.
/// Throws not-found for an empty position or missing feature/time.
std::vector<AxialPoint> axial_series(const AssemblyView& view, std::size_t row,
                                     std::size_t col, std::string_view feature,
                                     double time);

}  // namespace corelens
