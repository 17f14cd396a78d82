#include "corelens/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

namespace corelens {

namespace {

constexpr std::array<std::string_view, 3> kPhaseNames{"gas", "liquid", "solid"};
constexpr std::array<std::string_view, 5> kRodKindNames{
    "fuel", "control", "poison", "empty", "reflector"};
constexpr std::array<std::string_view, 2> kReactorTypeNames{"PWR", "SFR"};
constexpr std::array<std::string_view, 8> kAssemblyTypeNames{
    "fuel",    "control_bank", "incore_instrument", "rod_cluster",
    "control", "reflector",    "shield",            "test"};

template <class Enum, std::size_t N>
Enum parse_enum(const std::array<std::string_view, N>& names, std::string_view s,
                std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  fail(ErrorCode::invalid_argument,
       "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

bool finite(double v) { return std::isfinite(v); }

void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace

std::string_view to_string(Phase p) { return kPhaseNames.at(static_cast<std::size_t>(p)); }
std::string_view to_string(RodKind k) { return kRodKindNames.at(static_cast<std::size_t>(k)); }
std::string_view to_string(ReactorType t) {
  return kReactorTypeNames.at(static_cast<std::size_t>(t));
}
std::string_view to_string(AssemblyType t) {
  return kAssemblyTypeNames.at(static_cast<std::size_t>(t));
}

Phase parse_phase(std::string_view s) {
  return parse_enum<Phase>(kPhaseNames, s, "phase");
}
RodKind parse_rod_kind(std::string_view s) {
  return parse_enum<RodKind>(kRodKindNames, s, "rod kind");
}
ReactorType parse_reactor_type(std::string_view s) {
  return parse_enum<ReactorType>(kReactorTypeNames, s, "reactor type");
}
AssemblyType parse_assembly_type(std::string_view s) {
  return parse_enum<AssemblyType>(kAssemblyTypeNames, s, "assembly type");
}

std::vector<AssemblyType> assembly_types_for(ReactorType t) {
  if (t == ReactorType::pwr) {
    return {AssemblyType::fuel, AssemblyType::control_bank,
            AssemblyType::incore_instrument, AssemblyType::rod_cluster};
  }
  return {AssemblyType::fuel, AssemblyType::control, AssemblyType::reflector,
          AssemblyType::shield, AssemblyType::test};
}

bool accepts(ReactorType reactor, AssemblyType assembly) {
  const auto types = assembly_types_for(reactor);
  return std::find(types.begin(), types.end(), assembly) != types.end();
}

// ---------------------------------------------------------------------------
// Labels

void GridLabels::validate(std::size_t size) const {
  require(rows.size() == size && columns.size() == size,
          ErrorCode::invalid_argument,
          "grid labels must have " + std::to_string(size) + " entries per axis");
  for (const auto* axis : {&rows, &columns}) {
    std::set<std::string_view> seen;
    for (const auto& label : *axis) {
      require(!label.empty(), ErrorCode::invalid_argument, "empty grid label");
      require(seen.insert(label).second, ErrorCode::invalid_argument,
              "duplicate grid label '" + label + "'");
    }
  }
}

std::optional<std::size_t> GridLabels::find_row(std::string_view label) const {
  auto it = std::find(rows.begin(), rows.end(), label);
  if (it == rows.end()) return std::nullopt;
  return static_cast<std::size_t>(it - rows.begin());
}

std::optional<std::size_t> GridLabels::find_column(std::string_view label) const {
  auto it = std::find(columns.begin(), columns.end(), label);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

GridLabels make_default_labels(std::size_t size) {
  require(size >= 1 && size <= 702, ErrorCode::invalid_argument,
          "default labels need 1 <= size <= 702, got " + std::to_string(size));
  GridLabels labels;
  labels.rows.reserve(size);
  labels.columns.reserve(size);
  for (std::size_t i = 1; i <= size; ++i) {
    std::string letters;
    for (std::size_t n = i; n > 0; n = (n - 1) / 26) {
      letters.insert(letters.begin(), static_cast<char>('A' + (n - 1) % 26));
    }
    labels.rows.push_back(std::move(letters));
    labels.columns.push_back(std::to_string(i));
  }
  return labels;
}

std::pair<std::size_t, std::size_t> parse_cell_label(const GridLabels& labels,
                                                     std::string_view label) {
  // Longest row label that prefixes the text wins, so "AA1" is not read as "A".
  std::optional<std::size_t> best_row;
  std::size_t best_len = 0;
  for (std::size_t r = 0; r < labels.rows.size(); ++r) {
    const auto& row = labels.rows[r];
    if (row.size() > best_len && row.size() < label.size() &&
        label.substr(0, row.size()) == row &&
        labels.find_column(label.substr(row.size()))) {
      best_row = r;
      best_len = row.size();
    }
  }
  if (!best_row) {
    fail(ErrorCode::not_found, "unknown pin label '" + std::string(label) + "'");
  }
  return {*best_row, *labels.find_column(label.substr(best_len))};
}

std::string cell_label(const GridLabels& labels, std::size_t row,
                       std::size_t col) {
  return labels.rows.at(row) + labels.columns.at(col);
}

// ---------------------------------------------------------------------------
// DataProvider

void DataProvider::add(const std::string& feature, const DataEntry& entry) {
  require(!feature.empty(), ErrorCode::invalid_argument,
          "feature name must be non-empty");
  require(finite(entry.time), ErrorCode::invalid_argument,
          "entry time must be finite");
  require(entry.uncertainty >= 0.0, ErrorCode::invalid_argument,
          "uncertainty must be >= 0");
  features_[feature][entry.time].push_back(entry);
}

bool DataProvider::has(std::string_view feature) const {
  return features_.find(feature) != features_.end();
}

bool DataProvider::has(std::string_view feature, double time) const {
  const auto* times = find(feature);
  return times && times->count(time) > 0;
}

const DataProvider::TimeMap* DataProvider::find(std::string_view feature) const {
  auto it = features_.find(feature);
  return it == features_.end() ? nullptr : &it->second;
}

std::vector<std::string> DataProvider::feature_names() const {
  std::vector<std::string> names;
  names.reserve(features_.size());
  for (const auto& [name, _] : features_) names.push_back(name);
  return names;
}

std::vector<double> DataProvider::times(std::string_view feature) const {
  std::vector<double> out;
  if (const auto* tm = find(feature)) {
    for (const auto& [t, _] : *tm) out.push_back(t);
  }
  return out;
}

const DataProvider::Bucket& DataProvider::entries(std::string_view feature,
                                                  double time) const {
  const auto* tm = find(feature);
  if (!tm) fail(ErrorCode::not_found, "no feature '" + std::string(feature) + "'");
  auto it = tm->find(time);
  if (it == tm->end()) {
    fail(ErrorCode::not_found, "feature '" + std::string(feature) +
                                   "' has no data at t=" + std::to_string(time));
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Rods

void Ring::validate() const {
  require(!material.name.empty(), ErrorCode::invalid_argument,
          "material name must be non-empty");
  require(finite(inner_radius) && finite(outer_radius) && finite(height),
          ErrorCode::invalid_argument, "ring dimensions must be finite");
  require(inner_radius >= 0.0 && inner_radius < outer_radius,
          ErrorCode::invalid_argument,
          "ring needs 0 <= inner_radius < outer_radius");
  require(height > 0.0, ErrorCode::invalid_argument, "ring height must be > 0");
}

void MaterialBlock::validate() const {
  require(finite(z_start) && finite(z_end) && z_start < z_end,
          ErrorCode::invalid_argument, "material block needs z_start < z_end");
  for (std::size_t i = 0; i < rings.size(); ++i) {
    rings[i].validate();
    if (i > 0) {
      require(rings[i - 1].outer_radius <= rings[i].inner_radius,
              ErrorCode::invalid_argument,
              "rings must be sorted and non-overlapping");
    }
  }
}

void RodDef::validate() const {
  require(!name.empty(), ErrorCode::invalid_argument, "rod name must be non-empty");
  if (pressure) {
    require(finite(*pressure), ErrorCode::invalid_argument,
            "rod pressure must be finite");
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].validate();
    if (i > 0) {
      require(blocks[i - 1].z_end <= blocks[i].z_start,
              ErrorCode::invalid_argument,
              "blocks of rod '" + name + "' must be sorted and non-overlapping");
    }
  }
}

double RodDef::height() const {
  if (blocks.empty()) return 0.0;
  double lo = blocks.front().z_start;
  double hi = blocks.front().z_end;
  for (const auto& b : blocks) {
    lo = std::min(lo, b.z_start);
    hi = std::max(hi, b.z_end);
  }
  return hi - lo;
}

double RodDef::outer_radius() const {
  double r = 0.0;
  for (const auto& b : blocks) {
    for (const auto& ring : b.rings) r = std::max(r, ring.outer_radius);
  }
  return r;
}

const MaterialBlock* block_at(const RodDef& rod, double z) {
  for (const auto& block : rod.blocks) {
    if (block.z_start <= z && z < block.z_end) return &block;
  }
  return nullptr;
}

std::optional<Ring> ring_at(const RodDef& rod, double z, double r) {
  const MaterialBlock* block = block_at(rod, z);
  if (!block) return std::nullopt;
  for (const auto& ring : block->rings) {
    if (ring.inner_radius <= r && r < ring.outer_radius) return ring;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// AssemblyDef

AssemblyDef::AssemblyDef(std::string name, AssemblyType type, std::size_t size,
                         double rod_pitch)
    : name_(std::move(name)),
      type_(type),
      rod_pitch_(rod_pitch),
      labels_(make_default_labels(size)),
      rods_(size),
      providers_(size) {
  require(!name_.empty(), ErrorCode::invalid_argument,
          "assembly name must be non-empty");
  require(finite(rod_pitch) && rod_pitch > 0.0, ErrorCode::invalid_argument,
          "rod pitch must be > 0");
}

void AssemblyDef::set_duct_thickness(std::optional<double> cm) {
  if (cm) {
    require(finite(*cm) && *cm >= 0.0, ErrorCode::invalid_argument,
            "duct thickness must be >= 0");
  }
  duct_ = cm;
}

void AssemblyDef::set_labels(GridLabels labels) {
  labels.validate(size());
  labels_ = std::move(labels);
}

void AssemblyDef::set_rod(std::size_t row, std::size_t col,
                          std::optional<std::uint32_t> rod_index) {
  if (!rod_index) {
    require(providers_.at(row, col).empty(), ErrorCode::invalid_argument,
            "cannot clear a rod position that carries data");
  }
  rods_.at(row, col) = rod_index;
}

void AssemblyDef::add_pin_data(std::size_t row, std::size_t col,
                               const std::string& feature,
                               const DataEntry& entry) {
  require(occupied(row, col), ErrorCode::invalid_argument,
          "pin data requires a rod at (" + std::to_string(row) + ", " +
              std::to_string(col) + ")");
  providers_.at(row, col).add(feature, entry);
}

// ---------------------------------------------------------------------------
// Reactor

Reactor::Reactor(std::string name, ReactorType type, std::size_t size)
    : name_(std::move(name)), type_(type), labels_(make_default_labels(size)) {
  require(!name_.empty(), ErrorCode::invalid_argument,
          "reactor name must be non-empty");
  for (auto t : assembly_types_for(type_)) grids_.emplace(t, AssemblyGrid(size));
}

void Reactor::ensure_mutable() const {
  if (frozen_) fail(ErrorCode::frozen, "reactor '" + name_ + "' is frozen");
}

void Reactor::set_assembly_pitch(double cm) {
  ensure_mutable();
  require(finite(cm) && cm > 0.0, ErrorCode::invalid_argument,
          "assembly pitch must be > 0");
  assembly_pitch_ = cm;
}

void Reactor::set_lattice_pitch(double cm) {
  ensure_mutable();
  require(finite(cm) && cm > 0.0, ErrorCode::invalid_argument,
          "lattice pitch must be > 0");
  lattice_pitch_ = cm;
}

void Reactor::set_flat_to_flat(double cm) {
  ensure_mutable();
  require(finite(cm) && cm > 0.0, ErrorCode::invalid_argument,
          "flat-to-flat distance must be > 0");
  flat_to_flat_ = cm;
}

void Reactor::set_labels(GridLabels labels) {
  ensure_mutable();
  labels.validate(size());
  labels_ = std::move(labels);
}

std::uint32_t Reactor::add_unit(std::string_view name) {
  if (auto id = find_unit(name)) return *id;
  ensure_mutable();
  require(!name.empty(), ErrorCode::invalid_argument, "unit name must be non-empty");
  units_.emplace_back(name);
  return static_cast<std::uint32_t>(units_.size() - 1);
}

std::optional<std::uint32_t> Reactor::find_unit(std::string_view name) const {
  auto it = std::find(units_.begin(), units_.end(), name);
  if (it == units_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - units_.begin());
}

std::uint32_t Reactor::add_rod_def(RodDef def) {
  ensure_mutable();
  def.validate();
  for (const auto& existing : rod_defs_) {
    require(existing.name != def.name, ErrorCode::conflict,
            "duplicate rod definition '" + def.name + "'");
  }
  rod_defs_.push_back(std::move(def));
  return static_cast<std::uint32_t>(rod_defs_.size() - 1);
}

std::uint32_t Reactor::add_assembly_def(AssemblyDef def) {
  ensure_mutable();
  require(accepts(type_, def.type()), ErrorCode::type_error,
          "assembly type '" + std::string(to_string(def.type())) +
              "' is not valid in a " + std::string(to_string(type_)));
  require(type_ == ReactorType::sfr || !def.duct_thickness(),
          ErrorCode::invalid_argument, "duct thickness applies to SFR assemblies only");
  for (const auto& cell : def.rod_grid().cells()) {
    require(!cell || *cell < rod_defs_.size(), ErrorCode::invalid_argument,
            "assembly '" + def.name() + "' references unknown rod definition");
  }
  assembly_defs_.push_back(std::move(def));
  return static_cast<std::uint32_t>(assembly_defs_.size() - 1);
}

AssemblyDef& Reactor::assembly_def(std::uint32_t index) {
  ensure_mutable();
  require(index < assembly_defs_.size(), ErrorCode::invalid_argument,
          "assembly definition index out of range");
  return assembly_defs_[index];
}

const AssemblyDef& Reactor::assembly_def(std::uint32_t index) const {
  require(index < assembly_defs_.size(), ErrorCode::not_found,
          "assembly definition index out of range");
  return assembly_defs_[index];
}

void Reactor::set_assembly(AssemblyType type, std::size_t row, std::size_t col,
                           std::optional<std::uint32_t> def_index) {
  ensure_mutable();
  require(row < size() && col < size(), ErrorCode::invalid_argument,
          "core position (" + std::to_string(row) + ", " + std::to_string(col) +
              ") out of range");
  auto it = grids_.find(type);
  require(it != grids_.end(), ErrorCode::type_error,
          "assembly type '" + std::string(to_string(type)) + "' is not valid in a " +
              std::string(to_string(type_)));
  if (def_index) {
    require(*def_index < assembly_defs_.size(), ErrorCode::invalid_argument,
            "assembly definition index out of range");
    require(assembly_defs_[*def_index].type() == type, ErrorCode::type_error,
            "assembly definition '" + assembly_defs_[*def_index].name() +
                "' is not of type " + std::string(to_string(type)));
  }
  it->second.at(row, col) = def_index;
}

std::optional<std::uint32_t> Reactor::assembly_at(AssemblyType type,
                                                  std::size_t row,
                                                  std::size_t col) const {
  return grid(type).at(row, col);
}

const AssemblyGrid& Reactor::grid(AssemblyType type) const {
  auto it = grids_.find(type);
  if (it == grids_.end()) {
    fail(ErrorCode::not_found, "no " + std::string(to_string(type)) +
                                   " grid in a " + std::string(to_string(type_)));
  }
  return it->second;
}

Reactor Reactor::thawed() const {
  Reactor copy = *this;
  copy.frozen_ = false;
  return copy;
}

DataProvider& Reactor::data() {
  ensure_mutable();
  return data_;
}

namespace {

void check_units(const DataProvider& provider, std::size_t unit_count,
                 const std::string& where) {
  for (const auto& [feature, times] : provider.features()) {
    for (const auto& [t, bucket] : times) {
      for (const auto& e : bucket) {
        require(e.units_id < unit_count, ErrorCode::invalid_argument,
                "units id " + std::to_string(e.units_id) + " of feature '" +
                    feature + "' on " + where + " is not in the units table");
        require(e.time == t && e.uncertainty >= 0.0, ErrorCode::invalid_argument,
                "malformed entry for feature '" + feature + "' on " + where);
      }
    }
  }
}

}  // namespace

void Reactor::validate() const {
  labels_.validate(size());
  {
    std::set<std::string_view> seen;
    for (const auto& u : units_) {
      require(!u.empty() && seen.insert(u).second, ErrorCode::invalid_argument,
              "units table entries must be unique and non-empty");
    }
  }
  const std::size_t nunits = units_.size();
  check_units(data_, nunits, "reactor '" + name_ + "'");

  std::set<std::string_view> rod_names;
  for (const auto& rod : rod_defs_) {
    rod.validate();
    require(rod_names.insert(rod.name).second, ErrorCode::conflict,
            "duplicate rod definition '" + rod.name + "'");
    check_units(rod.data, nunits, "rod '" + rod.name + "'");
    for (const auto& block : rod.blocks) {
      check_units(block.data, nunits, "rod '" + rod.name + "'");
      for (const auto& ring : block.rings) {
        check_units(ring.data, nunits, "rod '" + rod.name + "'");
      }
    }
  }

  for (const auto& def : assembly_defs_) {
    require(accepts(type_, def.type()), ErrorCode::type_error,
            "assembly type not valid for this reactor");
    def.labels().validate(def.size());
    check_units(def.data(), nunits, "assembly '" + def.name() + "'");
    const auto& rods = def.rod_grid().cells();
    const auto& providers = def.provider_grid().cells();
    for (std::size_t i = 0; i < rods.size(); ++i) {
      require(!rods[i] || *rods[i] < rod_defs_.size(), ErrorCode::invalid_argument,
              "assembly '" + def.name() + "' references unknown rod definition");
      require(rods[i] || providers[i].empty(), ErrorCode::invalid_argument,
              "assembly '" + def.name() + "' has data at an empty rod position");
      check_units(providers[i], nunits, "assembly '" + def.name() + "'");
    }
  }

  for (const auto& [type, grid] : grids_) {
    require(grid.size() == size(), ErrorCode::invalid_argument,
            "assembly grid size mismatch");
    for (const auto& cell : grid.cells()) {
      if (!cell) continue;
      require(*cell < assembly_defs_.size(), ErrorCode::invalid_argument,
              "core grid references unknown assembly definition");
      require(assembly_defs_[*cell].type() == type, ErrorCode::type_error,
              "core grid holds an assembly of the wrong type");
    }
  }
}

void Reactor::freeze() {
  if (frozen_) return;
  validate();
  frozen_ = true;
}

bool Reactor::operator==(const Reactor& o) const {
  return name_ == o.name_ && type_ == o.type_ &&
         assembly_pitch_ == o.assembly_pitch_ &&
         lattice_pitch_ == o.lattice_pitch_ && flat_to_flat_ == o.flat_to_flat_ &&
         labels_ == o.labels_ && units_ == o.units_ && rod_defs_ == o.rod_defs_ &&
         assembly_defs_ == o.assembly_defs_ && grids_ == o.grids_ &&
         data_ == o.data_;
}

// ---------------------------------------------------------------------------
// Views and queries

AssemblyView::AssemblyView(const Reactor& reactor, std::uint32_t def_index)
    : reactor_(&reactor), def_(&reactor.assembly_def(def_index)), index_(def_index) {}

const RodDef& AssemblyView::rod(std::size_t row, std::size_t col) const {
  const auto idx = def_->rod_at(row, col);
  if (!idx) {
    fail(ErrorCode::not_found, "no rod at " + cell_label(labels(), row, col));
  }
  return reactor_->rod_defs().at(*idx);
}

const DataProvider::Bucket* AssemblyView::find_entries(std::size_t row,
                                                       std::size_t col,
                                                       std::string_view feature,
                                                       double time) const {
  if (!occupied(row, col)) return nullptr;
  // Assembly-level storage wins on a feature-name collision, for all times.
  const auto& cell = def_->pin_data(row, col);
  const DataProvider::TimeMap* times = cell.find(feature);
  if (!times) times = rod(row, col).data.find(feature);
  if (!times) return nullptr;
  auto it = times->find(time);
  return it == times->end() ? nullptr : &it->second;
}

std::vector<std::string> AssemblyView::feature_names() const {
  std::set<std::string> names;
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t c = 0; c < size(); ++c) {
      if (!occupied(r, c)) continue;
      for (const auto& [n, _] : def_->pin_data(r, c).features()) names.insert(n);
      for (const auto& [n, _] : rod(r, c).data.features()) names.insert(n);
    }
  }
  return {names.begin(), names.end()};
}

std::vector<double> AssemblyView::times(std::string_view feature) const {
  std::set<double> out;
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t c = 0; c < size(); ++c) {
      if (!occupied(r, c)) continue;
      const DataProvider::TimeMap* tm = def_->pin_data(r, c).find(feature);
      if (!tm) tm = rod(r, c).data.find(feature);
      if (!tm) continue;
      for (const auto& [t, _] : *tm) out.insert(t);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<AxialPoint> axial_series(const AssemblyView& view, std::size_t row,
                                     std::size_t col, std::string_view feature,
                                     double time) {
  if (!view.occupied(row, col)) {
    fail(ErrorCode::not_found,
         "no rod at " + cell_label(view.labels(), row, col));
  }
  const auto* bucket = view.find_entries(row, col, feature, time);
  if (!bucket) {
    fail(ErrorCode::not_found, "pin " + cell_label(view.labels(), row, col) +
                                   " has no '" + std::string(feature) +
                                   "' data at t=" + std::to_string(time));
  }
  std::vector<AxialPoint> out;
  out.reserve(bucket->size());
  for (const auto& e : *bucket) {
    out.push_back({e.position.z, e.value, e.uncertainty});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AxialPoint& a, const AxialPoint& b) { return a.z < b.z; });
  return out;
}

}  // namespace corelens
