#include "corelens/layout.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace corelens {

using nrdf::Array;
using nrdf::Builder;
using nrdf::ElementType;
using nrdf::Node;
using nrdf::NodeView;

namespace {

[[noreturn]] void corrupt(const std::string& msg) {
  throw Error(ErrorCode::corrupt_file, "invalid reactor layout: " + msg);
}

template <class T>
std::span<const T> as_span(const std::vector<T>& v) {
  return {v.data(), v.size()};
}

// Flattened (feature, time) bucket ready to be written as parallel arrays.
struct Columns {
  std::vector<std::uint32_t> cell;
  std::vector<double> value;
  std::vector<double> uncertainty;
  std::vector<std::uint32_t> units;
  std::vector<double> position;

  void push(const DataEntry& e) {
    value.push_back(e.value);
    uncertainty.push_back(e.uncertainty);
    units.push_back(e.units_id);
    position.push_back(e.position.x);
    position.push_back(e.position.y);
    position.push_back(e.position.z);
  }
};

using FeatureColumns = std::map<std::string, std::map<double, Columns>>;

void emit_features(Builder& b, Node& parent, std::string_view node_name,
                   const FeatureColumns& features, bool with_cells) {
  if (features.empty()) return;
  Node holder = b.node(node_name);
  for (const auto& [feature, times] : features) {
    Node fnode = b.node(feature);
    std::vector<double> tvals;
    tvals.reserve(times.size());
    for (const auto& [t, _] : times) tvals.push_back(t);
    b.array<double>(fnode, "times", {tvals.size()}, as_span(tvals));
    std::size_t k = 0;
    for (const auto& [t, cols] : times) {
      Node tnode = b.node("t" + std::to_string(k++));
      const std::uint64_t n = cols.value.size();
      if (with_cells) b.array<std::uint32_t>(tnode, "cell", {n}, as_span(cols.cell));
      b.array<double>(tnode, "value", {n}, as_span(cols.value));
      b.array<double>(tnode, "uncertainty", {n}, as_span(cols.uncertainty));
      b.array<std::uint32_t>(tnode, "units_id", {n}, as_span(cols.units));
      b.array<double>(tnode, "position", {n, 3}, as_span(cols.position));
      fnode.children.push_back(std::move(tnode));
    }
    holder.children.push_back(std::move(fnode));
  }
  parent.children.push_back(std::move(holder));
}

void emit_provider(Builder& b, Node& parent, const DataProvider& p) {
  FeatureColumns features;
  for (const auto& [feature, times] : p.features()) {
    auto& slot = features[feature];
    for (const auto& [t, bucket] : times) {
      auto& cols = slot[t];
      for (const auto& e : bucket) cols.push(e);
    }
  }
  emit_features(b, parent, "data", features, false);
}

void emit_labels(Builder& b, Node& parent, const GridLabels& labels) {
  Node n = b.node("labels");
  std::vector<std::uint32_t> rows;
  std::vector<std::uint32_t> cols;
  for (const auto& r : labels.rows) rows.push_back(b.intern(r));
  for (const auto& c : labels.columns) cols.push_back(b.intern(c));
  b.array<std::uint32_t>(n, "rows", {rows.size()}, as_span(rows));
  b.array<std::uint32_t>(n, "columns", {cols.size()}, as_span(cols));
  parent.children.push_back(std::move(n));
}

Node emit_rod(Builder& b, std::size_t index, const RodDef& rod) {
  Node n = b.node(std::to_string(index));
  b.attr_string(n, "name", rod.name);
  b.attr_string(n, "kind", to_string(rod.kind));
  if (rod.pressure) b.attr(n, "pressure", *rod.pressure);
  Node blocks = b.node("blocks");
  for (std::size_t j = 0; j < rod.blocks.size(); ++j) {
    const auto& block = rod.blocks[j];
    Node bn = b.node(std::to_string(j));
    b.attr(bn, "z_start", block.z_start);
    b.attr(bn, "z_end", block.z_end);
    Node rings = b.node("rings");
    for (std::size_t k = 0; k < block.rings.size(); ++k) {
      const auto& ring = block.rings[k];
      Node rn = b.node(std::to_string(k));
      b.attr_string(rn, "material", ring.material.name);
      b.attr_string(rn, "phase", to_string(ring.material.phase));
      b.attr(rn, "inner_radius", ring.inner_radius);
      b.attr(rn, "outer_radius", ring.outer_radius);
      b.attr(rn, "height", ring.height);
      emit_provider(b, rn, ring.data);
      rings.children.push_back(std::move(rn));
    }
    bn.children.push_back(std::move(rings));
    emit_provider(b, bn, block.data);
    blocks.children.push_back(std::move(bn));
  }
  n.children.push_back(std::move(blocks));
  emit_provider(b, n, rod.data);
  return n;
}

std::vector<std::int64_t> grid_indices(const Grid<std::optional<std::uint32_t>>& g) {
  std::vector<std::int64_t> out;
  out.reserve(g.cells().size());
  for (const auto& c : g.cells()) out.push_back(c ? static_cast<std::int64_t>(*c) : -1);
  return out;
}

Node emit_assembly(Builder& b, std::size_t index, const AssemblyDef& def) {
  Node n = b.node(std::to_string(index));
  b.attr_string(n, "name", def.name());
  b.attr_string(n, "assembly_type", to_string(def.type()));
  b.attr(n, "size", static_cast<std::int64_t>(def.size()));
  b.attr(n, "rod_pitch", def.rod_pitch());
  if (def.duct_thickness()) b.attr(n, "duct_thickness", *def.duct_thickness());
  const auto rods = grid_indices(def.rod_grid());
  b.array<std::int64_t>(n, "rod_grid", {def.size(), def.size()}, as_span(rods));
  emit_labels(b, n, def.labels());
  emit_provider(b, n, def.data());

  FeatureColumns features;
  const auto& cells = def.provider_grid().cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (const auto& [feature, times] : cells[i].features()) {
      auto& slot = features[feature];
      for (const auto& [t, bucket] : times) {
        auto& cols = slot[t];
        for (const auto& e : bucket) {
          cols.cell.push_back(static_cast<std::uint32_t>(i));
          cols.push(e);
        }
      }
    }
  }
  emit_features(b, n, "features", features, true);
  return n;
}

Node emit_reactor(Builder& b, const Reactor& r) {
  Node n = b.node(r.name());
  b.attr_string(n, "reactor_type", to_string(r.type()));
  b.attr(n, "size", static_cast<std::int64_t>(r.size()));
  b.attr(n, "assembly_pitch", r.assembly_pitch());
  b.attr(n, "lattice_pitch", r.lattice_pitch());
  b.attr(n, "flat_to_flat", r.flat_to_flat());

  Node units = b.node("units");
  std::vector<std::uint32_t> ids;
  for (const auto& u : r.units()) ids.push_back(b.intern(u));
  b.array<std::uint32_t>(units, "names", {ids.size()}, as_span(ids));
  n.children.push_back(std::move(units));

  emit_labels(b, n, r.labels());
  emit_provider(b, n, r.data());

  Node rods = b.node("rod_defs");
  for (std::size_t i = 0; i < r.rod_defs().size(); ++i) {
    rods.children.push_back(emit_rod(b, i, r.rod_defs()[i]));
  }
  n.children.push_back(std::move(rods));

  Node assemblies = b.node("assembly_defs");
  for (std::size_t i = 0; i < r.assembly_defs().size(); ++i) {
    assemblies.children.push_back(emit_assembly(b, i, r.assembly_defs()[i]));
  }
  n.children.push_back(std::move(assemblies));

  Node grids = b.node("grids");
  for (const auto& [type, grid] : r.grids()) {
    Node g = b.node(to_string(type));
    const auto idx = grid_indices(grid);
    b.array<std::int64_t>(g, "index", {grid.size(), grid.size()}, as_span(idx));
    grids.children.push_back(std::move(g));
  }
  n.children.push_back(std::move(grids));
  return n;
}

// ---------------------------------------------------------------------------
// Loading

std::size_t checked_size(std::int64_t v, std::string_view what) {
  if (v < 1 || v > 702) corrupt(std::string(what) + " size out of range");
  return static_cast<std::size_t>(v);
}

GridLabels load_labels(const NodeView& owner, std::size_t size) {
  const NodeView n = owner.get_child("labels");
  const auto rows = n.get_array("rows", ElementType::u32).as_u32();
  const auto cols = n.get_array("columns", ElementType::u32).as_u32();
  if (rows.size() != size || cols.size() != size) corrupt("label count mismatch");
  GridLabels labels;
  for (auto id : rows) labels.rows.push_back(n.file().str(id));
  for (auto id : cols) labels.columns.push_back(n.file().str(id));
  return labels;
}

void check_grid_dims(const Array& a, std::size_t size, std::string_view what) {
  if (a.dims.size() != 2 || a.dims[0] != size || a.dims[1] != size) {
    corrupt(std::string(what) + " dims do not match size");
  }
}

// Calls sink(cell_or_none, feature, entry) for every stored entry.
template <class Sink>
void load_features(const NodeView& holder, bool with_cells, Sink&& sink) {
  for (const auto& fnode : holder.children()) {
    const std::string feature(fnode.name());
    const auto times = fnode.get_array("times", ElementType::f64).as_f64();
    const auto tnodes = fnode.children();
    if (tnodes.size() != times.size()) corrupt("time node count mismatch");
    for (std::size_t k = 0; k < times.size(); ++k) {
      const NodeView& t = tnodes[k];
      if (t.name() != "t" + std::to_string(k)) corrupt("unexpected time node name");
      const auto value = t.get_array("value", ElementType::f64).as_f64();
      const auto unc = t.get_array("uncertainty", ElementType::f64).as_f64();
      const auto units = t.get_array("units_id", ElementType::u32).as_u32();
      const auto& pos_arr = t.get_array("position", ElementType::f64);
      const std::size_t n = value.size();
      if (pos_arr.dims.size() != 2 || pos_arr.dims[0] != n || pos_arr.dims[1] != 3 ||
          unc.size() != n || units.size() != n) {
        corrupt("ragged data arrays for feature '" + feature + "'");
      }
      const auto pos = pos_arr.as_f64();
      std::vector<std::uint32_t> cells;
      if (with_cells) {
        cells = t.get_array("cell", ElementType::u32).as_u32();
        if (cells.size() != n) corrupt("ragged cell array for feature '" + feature + "'");
      }
      for (std::size_t i = 0; i < n; ++i) {
        DataEntry e;
        e.value = value[i];
        e.uncertainty = unc[i];
        e.units_id = units[i];
        e.position = {pos[3 * i], pos[3 * i + 1], pos[3 * i + 2]};
        e.time = times[k];
        sink(with_cells ? std::optional<std::uint32_t>(cells[i]) : std::nullopt,
             feature, e);
      }
    }
  }
}

void load_provider(const NodeView& owner, DataProvider& p) {
  if (auto holder = owner.child("data")) {
    load_features(*holder, false,
                  [&](std::optional<std::uint32_t>, const std::string& f,
                      const DataEntry& e) { p.add(f, e); });
  }
}

RodDef load_rod(const NodeView& n) {
  RodDef rod;
  rod.name = n.get_string("name");
  rod.kind = parse_rod_kind(n.get_string("kind"));
  if (n.find_attr("pressure")) rod.pressure = n.get_f64("pressure");
  for (const auto& bn : n.get_child("blocks").children()) {
    MaterialBlock block;
    block.z_start = bn.get_f64("z_start");
    block.z_end = bn.get_f64("z_end");
    for (const auto& rn : bn.get_child("rings").children()) {
      Ring ring;
      ring.material.name = rn.get_string("material");
      ring.material.phase = parse_phase(rn.get_string("phase"));
      ring.inner_radius = rn.get_f64("inner_radius");
      ring.outer_radius = rn.get_f64("outer_radius");
      ring.height = rn.get_f64("height");
      load_provider(rn, ring.data);
      block.rings.push_back(std::move(ring));
    }
    load_provider(bn, block.data);
    rod.blocks.push_back(std::move(block));
  }
  load_provider(n, rod.data);
  return rod;
}

std::optional<std::uint32_t> grid_cell(std::int64_t v, std::size_t limit) {
  if (v == -1) return std::nullopt;
  if (v < 0 || static_cast<std::uint64_t>(v) >= limit) corrupt("grid index out of range");
  return static_cast<std::uint32_t>(v);
}

AssemblyDef load_assembly(const NodeView& n, std::size_t rod_count) {
  const std::size_t size = checked_size(n.get_i64("size"), "assembly");
  const auto& rod_grid = n.get_array("rod_grid", ElementType::i64);
  check_grid_dims(rod_grid, size, "rod_grid");
  AssemblyDef def(n.get_string("name"), parse_assembly_type(n.get_string("assembly_type")),
                  size, n.get_f64("rod_pitch"));
  if (n.find_attr("duct_thickness")) def.set_duct_thickness(n.get_f64("duct_thickness"));
  def.set_labels(load_labels(n, size));
  const auto rods = rod_grid.as_i64();
  for (std::size_t i = 0; i < rods.size(); ++i) {
    def.set_rod(i / size, i % size, grid_cell(rods[i], rod_count));
  }
  load_provider(n, def.data());
  if (auto holder = n.child("features")) {
    load_features(*holder, true,
                  [&](std::optional<std::uint32_t> cell, const std::string& f,
                      const DataEntry& e) {
                    if (*cell >= size * size) corrupt("data cell out of range");
                    def.add_pin_data(*cell / size, *cell % size, f, e);
                  });
  }
  return def;
}

Reactor load_one(const NodeView& n) {
  const std::size_t size = checked_size(n.get_i64("size"), "reactor");
  const GridLabels labels = load_labels(n, size);
  Reactor r(std::string(n.name()), parse_reactor_type(n.get_string("reactor_type")), size);
  r.set_labels(labels);
  r.set_assembly_pitch(n.get_f64("assembly_pitch"));
  r.set_lattice_pitch(n.get_f64("lattice_pitch"));
  r.set_flat_to_flat(n.get_f64("flat_to_flat"));

  const auto unit_ids = n.get_child("units").get_array("names", ElementType::u32).as_u32();
  for (auto id : unit_ids) {
    const auto& name = n.file().str(id);
    if (r.find_unit(name)) corrupt("duplicate unit '" + name + "'");
    r.add_unit(name);
  }
  load_provider(n, r.data());

  const auto rod_nodes = n.get_child("rod_defs").children();
  for (std::size_t i = 0; i < rod_nodes.size(); ++i) {
    if (rod_nodes[i].name() != std::to_string(i)) corrupt("rod_defs out of order");
    r.add_rod_def(load_rod(rod_nodes[i]));
  }
  const auto asm_nodes = n.get_child("assembly_defs").children();
  for (std::size_t i = 0; i < asm_nodes.size(); ++i) {
    if (asm_nodes[i].name() != std::to_string(i)) corrupt("assembly_defs out of order");
    r.add_assembly_def(load_assembly(asm_nodes[i], r.rod_defs().size()));
  }

  std::set<AssemblyType> seen;
  for (const auto& g : n.get_child("grids").children()) {
    const AssemblyType type = parse_assembly_type(g.name());
    if (!seen.insert(type).second) corrupt("duplicate grid");
    const auto& arr = g.get_array("index", ElementType::i64);
    check_grid_dims(arr, size, "grid");
    const auto idx = arr.as_i64();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      r.set_assembly(type, i / size, i % size,
                     grid_cell(idx[i], r.assembly_defs().size()));
    }
  }
  if (seen.size() != r.grids().size()) corrupt("missing assembly grids");
  r.freeze();
  return r;
}

}  // namespace

nrdf::File store_reactors(std::span<const Reactor* const> reactors) {
  Builder b;
  Node root;
  root.name = nrdf::kNoName;
  Node list = b.node("reactors");
  std::set<std::string_view> names;
  for (const Reactor* r : reactors) {
    if (!r->frozen()) {
      throw Error(ErrorCode::encode_error, "reactor '" + r->name() + "' is not frozen");
    }
    if (!names.insert(r->name()).second) {
      throw Error(ErrorCode::encode_error, "duplicate reactor name '" + r->name() + "'");
    }
    list.children.push_back(emit_reactor(b, *r));
  }
  root.children.push_back(std::move(list));
  return std::move(b).finish(std::move(root));
}

nrdf::File store_reactor(const Reactor& reactor) {
  const Reactor* one[] = {&reactor};
  return store_reactors(one);
}

std::vector<Reactor> load_reactors(const nrdf::File& file) {
  const NodeView root(file, file.root);
  std::vector<Reactor> out;
  try {
    const NodeView list = root.get_child("reactors");
    std::set<std::string_view> names;
    for (const auto& n : list.children()) {
      if (!names.insert(n.name()).second) corrupt("duplicate reactor name");
      out.push_back(load_one(n));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::corrupt_file) throw;
    corrupt(e.detail());
  }
  return out;
}

Reactor load_reactor(const nrdf::File& file, std::string_view name) {
  auto all = load_reactors(file);
  for (auto& r : all) {
    if (name.empty() || r.name() == name) return std::move(r);
  }
  if (name.empty()) throw Error(ErrorCode::not_found, "file holds no reactors");
  throw Error(ErrorCode::not_found, "no reactor named '" + std::string(name) + "'");
}

void save_reactors(const std::string& path, std::span<const Reactor* const> reactors) {
  nrdf::write_file(store_reactors(reactors), path);
}

std::vector<Reactor> open_reactors(const std::string& path) {
  return load_reactors(nrdf::read_file(path));
}

}  // namespace corelens
