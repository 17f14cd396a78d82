#include "corelens/samples.hpp"

#include <cmath>
#include <random>

namespace corelens::samples {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Uniform [0, 1) from the raw engine output, independent of the standard
// library's distribution implementations.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Ring ring(std::string material, Phase phase, double inner, double outer, double height) {
  Ring r;
  r.material = {std::move(material), phase};
  r.inner_radius = inner;
  r.outer_radius = outer;
  r.height = height;
  return r;
}

MaterialBlock block(double z0, double z1, std::vector<Ring> rings) {
  MaterialBlock b;
  b.z_start = z0;
  b.z_end = z1;
  b.rings = std::move(rings);
  return b;
}

RodDef pwr_fuel_rod(std::string name, std::string fuel, double height) {
  RodDef rod;
  rod.name = std::move(name);
  rod.kind = RodKind::fuel;
  rod.pressure = 15.5;
  rod.blocks.push_back(block(0.0, height,
                             {ring(std::move(fuel), Phase::solid, 0.0, 0.4096, height),
                              ring("Helium", Phase::gas, 0.4096, 0.418, height),
                              ring("Zircaloy-4 clad", Phase::solid, 0.418, 0.475, height)}));
  return rod;
}

RodDef pwr_tube(std::string name, RodKind kind, double height) {
  RodDef rod;
  rod.name = std::move(name);
  rod.kind = kind;
  rod.blocks.push_back(block(0.0, height,
                             {ring("Water", Phase::liquid, 0.0, 0.561, height),
                              ring("Zircaloy-4 clad", Phase::solid, 0.561, 0.602, height)}));
  return rod;
}

RodDef pwr_control_rod(double height) {
  RodDef rod;
  rod.name = "control_rod";
  rod.kind = RodKind::control;
  rod.blocks.push_back(block(0.0, height,
                             {ring("AgInCd", Phase::solid, 0.0, 0.433, height),
                              ring("Helium", Phase::gas, 0.433, 0.437, height),
                              ring("Steel clad", Phase::solid, 0.437, 0.484, height)}));
  return rod;
}

bool is_guide_tube(std::size_t r, std::size_t c) {
  for (const auto& [gr, gc] : guide_tube_positions()) {
    if (gr == r && gc == c) return true;
  }
  return false;
}

std::size_t ceil_sqrt(std::size_t n) {
  std::size_t s = 1;
  while (s * s < n) ++s;
  return s;
}

// Pin position relative to the assembly center.
Position pin_position(std::size_t size, double pitch, std::size_t r, std::size_t c,
                      double z) {
  const double half = (static_cast<double>(size) - 1.0) / 2.0;
  return {(static_cast<double>(c) - half) * pitch, (static_cast<double>(r) - half) * pitch, z};
}

double level_center(double z0, double z1, std::size_t levels, std::size_t k) {
  return z0 + (static_cast<double>(k) + 0.5) * (z1 - z0) / static_cast<double>(levels);
}

// Chopped cosine along the rod, never zero inside it.
double axial_shape(double z, double z0, double z1) {
  const double extrap = 0.05 * (z1 - z0);
  return std::sin(kPi * (z - z0 + extrap) / (z1 - z0 + 2.0 * extrap));
}

// 17x17 fuel lattice: fuel everywhere except guide tubes and the center.
AssemblyDef pwr_fuel_assembly(std::string name, std::uint32_t fuel, std::uint32_t guide,
                              std::uint32_t instrument) {
  AssemblyDef def(std::move(name), AssemblyType::fuel, kPwrAssemblySize, 1.26);
  const std::size_t center = kPwrAssemblySize / 2;
  for (std::size_t r = 0; r < kPwrAssemblySize; ++r) {
    for (std::size_t c = 0; c < kPwrAssemblySize; ++c) {
      if (r == center && c == center) {
        def.set_rod(r, c, instrument);
      } else if (is_guide_tube(r, c)) {
        def.set_rod(r, c, guide);
      } else {
        def.set_rod(r, c, fuel);
      }
    }
  }
  return def;
}

}  // namespace

const std::vector<std::pair<std::size_t, std::size_t>>& guide_tube_positions() {
  static const std::vector<std::pair<std::size_t, std::size_t>> positions{
      {2, 5},   {2, 8},   {2, 11},  {3, 3},   {3, 13},  {5, 2},  {5, 5},  {5, 8},
      {5, 11},  {5, 14},  {8, 2},   {8, 5},   {8, 11},  {8, 14}, {11, 2}, {11, 5},
      {11, 8},  {11, 11}, {11, 14}, {13, 3},  {13, 13}, {14, 5}, {14, 8}, {14, 11}};
  return positions;
}

Reactor make_3a(std::size_t levels) {
  if (levels == 0) fail(ErrorCode::invalid_argument, "levels must be positive");
  const double h = kPwrRodHeight;
  Reactor reactor("3a", ReactorType::pwr, 3);
  reactor.set_assembly_pitch(21.5);
  const auto axial_units = reactor.add_unit("W/cm");
  const auto total_units = reactor.add_unit("W");

  const auto fuel = reactor.add_rod_def(pwr_fuel_rod("fuel_rod", "UO2 3.1%", h));
  const auto guide = reactor.add_rod_def(pwr_tube("guide_tube", RodKind::control, h));
  const auto instrument = reactor.add_rod_def(pwr_tube("instrument_tube", RodKind::empty, h));
  const auto control = reactor.add_rod_def(pwr_control_rod(h));

  AssemblyDef fuel_def = pwr_fuel_assembly("fuel_17x17", fuel, guide, instrument);
  std::mt19937_64 rng(3);
  const double dz = h / static_cast<double>(levels);
  const double mid = (kPwrAssemblySize - 1) / 2.0;
  for (std::size_t r = 0; r < kPwrAssemblySize; ++r) {
    for (std::size_t c = 0; c < kPwrAssemblySize; ++c) {
      const bool fuel_pin = *fuel_def.rod_at(r, c) == fuel;
      const double radial =
          1.0 + 0.08 * std::cos(kPi * (static_cast<double>(r) - mid) / 17.0) *
                    std::cos(kPi * (static_cast<double>(c) - mid) / 17.0) +
          0.02 * (unit(rng) - 0.5);
      double total = 0.0;
      for (std::size_t k = 0; k < levels; ++k) {
        const double z = level_center(0.0, h, levels, k);
        DataEntry e;
        e.value = fuel_pin ? 180.0 * radial * axial_shape(z, 0.0, h) : 0.0;
        e.units_id = axial_units;
        e.position = pin_position(kPwrAssemblySize, 1.26, r, c, z);
        total += e.value * dz;
        fuel_def.add_pin_data(r, c, "Axial Power", e);
      }
      DataEntry t;
      t.value = total;
      t.units_id = total_units;
      t.position = pin_position(kPwrAssemblySize, 1.26, r, c, h / 2.0);
      fuel_def.add_pin_data(r, c, "Total Power", t);
    }
  }
  const auto fuel_index = reactor.add_assembly_def(std::move(fuel_def));

  AssemblyDef bank("control_bank_17x17", AssemblyType::control_bank, kPwrAssemblySize, 1.26);
  for (const auto& [r, c] : guide_tube_positions()) bank.set_rod(r, c, control);
  const auto bank_index = reactor.add_assembly_def(std::move(bank));

  AssemblyDef incore("incore_17x17", AssemblyType::incore_instrument, kPwrAssemblySize, 1.26);
  incore.set_rod(kPwrAssemblySize / 2, kPwrAssemblySize / 2, instrument);
  const auto incore_index = reactor.add_assembly_def(std::move(incore));

  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (r == 1 && c == 1) continue;
      reactor.set_assembly(AssemblyType::control_bank, r, c, bank_index);
    }
  }
  reactor.set_assembly(AssemblyType::fuel, 1, 1, fuel_index);
  reactor.set_assembly(AssemblyType::incore_instrument, 1, 1, incore_index);
  reactor.freeze();
  return reactor;
}

Reactor make_sfr7(std::size_t levels) {
  if (levels == 0) fail(ErrorCode::invalid_argument, "levels must be positive");
  Reactor reactor("sfr7", ReactorType::sfr, 3);
  reactor.set_lattice_pitch(14.0);
  reactor.set_flat_to_flat(13.6);
  const auto power_units = reactor.add_unit("W/cm");
  const auto temp_units = reactor.add_unit("K");

  constexpr double fuel_lo = 30.0, fuel_hi = 110.0, top = 160.0;
  RodDef pin;
  pin.name = "fuel_pin";
  pin.kind = RodKind::fuel;
  pin.blocks.push_back(
      block(0.0, fuel_lo, {ring("HT9 reflector", Phase::solid, 0.0, 1.8, fuel_lo)}));
  pin.blocks.push_back(block(fuel_lo, fuel_hi,
                             {ring("U-10Zr fuel", Phase::solid, 0.0, 1.5, fuel_hi - fuel_lo),
                              ring("Sodium bond", Phase::liquid, 1.5, 1.6, fuel_hi - fuel_lo),
                              ring("HT9 clad", Phase::solid, 1.6, 1.8, fuel_hi - fuel_lo)}));
  pin.blocks.push_back(block(fuel_hi, top,
                             {ring("Plenum gas", Phase::gas, 0.0, 1.6, top - fuel_hi),
                              ring("HT9 clad", Phase::solid, 1.6, 1.8, top - fuel_hi)}));
  const auto fuel = reactor.add_rod_def(pin);

  RodDef absorber;
  absorber.name = "control_pin";
  absorber.kind = RodKind::control;
  absorber.blocks.push_back(block(0.0, top,
                                  {ring("B4C", Phase::solid, 0.0, 1.6, top),
                                   ring("HT9 clad", Phase::solid, 1.6, 1.8, top)}));
  const auto control = reactor.add_rod_def(absorber);

  RodDef reflector_rod;
  reflector_rod.name = "reflector_rod";
  reflector_rod.kind = RodKind::reflector;
  reflector_rod.blocks.push_back(
      block(0.0, top, {ring("HT9 reflector", Phase::solid, 0.0, 1.9, top)}));
  const auto reflector = reactor.add_rod_def(reflector_rod);

  // Seven cells of a size-3 rhombus: every cell but the (0,0) and (2,2) corners.
  auto hex_cells = [](auto&& fn) {
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        if ((r == 0 && c == 0) || (r == 2 && c == 2)) continue;
        fn(r, c);
      }
    }
  };

  AssemblyDef fuel_def("sfr7_fuel", AssemblyType::fuel, 3, 4.2);
  fuel_def.set_duct_thickness(0.3);
  std::mt19937_64 rng(7);
  hex_cells([&](std::size_t r, std::size_t c) {
    fuel_def.set_rod(r, c, fuel);
    const double radial = (r == 1 && c == 1 ? 1.05 : 0.98) + 0.01 * (unit(rng) - 0.5);
    for (std::size_t k = 0; k < levels; ++k) {
      const double z = level_center(fuel_lo, fuel_hi, levels, k);
      const auto pos = pin_position(3, 4.2, r, c, z);
      DataEntry p;
      p.value = 350.0 * radial * axial_shape(z, fuel_lo, fuel_hi);
      p.units_id = power_units;
      p.position = pos;
      fuel_def.add_pin_data(r, c, "Axial Power", p);
      DataEntry t;
      t.value = 628.0 + 150.0 * radial * (z - fuel_lo) / (fuel_hi - fuel_lo);
      t.uncertainty = 0.5;
      t.units_id = temp_units;
      t.position = pos;
      fuel_def.add_pin_data(r, c, "Coolant Temperature", t);
    }
  });
  const auto fuel_index = reactor.add_assembly_def(std::move(fuel_def));

  AssemblyDef control_def("sfr7_control", AssemblyType::control, 3, 4.2);
  control_def.set_duct_thickness(0.3);
  hex_cells([&](std::size_t r, std::size_t c) { control_def.set_rod(r, c, control); });
  const auto control_index = reactor.add_assembly_def(std::move(control_def));

  AssemblyDef reflector_def("sfr7_reflector", AssemblyType::reflector, 3, 4.2);
  reflector_def.set_duct_thickness(0.3);
  hex_cells([&](std::size_t r, std::size_t c) { reflector_def.set_rod(r, c, reflector); });
  const auto reflector_index = reactor.add_assembly_def(std::move(reflector_def));

  reactor.set_assembly(AssemblyType::fuel, 1, 1, fuel_index);
  reactor.set_assembly(AssemblyType::control, 0, 1, control_index);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}) {
    reactor.set_assembly(AssemblyType::reflector, r, c, reflector_index);
  }
  reactor.freeze();
  return reactor;
}

Reactor make_small_pwr(std::size_t levels) {
  if (levels == 0) fail(ErrorCode::invalid_argument, "levels must be positive");
  constexpr double h = 30.0;
  Reactor reactor("mini", ReactorType::pwr, 1);
  const auto units = reactor.add_unit("W/cm");
  const auto fuel = reactor.add_rod_def(pwr_fuel_rod("fuel_rod", "UO2", h));
  const auto guide = reactor.add_rod_def(pwr_tube("guide_tube", RodKind::control, h));
  AssemblyDef def("mini_3x3", AssemblyType::fuel, 3, 1.26);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      const bool center = r == 1 && c == 1;
      def.set_rod(r, c, center ? guide : fuel);
      for (std::size_t k = 0; k < levels; ++k) {
        const double z = level_center(0.0, h, levels, k);
        DataEntry e;
        e.value = center ? 0.0 : 100.0 + static_cast<double>(3 * r + c + k);
        e.units_id = units;
        e.position = pin_position(3, 1.26, r, c, z);
        def.add_pin_data(r, c, "Axial Power", e);
      }
    }
  }
  reactor.set_assembly(AssemblyType::fuel, 0, 0, reactor.add_assembly_def(std::move(def)));
  reactor.freeze();
  return reactor;
}

std::vector<std::string> preset_names() { return {"3a", "sfr7"}; }

Reactor make_preset(std::string_view name) {
  if (name == "3a") return make_3a();
  if (name == "sfr7") return make_sfr7();
  fail(ErrorCode::invalid_argument, "unknown preset '" + std::string(name) + "'");
}

Reactor make_bench(const BenchOptions& options) {
  if (options.pins == 0 || options.levels == 0 || options.features == 0) {
    fail(ErrorCode::invalid_argument, "bench sizes must be positive");
  }
  const std::size_t fuel_pins = kPwrAssemblySize * kPwrAssemblySize - 25;  // 264
  const std::size_t assemblies = (options.pins + fuel_pins - 1) / fuel_pins;
  const std::size_t core = ceil_sqrt(assemblies);
  const double h = kPwrRodHeight;

  Reactor reactor("bench", ReactorType::pwr, core);
  const auto units = reactor.add_unit("W/cm");
  const std::uint32_t fuels[3] = {
      reactor.add_rod_def(pwr_fuel_rod("fuel_low", "UO2 2.1%", h)),
      reactor.add_rod_def(pwr_fuel_rod("fuel_mid", "UO2 2.6%", h)),
      reactor.add_rod_def(pwr_fuel_rod("fuel_high", "UO2 3.1%", h))};
  const auto guide = reactor.add_rod_def(pwr_tube("guide_tube", RodKind::control, h));
  const auto instrument = reactor.add_rod_def(pwr_tube("instrument_tube", RodKind::empty, h));

  static const char* const kFeatureNames[] = {"Axial Power", "Axial Flux", "Coolant Density"};
  std::vector<std::string> features;
  for (std::size_t f = 0; f < options.features; ++f) {
    features.push_back(f < 3 ? kFeatureNames[f] : "Feature " + std::to_string(f + 1));
  }

  std::mt19937_64 rng(options.seed);
  for (std::size_t a = 0; a < assemblies; ++a) {
    AssemblyDef def("fuel_" + std::to_string(a), AssemblyType::fuel, kPwrAssemblySize, 1.26);
    const std::size_t center = kPwrAssemblySize / 2;
    for (std::size_t r = 0; r < kPwrAssemblySize; ++r) {
      for (std::size_t c = 0; c < kPwrAssemblySize; ++c) {
        if (r == center && c == center) {
          def.set_rod(r, c, instrument);
          continue;
        }
        if (is_guide_tube(r, c)) {
          def.set_rod(r, c, guide);
          continue;
        }
        def.set_rod(r, c, fuels[(a + r + c) % 3]);
        const double radial = 0.9 + 0.2 * unit(rng);
        for (std::size_t f = 0; f < features.size(); ++f) {
          for (std::size_t k = 0; k < options.levels; ++k) {
            const double z = level_center(0.0, h, options.levels, k);
            DataEntry e;
            e.value = radial * axial_shape(z, 0.0, h) * static_cast<double>(f + 1);
            e.uncertainty = 0.001 * unit(rng);
            e.units_id = units;
            e.position = pin_position(kPwrAssemblySize, 1.26, r, c, z);
            def.add_pin_data(r, c, features[f], e);
          }
        }
      }
    }
    const auto index = reactor.add_assembly_def(std::move(def));
    reactor.set_assembly(AssemblyType::fuel, a / core, a % core, index);
  }
  reactor.freeze();
  return reactor;
}

Reactor make_repeated(std::size_t placements, std::size_t levels) {
  if (placements == 0 || levels == 0) {
    fail(ErrorCode::invalid_argument, "placements and levels must be positive");
  }
  const std::size_t core = ceil_sqrt(placements);
  const double h = kPwrRodHeight;
  Reactor reactor("repeated", ReactorType::pwr, core);
  const auto units = reactor.add_unit("W/cm");
  const auto fuel = reactor.add_rod_def(pwr_fuel_rod("fuel_rod", "UO2", h));
  const auto guide = reactor.add_rod_def(pwr_tube("guide_tube", RodKind::control, h));
  const auto instrument = reactor.add_rod_def(pwr_tube("instrument_tube", RodKind::empty, h));
  AssemblyDef def = pwr_fuel_assembly("fuel_17x17", fuel, guide, instrument);
  for (std::size_t r = 0; r < kPwrAssemblySize; ++r) {
    for (std::size_t c = 0; c < kPwrAssemblySize; ++c) {
      for (std::size_t k = 0; k < levels; ++k) {
        const double z = level_center(0.0, h, levels, k);
        DataEntry e;
        e.value = axial_shape(z, 0.0, h);
        e.units_id = units;
        e.position = pin_position(kPwrAssemblySize, 1.26, r, c, z);
        def.add_pin_data(r, c, "Axial Power", e);
      }
    }
  }
  const auto index = reactor.add_assembly_def(std::move(def));
  for (std::size_t i = 0; i < placements; ++i) {
    reactor.set_assembly(AssemblyType::fuel, i / core, i % core, index);
  }
  reactor.freeze();
  return reactor;
}

}  // namespace corelens::samples
