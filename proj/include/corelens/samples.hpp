#pragma once

// Synthetic reactors used by `gen-sample`, `bench` and the test suites.
// Every builder is deterministic and returns a frozen reactor.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "corelens/model.hpp"

namespace corelens::samples {

inline constexpr double kPwrRodHeight = 365.76;  // cm
inline constexpr std::size_t kPwrAssemblySize = 17;

/// Guide tube positions of a 17x17 PWR assembly (0-based row, col). The
/// instrument tube sits at the center (8, 8).
const std::vector<std::pair<std::size_t, std::size_t>>& guide_tube_positions();

/// 3x3 PWR core whose center holds a 17x17 fuel assembly with 264 fuel rods,
/// 24 guide tubes and one instrument tube, surrounded by control banks. Pin
/// data: "Axial Power" over `levels` axial levels and "Total Power" with a
/// single value per pin.
Reactor make_3a(std::size_t levels = 49);

/// Small SFR core (size 3 rhombus) around a seven-pin hexagonal fuel
/// assembly with "Axial Power" and "Coolant Temperature" data.
Reactor make_sfr7(std::size_t levels = 10);

/// Tiny PWR: 1x1 core holding a 3x3 assembly with a few axial levels.
Reactor make_small_pwr(std::size_t levels = 3);

/// Names accepted by make_preset.
std::vector<std::string> preset_names();
/// "3a" or "sfr7"; throws invalid-argument otherwise.
Reactor make_preset(std::string_view name);

struct BenchOptions {
  std::size_t pins = 52800;       // fuel pins in total, 264 per assembly
  std::size_t levels = 49;
  std::size_t features = 2;
  std::uint64_t seed = 1;
};

/// Core of distinct 17x17 fuel assemblies sharing five rod definitions, with
/// `features` axial features per fuel pin.
Reactor make_bench(const BenchOptions& options);

/// A core with `placements` fuel positions all referencing one assembly
/// definition.
Reactor make_repeated(std::size_t placements, std::size_t levels = 4);

}  // namespace corelens::samples
