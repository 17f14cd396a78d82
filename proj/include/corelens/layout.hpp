#pragma once

// Mapping between frozen reactors and NRDF containers.
//
//   /reactors/<name>            reactor_type, size, pitches, flat_to_flat
//     units                     names: u32[n] string indices
//     labels                    rows, columns: u32[size] string indices
//     data/<feature>            part-level data (optional)
//     rod_defs/<i>              name, kind, pressure?; blocks/<j>/rings/<k>
//     assembly_defs/<i>         name, assembly_type, size, rod_pitch,
//                               duct_thickness?; rod_grid i64[size x size]
//       labels
//       features/<feature>      times f64[T]; t<k>: cell, value,
//                               uncertainty, units_id, position[n x 3]
//     grids/<assembly_type>     index i64[size x size], -1 = empty
//
// Rod and assembly definitions are written once and referenced by index;
// units are written once and referenced by id.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corelens/model.hpp"
#include "corelens/nrdf.hpp"

namespace corelens {

/// Encodes one frozen reactor. Throws encode-error for an unfrozen reactor.
nrdf::File store_reactor(const Reactor& reactor);
/// Several reactors in one container, one child of /reactors each.
nrdf::File store_reactors(std::span<const Reactor* const> reactors);

/// Decodes every reactor in the container, frozen. Layout problems are
/// reported as corrupt-file.
std::vector<Reactor> load_reactors(const nrdf::File& file);
/// The reactor with the given name, or the first one when `name` is empty.
Reactor load_reactor(const nrdf::File& file, std::string_view name = {});

/// Convenience wrappers over the container functions.
void save_reactors(const std::string& path, std::span<const Reactor* const> reactors);
std::vector<Reactor> open_reactors(const std::string& path);

}  // namespace corelens
