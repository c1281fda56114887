#pragma once

#include <filesystem>

#include "nlfp/grid.hpp"

namespace nlfp {

/// 1D fields go to CSV with header "x,u" and shortest round-trip decimals.
/// 2D fields go to raw little-endian f64 (x-major) at `path`, with a JSON
/// sidecar at `path` + ".json" holding shape, bounds, topology and axis order.
/// read_field(write_field(f)) reproduces f bit-exactly.
void write_field(const Field& f, const std::filesystem::path& path);

/// The 1D grid is inferred from the x column; `topology` selects how the
/// endpoints are interpreted. 2D fields take their grid from the sidecar.
Field read_field(const std::filesystem::path& path, Topology topology = Topology::periodic);

/// Sidecar path for a raw 2D field.
std::filesystem::path sidecar_path(const std::filesystem::path& raw);

}  // namespace nlfp
