#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "fisbe/volume.hpp"

namespace fisbe {

/// Decoded contents of one .fiv file.
///
/// FIV ("filament instance volume") layout:
///   bytes 0..7   u64 little-endian byte length H of the JSON header
///   bytes 8..8+H the header: {"format":"fiv/1","shape":[z,y,x],
///                 "instances":[{"id":..,"voxel_count":..},..],
///                 "raw_channels":null|int}
///   1 byte       '\n'
///   payload      per instance, in header order: voxel runs of four
///                little-endian u32 values (z, y, x_start, length), sorted
///                by (z, y, x_start), disjoint within the instance
struct FivVolume {
    InstanceSet instances;
    std::vector<InstanceId> header_order;
    std::optional<int> raw_channels;
};

/// Lossless decode. Malformed files are rejected with std::runtime_error
/// carrying a distinct diagnostic (bad header, out-of-bounds run,
/// overlapping or unsorted runs, payload length mismatch).
FivVolume read_fiv(const std::filesystem::path& path);

/// Deterministic encode; instances are written in ascending id order.
void write_fiv(const std::filesystem::path& path, const InstanceSet& instances,
               std::optional<int> raw_channels = std::nullopt);

}  // namespace fisbe
