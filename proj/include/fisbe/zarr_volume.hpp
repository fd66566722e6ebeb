#pragma once

#include <filesystem>

#include "fisbe/volume.hpp"

namespace fisbe {

/// One sample read from the dataset's chunked-array container.
struct DatasetVolume {
    InstanceSet instances;  // one binary mask per gt channel (nonzero = member)
    bool has_raw = false;   // volumes/raw present (intensities are not loaded)
};

/// Reads the "volumes/gt_instances" array of a zarr-v2 container directory.
///
/// The array is CZYX with one instance mask per channel. Supported chunk
/// codecs are raw (compressor null) and zlib; anything else is rejected
/// with a "convert to FIV" hint. Only C-order, little-endian integer or
/// bool dtypes without filters are accepted. Missing chunk files read as
/// the fill value.
DatasetVolume read_dataset_container(const std::filesystem::path& path);

}  // namespace fisbe
