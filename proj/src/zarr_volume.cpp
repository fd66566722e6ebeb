#include "fisbe/zarr_volume.hpp"

#include <json.hpp>
#include <zlib.h>

#include <fstream>
#include <stdexcept>

namespace fisbe {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

std::string zlib_inflate(const fs::path& origin, const std::string& compressed,
                         std::size_t expected_size) {
    std::string out(expected_size, '\0');
    uLongf dest_len = expected_size;
    const int rc = uncompress(reinterpret_cast<Bytef*>(out.data()), &dest_len,
                              reinterpret_cast<const Bytef*>(compressed.data()),
                              static_cast<uLong>(compressed.size()));
    if (rc != Z_OK || dest_len != expected_size)
        fail(origin, "zlib chunk decompression failed");
    return out;
}

struct Dtype {
    std::size_t size = 1;
    bool ok = false;
};

// Accepts any little-endian (or single-byte) integer/bool dtype; channels
// are thresholded at nonzero, so the precise integer width never matters.
Dtype parse_dtype(const std::string& s) {
    std::string body = s;
    if (!body.empty() && (body[0] == '<' || body[0] == '|')) body = body.substr(1);
    else if (!body.empty() && body[0] == '>') return {};  // big-endian unsupported
    if (body.size() < 2) return {};
    const char kind = body[0];
    if (kind != 'u' && kind != 'i' && kind != 'b') return {};
    const int width = std::stoi(body.substr(1));
    if (width != 1 && width != 2 && width != 4 && width != 8) return {};
    return {static_cast<std::size_t>(width), true};
}

}  // namespace

DatasetVolume read_dataset_container(const fs::path& path) {
    const fs::path array_dir = path / "volumes" / "gt_instances";
    const fs::path meta_path = array_dir / ".zarray";
    if (!fs::exists(meta_path))
        fail(path, "missing group path volumes/gt_instances (no .zarray found)");

    json meta;
    try {
        meta = json::parse(read_file(meta_path));
    } catch (const std::exception& e) {
        fail(meta_path, std::string("invalid .zarray JSON: ") + e.what());
    }

    if (meta.value("zarr_format", 0) != 2) fail(meta_path, "only zarr format 2 is supported");
    if (meta.value("order", "C") != "C") fail(meta_path, "only C-order arrays are supported");
    if (meta.contains("filters") && !meta["filters"].is_null() && !meta["filters"].empty())
        fail(meta_path, "filters are not supported");

    bool zlib_codec = false;
    if (!meta["compressor"].is_null()) {
        const std::string codec = meta["compressor"].value("id", "");
        if (codec == "zlib") {
            zlib_codec = true;
        } else {
            fail(meta_path, "codec '" + codec + "' unsupported, convert the sample to FIV");
        }
    }

    const Dtype dtype = parse_dtype(meta.value("dtype", ""));
    if (!dtype.ok)
        fail(meta_path, "dtype '" + meta.value("dtype", "") +
                            "' is unsupported (expect a little-endian integer or bool)");

    const auto shape = meta.at("shape").get<std::vector<std::int64_t>>();
    const auto chunks = meta.at("chunks").get<std::vector<std::int64_t>>();
    if (shape.size() != 4 || chunks.size() != 4)
        fail(meta_path, "gt_instances must be a 4d CZYX array");
    for (std::int64_t e : shape)
        if (e < 1) fail(meta_path, "degenerate array shape");

    double fill_value = 0.0;
    if (meta.contains("fill_value") && meta["fill_value"].is_number())
        fill_value = meta["fill_value"].get<double>();
    const bool fill_nonzero = fill_value != 0.0;

    std::string separator = meta.value("dimension_separator", ".");

    const std::int64_t n_channels = shape[0];
    const GridShape grid = make_grid_shape(shape[1], shape[2], shape[3]);
    std::vector<VoxelMaskBuilder> builders;
    builders.reserve(static_cast<std::size_t>(n_channels));
    for (std::int64_t c = 0; c < n_channels; ++c) builders.emplace_back(grid);

    const std::int64_t chunk_elems = chunks[0] * chunks[1] * chunks[2] * chunks[3];
    const std::size_t chunk_bytes = static_cast<std::size_t>(chunk_elems) * dtype.size;
    std::vector<std::int64_t> n_chunks(4);
    for (int d = 0; d < 4; ++d)
        n_chunks[static_cast<std::size_t>(d)] =
            (shape[static_cast<std::size_t>(d)] + chunks[static_cast<std::size_t>(d)] - 1) /
            chunks[static_cast<std::size_t>(d)];

    for (std::int64_t cc = 0; cc < n_chunks[0]; ++cc)
        for (std::int64_t cz = 0; cz < n_chunks[1]; ++cz)
            for (std::int64_t cy = 0; cy < n_chunks[2]; ++cy)
                for (std::int64_t cx = 0; cx < n_chunks[3]; ++cx) {
                    std::string name = std::to_string(cc) + separator + std::to_string(cz) +
                                       separator + std::to_string(cy) + separator +
                                       std::to_string(cx);
                    fs::path chunk_path = array_dir / name;
                    if (separator == "/")
                        chunk_path = array_dir / std::to_string(cc) / std::to_string(cz) /
                                     std::to_string(cy) / std::to_string(cx);
                    std::string raw;
                    if (fs::exists(chunk_path)) {
                        raw = read_file(chunk_path);
                        if (zlib_codec) raw = zlib_inflate(chunk_path, raw, chunk_bytes);
                        if (raw.size() != chunk_bytes)
                            fail(chunk_path, "chunk has unexpected byte size");
                    } else if (!fill_nonzero) {
                        continue;  // absent chunk of zeros contributes nothing
                    }

                    for (std::int64_t ic = 0; ic < chunks[0]; ++ic) {
                        const std::int64_t c = cc * chunks[0] + ic;
                        if (c >= n_channels) break;
                        for (std::int64_t iz = 0; iz < chunks[1]; ++iz) {
                            const std::int64_t z = cz * chunks[1] + iz;
                            if (z >= grid.z) break;
                            for (std::int64_t iy = 0; iy < chunks[2]; ++iy) {
                                const std::int64_t y = cy * chunks[2] + iy;
                                if (y >= grid.y) break;
                                for (std::int64_t ix = 0; ix < chunks[3]; ++ix) {
                                    const std::int64_t x = cx * chunks[3] + ix;
                                    if (x >= grid.x) break;
                                    bool nonzero = fill_nonzero;
                                    if (!raw.empty()) {
                                        const std::size_t elem = static_cast<std::size_t>(
                                            ((ic * chunks[1] + iz) * chunks[2] + iy) * chunks[3] +
                                            ix);
                                        nonzero = false;
                                        for (std::size_t b = 0; b < dtype.size; ++b)
                                            if (raw[elem * dtype.size + b] != 0) nonzero = true;
                                    }
                                    if (nonzero)
                                        builders[static_cast<std::size_t>(c)].set(
                                            static_cast<std::int32_t>(z),
                                            static_cast<std::int32_t>(y),
                                            static_cast<std::int32_t>(x));
                                }
                            }
                        }
                    }
                }

    DatasetVolume out;
    out.instances = InstanceSet(grid);
    for (std::int64_t c = 0; c < n_channels; ++c) {
        VoxelMask mask = builders[static_cast<std::size_t>(c)].build();
        if (mask.empty())
            fail(path, "gt channel " + std::to_string(c) + " is all zero (empty instance)");
        out.instances.add(c, std::move(mask));
    }
    out.has_raw = fs::exists(path / "volumes" / "raw" / ".zarray");
    return out;
}

}  // namespace fisbe
