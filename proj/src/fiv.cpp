#include "fisbe/fiv.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <tuple>

namespace fisbe {

namespace {

using nlohmann::ordered_json;

struct Run {
    std::uint32_t z, y, x_start, length;
};

void append_u32(std::string& out, std::uint32_t v) {
    char b[4];
    b[0] = static_cast<char>(v & 0xff);
    b[1] = static_cast<char>((v >> 8) & 0xff);
    b[2] = static_cast<char>((v >> 16) & 0xff);
    b[3] = static_cast<char>((v >> 24) & 0xff);
    out.append(b, 4);
}

std::uint32_t read_u32(const char* p) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(p[3])) << 24;
}

std::vector<Run> encode_runs(const VoxelMask& mask) {
    std::vector<Run> runs;
    std::optional<Run> current;
    mask.for_each([&](Voxel v) {
        if (current && current->z == static_cast<std::uint32_t>(v.z) &&
            current->y == static_cast<std::uint32_t>(v.y) &&
            current->x_start + current->length == static_cast<std::uint32_t>(v.x)) {
            ++current->length;
            return;
        }
        if (current) runs.push_back(*current);
        current = Run{static_cast<std::uint32_t>(v.z), static_cast<std::uint32_t>(v.y),
                      static_cast<std::uint32_t>(v.x), 1};
    });
    if (current) runs.push_back(*current);
    return runs;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

}  // namespace

FivVolume read_fiv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 9) fail(path, "file too short for a FIV header");
    std::uint64_t header_len = 0;
    for (int i = 7; i >= 0; --i)
        header_len = (header_len << 8) | static_cast<unsigned char>(data[static_cast<std::size_t>(i)]);
    if (header_len > data.size() || 8 + header_len + 1 > data.size())
        fail(path, "header length exceeds file size");
    if (data[8 + header_len] != '\n') fail(path, "missing newline after header");

    ordered_json header;
    try {
        header = ordered_json::parse(data.substr(8, header_len));
    } catch (const std::exception& e) {
        fail(path, std::string("invalid header JSON: ") + e.what());
    }
    if (header.value("format", "") != "fiv/1") fail(path, "unsupported format tag");
    const auto& jshape = header.at("shape");
    if (!jshape.is_array() || jshape.size() != 3) fail(path, "shape must have three extents");
    GridShape shape;
    try {
        shape = make_grid_shape(jshape[0].get<std::int64_t>(), jshape[1].get<std::int64_t>(),
                                jshape[2].get<std::int64_t>());
    } catch (const std::exception& e) {
        fail(path, e.what());
    }

    FivVolume out;
    out.instances = InstanceSet(shape);
    if (header.contains("raw_channels") && !header["raw_channels"].is_null())
        out.raw_channels = header["raw_channels"].get<int>();

    std::size_t offset = 8 + header_len + 1;
    for (const auto& jinst : header.at("instances")) {
        const auto id = jinst.at("id").get<InstanceId>();
        const auto voxel_count = jinst.at("voxel_count").get<std::int64_t>();
        if (voxel_count <= 0) fail(path, "instance " + std::to_string(id) + " declares no voxels");

        std::vector<Voxel> voxels;
        voxels.reserve(static_cast<std::size_t>(voxel_count));
        Run prev{0, 0, 0, 0};
        bool have_prev = false;
        std::int64_t remaining = voxel_count;
        while (remaining > 0) {
            if (offset + 16 > data.size())
                fail(path, "payload truncated inside instance " + std::to_string(id));
            Run r{read_u32(data.data() + offset), read_u32(data.data() + offset + 4),
                  read_u32(data.data() + offset + 8), read_u32(data.data() + offset + 12)};
            offset += 16;
            if (r.length == 0) fail(path, "zero-length run in instance " + std::to_string(id));
            if (static_cast<std::int64_t>(r.length) > remaining)
                fail(path, "run overshoots voxel_count of instance " + std::to_string(id));
            if (have_prev) {
                const bool sorted =
                    std::tie(prev.z, prev.y, prev.x_start) < std::tie(r.z, r.y, r.x_start);
                if (!sorted) fail(path, "unsorted runs in instance " + std::to_string(id));
                if (prev.z == r.z && prev.y == r.y && prev.x_start + prev.length > r.x_start)
                    fail(path, "overlapping runs in instance " + std::to_string(id));
            }
            if (r.z >= static_cast<std::uint64_t>(shape.z) ||
                r.y >= static_cast<std::uint64_t>(shape.y) ||
                static_cast<std::uint64_t>(r.x_start) + r.length > static_cast<std::uint64_t>(shape.x))
                fail(path, "run outside the grid in instance " + std::to_string(id));
            for (std::uint32_t i = 0; i < r.length; ++i)
                voxels.push_back({static_cast<std::int32_t>(r.z), static_cast<std::int32_t>(r.y),
                                  static_cast<std::int32_t>(r.x_start + i)});
            remaining -= r.length;
            prev = r;
            have_prev = true;
        }
        out.instances.add(id, VoxelMask::from_voxels(shape, voxels));
        out.header_order.push_back(id);
    }
    if (offset != data.size()) fail(path, "trailing bytes after the last instance payload");
    return out;
}

void write_fiv(const std::filesystem::path& path, const InstanceSet& instances,
               std::optional<int> raw_channels) {
    ordered_json header;
    header["format"] = "fiv/1";
    header["shape"] = {instances.shape().z, instances.shape().y, instances.shape().x};
    header["instances"] = ordered_json::array();
    std::string payload;
    for (const auto& [id, mask] : instances.masks()) {
        header["instances"].push_back({{"id", id}, {"voxel_count", mask.count()}});
        for (const Run& r : encode_runs(mask)) {
            append_u32(payload, r.z);
            append_u32(payload, r.y);
            append_u32(payload, r.x_start);
            append_u32(payload, r.length);
        }
    }
    header["raw_channels"] = raw_channels ? ordered_json(*raw_channels) : ordered_json(nullptr);

    const std::string header_text = header.dump();
    std::string out;
    const std::uint64_t header_len = header_text.size();
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((header_len >> (8 * i)) & 0xff));
    out += header_text;
    out.push_back('\n');
    out += payload;

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace fisbe
