#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <random>

#include "fisbe/fiv.hpp"
#include "fisbe/manifest.hpp"
#include "fisbe/zarr_volume.hpp"

using namespace fisbe;
namespace fs = std::filesystem;

namespace {

const fs::path kDataDir = FISBE_TEST_DATA_DIR;

fs::path temp_path(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fisbe_test_" + name);
    fs::remove_all(p);
    return p;
}

InstanceSet random_instance_set(std::mt19937_64& rng, int max_instances) {
    const GridShape shape{static_cast<std::int64_t>(4 + rng() % 12),
                          static_cast<std::int64_t>(4 + rng() % 12),
                          static_cast<std::int64_t>(4 + rng() % 20)};
    InstanceSet s(shape);
    const int n = 1 + static_cast<int>(rng() % max_instances);
    for (int i = 0; i < n; ++i) {
        std::vector<Voxel> v;
        const int voxels = 1 + static_cast<int>(rng() % 40);
        for (int k = 0; k < voxels; ++k)
            v.push_back({static_cast<std::int32_t>(rng() % shape.z),
                         static_cast<std::int32_t>(rng() % shape.y),
                         static_cast<std::int32_t>(rng() % shape.x)});
        s.add(static_cast<InstanceId>(rng() % 1000) * 10 + i, VoxelMask::from_voxels(shape, v));
    }
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct ExpectedChannels {
    GridShape shape;
    std::map<InstanceId, std::vector<Voxel>> channels;
};

ExpectedChannels load_expected(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    ExpectedChannels out;
    std::string tok;
    in >> tok >> out.shape.z >> out.shape.y >> out.shape.x;
    while (in >> tok) {
        REQUIRE(tok == "channel");
        InstanceId id;
        std::size_t n;
        in >> id >> n;
        auto& v = out.channels[id];
        v.resize(n);
        for (auto& vx : v) in >> vx.z >> vx.y >> vx.x;
    }
    return out;
}

}  // namespace

TEST_CASE("fiv round-trip is lossless on random sets") {
    std::mt19937_64 rng(2024);
    const fs::path path = temp_path("roundtrip.fiv");
    for (int seed = 0; seed < 200; ++seed) {
        const InstanceSet original = random_instance_set(rng, 5);
        write_fiv(path, original);
        const FivVolume loaded = read_fiv(path);
        REQUIRE(loaded.instances.size() == original.size());
        CHECK(loaded.instances.shape() == original.shape());
        for (const auto& [id, mask] : original.masks()) CHECK(loaded.instances.mask(id) == mask);
    }
    fs::remove(path);
}

TEST_CASE("fiv writes are byte-identical across repeats") {
    std::mt19937_64 rng(5);
    const InstanceSet s = random_instance_set(rng, 4);
    const fs::path p1 = temp_path("det1.fiv"), p2 = temp_path("det2.fiv");
    write_fiv(p1, s);
    write_fiv(p2, s);
    CHECK(slurp(p1) == slurp(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("fiv with zero instances keeps its shape") {
    const fs::path path = temp_path("empty.fiv");
    write_fiv(path, InstanceSet(GridShape{3, 4, 5}));
    const FivVolume loaded = read_fiv(path);
    CHECK(loaded.instances.size() == 0);
    CHECK(loaded.instances.shape() == GridShape{3, 4, 5});
    fs::remove(path);
}

TEST_CASE("fiv diagnostics") {
    const GridShape shape{4, 4, 8};
    InstanceSet s(shape);
    s.add(3, VoxelMask::from_voxels(shape, std::vector<Voxel>{{1, 1, 1}, {1, 1, 2}, {2, 2, 2}}));
    const fs::path path = temp_path("diag.fiv");
    write_fiv(path, s);
    const std::string good = slurp(path);

    SUBCASE("truncated payload names the instance") {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(good.data(), static_cast<std::streamsize>(good.size() - 8));
        out.close();
        CHECK_THROWS_WITH_AS(read_fiv(path), doctest::Contains("instance 3"),
                             std::runtime_error);
    }
    SUBCASE("trailing bytes are rejected") {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(good.data(), static_cast<std::streamsize>(good.size()));
        out.write("xx", 2);
        out.close();
        CHECK_THROWS_WITH_AS(read_fiv(path), doctest::Contains("trailing"), std::runtime_error);
    }
    SUBCASE("bad format tag") {
        std::string bad = good;
        const auto pos = bad.find("fiv/1");
        bad.replace(pos, 5, "xyz/9");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
        out.close();
        CHECK_THROWS_WITH_AS(read_fiv(path), doctest::Contains("format"), std::runtime_error);
    }
    fs::remove(path);
}

TEST_CASE("fiv reader rejects every truncation without crashing") {
    const GridShape shape{4, 5, 9};
    InstanceSet s(shape);
    s.add(1, VoxelMask::from_voxels(shape, std::vector<Voxel>{{0, 0, 0}, {0, 0, 1}, {2, 3, 4}}));
    s.add(2, VoxelMask::from_voxels(shape, std::vector<Voxel>{{3, 4, 8}}));
    const fs::path path = temp_path("trunc.fiv");
    write_fiv(path, s);
    const std::string good = slurp(path);
    for (std::size_t len = 0; len < good.size(); ++len) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(good.data(), static_cast<std::streamsize>(len));
        out.close();
        CHECK_THROWS_AS(read_fiv(path), std::runtime_error);
    }
    fs::remove(path);
}

TEST_CASE("container reader decodes the fixtures") {
    for (const char* name : {"raw_codec", "zlib_codec", "uint16_multichunk"}) {
        CAPTURE(name);
        const ExpectedChannels expected = load_expected(kDataDir / "zarr" / (std::string(name) + ".expected.txt"));
        const DatasetVolume vol =
            read_dataset_container(kDataDir / "zarr" / (std::string(name) + ".zarr"));
        REQUIRE(vol.instances.size() == expected.channels.size());
        CHECK(vol.instances.shape() == expected.shape);
        for (const auto& [id, voxels] : expected.channels) {
            const VoxelMask want = VoxelMask::from_voxels(expected.shape, voxels);
            CHECK(vol.instances.mask(id) == want);
        }
    }
}

TEST_CASE("container reader records raw presence") {
    CHECK(read_dataset_container(kDataDir / "zarr" / "zlib_codec.zarr").has_raw);
    CHECK_FALSE(read_dataset_container(kDataDir / "zarr" / "raw_codec.zarr").has_raw);
}

TEST_CASE("container reader error paths") {
    CHECK_THROWS_WITH_AS(read_dataset_container(kDataDir / "zarr" / "blosc_codec.zarr"),
                         doctest::Contains("convert"), std::runtime_error);
    CHECK_THROWS_WITH_AS(read_dataset_container(kDataDir / "zarr" / "missing_group.zarr"),
                         doctest::Contains("gt_instances"), std::runtime_error);
    CHECK_THROWS_WITH_AS(read_dataset_container(kDataDir / "zarr" / "empty_channel.zarr"),
                         doctest::Contains("empty"), std::runtime_error);
}

TEST_CASE("container and fiv agree after conversion") {
    for (const char* name : {"raw_codec", "zlib_codec", "uint16_multichunk"}) {
        const DatasetVolume vol =
            read_dataset_container(kDataDir / "zarr" / (std::string(name) + ".zarr"));
        const fs::path path = temp_path(std::string(name) + ".fiv");
        write_fiv(path, vol.instances);
        const FivVolume loaded = read_fiv(path);
        REQUIRE(loaded.instances.size() == vol.instances.size());
        for (const auto& [id, mask] : vol.instances.masks())
            CHECK(loaded.instances.mask(id) == mask);
        fs::remove(path);
    }
}

TEST_CASE("split manifest parsing") {
    const fs::path path = temp_path("manifest.csv");
    {
        std::ofstream out(path);
        out << "name,split,labeling\n";
        out << "img_a,train,completely\n";
        out << "img_b,val,partly\n";
        out << "img_c,test,completely\n";
    }
    const auto rows = read_split_manifest(path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].name == "img_a");
    CHECK(rows[0].split == Split::Train);
    CHECK(rows[1].labeling == Labeling::Partly);
    CHECK(rows[2].split == Split::Test);

    SUBCASE("duplicate names rejected") {
        std::ofstream out(path, std::ios::app);
        out << "img_a,val,partly\n";
        out.close();
        CHECK_THROWS_WITH_AS(read_split_manifest(path), doctest::Contains("duplicate"),
                             std::runtime_error);
    }
    SUBCASE("unknown split rejected") {
        std::ofstream out(path, std::ios::app);
        out << "img_d,validation,partly\n";
        out.close();
        CHECK_THROWS_AS(read_split_manifest(path), std::runtime_error);
    }
    fs::remove(path);
}

TEST_CASE("dim list parsing") {
    const fs::path path = temp_path("dim.csv");
    {
        std::ofstream out(path);
        out << "name,instance_id\n";
        out << "img_a,3\n";
        out << "img_a,5\n";
        out << "img_b,1\n";
    }
    const auto dim = read_dim_list(path);
    REQUIRE(dim.size() == 2);
    CHECK(dim.at("img_a") == std::set<InstanceId>{3, 5});
    CHECK(dim.at("img_b") == std::set<InstanceId>{1});
    fs::remove(path);
}
