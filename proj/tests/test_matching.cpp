#include <doctest.h>

#include <stdexcept>

#include "fisbe/matching.hpp"
#include "fisbe/matching_oracle.hpp"
#include "fisbe/synth.hpp"

using namespace fisbe;

namespace {

VoxelMask curve(GridShape shape, int z, int y, int x0, int len) {
    return VoxelMask::from_voxels(shape, serpentine_curve(z, y, x0, len, 1000));
}

PairTable table_of(const LabeledImage& img) {
    return build_pair_table(img, skeleton_cache(img.gt), skeleton_cache(img.pred));
}

bool same_pairs(const ManyToManyMatching& a, const ManyToManyMatching& b) {
    auto pa = a.pairs, pb = b.pairs;
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    return pa == pb;
}

}  // namespace

TEST_CASE("greedy one-to-one basics") {
    const GridShape shape{16, 32, 64};
    LabeledImage img;
    img.name = "m";
    img.gt = InstanceSet(shape);
    img.pred = InstanceSet(shape);
    img.has_pred = true;

    SUBCASE("single perfect pair") {
        img.gt.add(1, curve(shape, 2, 4, 2, 20));
        img.pred.add(5, curve(shape, 2, 4, 2, 20));
        const auto m = greedy_one_to_one(table_of(img));
        REQUIRE(m.pairs.size() == 1);
        CHECK(m.pairs[0].gt == 1);
        CHECK(m.pairs[0].pred == 5);
        CHECK(m.pairs[0].cl_dice == 1.0);
    }
    SUBCASE("one pred takes the higher-scoring gt only") {
        img.gt.add(1, curve(shape, 2, 4, 2, 20));
        img.gt.add(2, curve(shape, 2, 8, 2, 20));
        // overlaps 15 voxels of gt1 and 5 of gt2 via two fragments, merged as one pred
        std::vector<Voxel> v;
        for (const Voxel& p : serpentine_curve(2, 4, 2, 15, 1000)) v.push_back(p);
        for (const Voxel& p : serpentine_curve(2, 8, 2, 5, 1000)) v.push_back(p);
        img.pred.add(9, VoxelMask::from_voxels(shape, v));
        const auto m = greedy_one_to_one(table_of(img));
        REQUIRE(m.pairs.size() == 1);
        CHECK(m.pairs[0].gt == 1);
    }
    SUBCASE("zero clDice pairs never match") {
        img.gt.add(1, curve(shape, 2, 4, 2, 20));
        img.pred.add(5, curve(shape, 8, 20, 2, 20));
        CHECK(greedy_one_to_one(table_of(img)).pairs.empty());
    }
}

TEST_CASE("coverage assignment") {
    const GridShape shape{16, 32, 64};
    LabeledImage img;
    img.name = "c";
    img.gt = InstanceSet(shape);
    img.pred = InstanceSet(shape);
    img.has_pred = true;
    img.gt.add(1, curve(shape, 2, 4, 2, 20));
    img.gt.add(2, curve(shape, 2, 8, 2, 20));

    SUBCASE("identical prediction goes to its gt") {
        img.pred.add(1, curve(shape, 2, 4, 2, 20));
        const auto cov = coverage_assign(table_of(img));
        CHECK(cov.assignment.at(1) == std::optional<InstanceId>(1));
    }
    SUBCASE("background prediction is assigned to bg") {
        img.pred.add(1, curve(shape, 10, 20, 2, 20));
        const auto cov = coverage_assign(table_of(img));
        CHECK_FALSE(cov.assignment.at(1).has_value());
    }
    SUBCASE("precision tie prefers the smaller gt id") {
        // half in gt1, half in gt2: clPrecision 0.5 / 0.5
        std::vector<Voxel> v;
        for (const Voxel& p : serpentine_curve(2, 4, 2, 10, 1000)) v.push_back(p);
        for (const Voxel& p : serpentine_curve(2, 8, 2, 10, 1000)) v.push_back(p);
        img.pred.add(1, VoxelMask::from_voxels(shape, v));
        const auto cov = coverage_assign(table_of(img));
        CHECK(cov.assignment.at(1) == std::optional<InstanceId>(1));
    }
}

TEST_CASE("many-to-many matching semantics") {
    const GridShape shape{16, 32, 128};
    LabeledImage img;
    img.name = "mm";
    img.gt = InstanceSet(shape);
    img.pred = InstanceSet(shape);
    img.has_pred = true;

    SUBCASE("prediction inside an overlap region matches exactly one gt") {
        // two gts sharing a 10-voxel stretch; the prediction covers the shared part
        std::vector<Voxel> g1, g2;
        for (const Voxel& p : serpentine_curve(2, 4, 2, 30, 1000)) g1.push_back(p);
        for (const Voxel& p : serpentine_curve(2, 4, 20, 30, 1000)) g2.push_back(p);
        img.gt.add(1, VoxelMask::from_voxels(shape, g1));
        img.gt.add(2, VoxelMask::from_voxels(shape, g2));
        img.pred.add(7, curve(shape, 2, 4, 20, 12));
        const auto m = greedy_many_to_many(img, skeleton_cache(img.gt), 0.1);
        CHECK(m.pairs.size() == 1);
    }
    SUBCASE("union prediction matches both gts") {
        std::vector<Voxel> v;
        for (const Voxel& p : serpentine_curve(2, 4, 2, 40, 1000)) v.push_back(p);
        for (const Voxel& p : serpentine_curve(2, 8, 2, 40, 1000)) v.push_back(p);
        img.gt.add(1, curve(shape, 2, 4, 2, 40));
        img.gt.add(2, curve(shape, 2, 8, 2, 40));
        img.pred.add(7, VoxelMask::from_voxels(shape, v));
        const auto m = greedy_many_to_many(img, skeleton_cache(img.gt), 0.1);
        REQUIRE(m.pairs.size() == 2);
        CHECK(m.matches_per_pred().at(7) == 2);
    }
    SUBCASE("duplicate predictions yield one match") {
        img.gt.add(1, curve(shape, 2, 4, 2, 40));
        img.pred.add(7, curve(shape, 2, 4, 2, 40));
        img.pred.add(8, curve(shape, 2, 4, 2, 40));
        const auto m = greedy_many_to_many(img, skeleton_cache(img.gt), 0.1);
        REQUIRE(m.pairs.size() == 1);
        CHECK(m.pairs[0].second == 7);  // tie broken toward the smaller pred id
    }
    SUBCASE("threshold is strict") {
        img.gt.add(1, curve(shape, 2, 4, 2, 100));
        img.pred.add(7, curve(shape, 2, 4, 2, 5));  // clRecall exactly 0.05
        const auto m = greedy_many_to_many(img, skeleton_cache(img.gt), 0.05);
        CHECK(m.pairs.empty());
    }
}

TEST_CASE("oracle equivalence on edge-case phantoms") {
    for (const Phantom& ph : all_edge_cases()) {
        CAPTURE(ph.image.name);
        REQUIRE(oracle::within_bounds(ph.image));
        const auto gt_skels = skeleton_cache(ph.image.gt);
        const auto pred_skels = skeleton_cache(ph.image.pred);
        const PairTable table = build_pair_table(ph.image, gt_skels, pred_skels);

        const auto fast_121 = greedy_one_to_one(table);
        const auto slow_121 = oracle::one_to_one(ph.image);
        REQUIRE(fast_121.pairs.size() == slow_121.pairs.size());
        for (std::size_t i = 0; i < fast_121.pairs.size(); ++i) {
            CHECK(fast_121.pairs[i].gt == slow_121.pairs[i].gt);
            CHECK(fast_121.pairs[i].pred == slow_121.pairs[i].pred);
        }

        CHECK(coverage_assign(table).assignment == oracle::coverage(ph.image).assignment);

        for (double th : {0.05, 0.1}) {
            const auto fast = greedy_many_to_many(ph.image, gt_skels, th);
            const auto slow = oracle::many_to_many(ph.image, th);
            CHECK(same_pairs(fast, slow));
        }
    }
}

TEST_CASE("oracle rejects oversized inputs") {
    const GridShape shape{80, 80, 80};
    LabeledImage img;
    img.name = "big";
    img.gt = InstanceSet(shape);
    img.gt.add(1, curve(shape, 2, 4, 2, 20));
    img.pred = InstanceSet(shape);
    img.has_pred = true;
    CHECK_FALSE(oracle::within_bounds(img));
    CHECK_THROWS_AS(oracle::one_to_one(img), std::invalid_argument);
}

TEST_CASE("per-image greedy equals the pooled-sort formulation") {
    // Pool every image's clDice entries into one globally sorted list and
    // match with per-instance constraints; the result must coincide with the
    // per-image matchings.
    std::vector<LabeledImage> images;
    for (std::uint64_t seed : {401ull, 402ull, 403ull}) {
        Phantom ph = random_filament_phantom(seed, 3, 20, 40, 0.3);
        ph.image.name = "img" + std::to_string(seed);
        // degrade predictions so scores are spread out: trim every mask
        InstanceSet pred(ph.image.pred.shape());
        int k = 0;
        for (const auto& [id, mask] : ph.image.pred.masks()) {
            auto v = mask.voxels();
            const std::size_t keep = std::min(v.size(), v.size() * (3 + k % 3) / 5 + 1);
            pred.add(id, VoxelMask::from_voxels(ph.image.pred.shape(),
                                                std::span<const Voxel>(v.data(), keep)));
            ++k;
        }
        ph.image.pred = pred;
        images.push_back(ph.image);
    }

    struct PooledEntry {
        double dice;
        std::size_t image;
        InstanceId gt, pred;
    };
    std::vector<PooledEntry> pooled;
    std::vector<PairTable> tables;
    for (std::size_t i = 0; i < images.size(); ++i) {
        tables.push_back(table_of(images[i]));
        for (InstanceId g : tables[i].gt_ids())
            for (InstanceId p : tables[i].pred_ids()) {
                const double d = tables[i].dice(g, p);
                if (d > 0.0) pooled.push_back({d, i, g, p});
            }
    }
    std::sort(pooled.begin(), pooled.end(), [](const PooledEntry& a, const PooledEntry& b) {
        if (a.dice != b.dice) return a.dice > b.dice;
        return std::tie(a.image, a.gt, a.pred) < std::tie(b.image, b.gt, b.pred);
    });
    std::vector<std::set<InstanceId>> used_gt(images.size()), used_pred(images.size());
    std::vector<std::vector<std::pair<InstanceId, InstanceId>>> pooled_pairs(images.size());
    for (const PooledEntry& e : pooled) {
        if (used_gt[e.image].count(e.gt) || used_pred[e.image].count(e.pred)) continue;
        used_gt[e.image].insert(e.gt);
        used_pred[e.image].insert(e.pred);
        pooled_pairs[e.image].emplace_back(e.gt, e.pred);
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
        auto per_image = greedy_one_to_one(tables[i]).pairs;
        std::vector<std::pair<InstanceId, InstanceId>> got;
        for (const MatchedPair& p : per_image) got.emplace_back(p.gt, p.pred);
        std::sort(got.begin(), got.end());
        std::sort(pooled_pairs[i].begin(), pooled_pairs[i].end());
        CHECK(got == pooled_pairs[i]);
    }
}

TEST_CASE("one-to-one is invariant under id relabeling up to renaming") {
    const Phantom ph = random_filament_phantom(77, 4, 20, 50, 0.5);
    const auto base = greedy_one_to_one(table_of(ph.image));

    // shift every id by 10 in both sets
    LabeledImage shifted;
    shifted.name = ph.image.name;
    shifted.gt = InstanceSet(ph.image.gt.shape());
    shifted.pred = InstanceSet(ph.image.pred.shape());
    shifted.has_pred = true;
    for (const auto& [id, mask] : ph.image.gt.masks()) shifted.gt.add(id + 10, mask);
    for (const auto& [id, mask] : ph.image.pred.masks()) shifted.pred.add(id + 10, mask);
    const auto moved = greedy_one_to_one(table_of(shifted));

    REQUIRE(base.pairs.size() == moved.pairs.size());
    for (std::size_t i = 0; i < base.pairs.size(); ++i) {
        CHECK(base.pairs[i].gt + 10 == moved.pairs[i].gt);
        CHECK(base.pairs[i].pred + 10 == moved.pairs[i].pred);
    }
}
