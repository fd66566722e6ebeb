#include <doctest.h>

#include <stdexcept>

#include "fisbe/metrics.hpp"
#include "fisbe/synth.hpp"

using namespace fisbe;

namespace {

VoxelMask curve(GridShape shape, int z, int y, int x0, int len) {
    return VoxelMask::from_voxels(shape, serpentine_curve(z, y, x0, len, 1000));
}

LabeledImage base_image(const char* name) {
    const GridShape shape{16, 48, 128};
    LabeledImage img;
    img.name = name;
    img.gt = InstanceSet(shape);
    img.pred = InstanceSet(shape);
    img.has_pred = true;
    return img;
}

}  // namespace

TEST_CASE("score_S is the plain average") {
    CHECK(score_S(1.0, 1.0) == 1.0);
    CHECK(score_S(0.0, 1.0) == 0.5);
    CHECK(score_S(0.36, 1.0) == doctest::Approx(0.68).epsilon(1e-12));
}

TEST_CASE("threshold sweep per image: perfect prediction") {
    LabeledImage img = base_image("perfect");
    img.gt.add(1, curve(img.gt.shape(), 2, 4, 2, 30));
    img.pred.add(1, curve(img.gt.shape(), 2, 4, 2, 30));
    const ImageStats s = compute_image_stats(img);
    for (int t = 0; t < kNumThresholds; ++t) {
        CHECK(s.tp[t] == 1);
        CHECK(s.fp[t] == 0);
        CHECK(s.fn[t] == 0);
    }
    CHECK(s.false_splits == 0);
    CHECK(s.false_merges == 0);
    REQUIRE(s.gt_rows.size() == 1);
    CHECK(s.gt_rows[0].coverage == 1.0);
    CHECK(s.gt_rows[0].matched_05);
}

TEST_CASE("false splits: four fragments on one gt") {
    LabeledImage img = base_image("fs");
    img.gt.add(1, curve(img.gt.shape(), 2, 4, 2, 40));
    // four 10-voxel fragments tile the curve; clRecall 0.25 each
    for (int k = 0; k < 4; ++k)
        img.pred.add(k + 1, curve(img.gt.shape(), 2, 4, 2 + 10 * k, 10));
    const ImageStats s = compute_image_stats(img);
    CHECK(s.false_splits == 3);
    CHECK(s.false_merges == 0);
    REQUIRE(s.gt_rows.size() == 1);
    CHECK(s.gt_rows[0].coverage == 1.0);
}

TEST_CASE("false merges: union prediction over two gts") {
    LabeledImage img = base_image("fm");
    img.gt.add(1, curve(img.gt.shape(), 2, 4, 2, 40));
    img.gt.add(2, curve(img.gt.shape(), 2, 8, 2, 40));
    std::vector<Voxel> v;
    for (const Voxel& p : serpentine_curve(2, 4, 2, 40, 1000)) v.push_back(p);
    for (const Voxel& p : serpentine_curve(2, 8, 2, 40, 1000)) v.push_back(p);
    img.pred.add(1, VoxelMask::from_voxels(img.gt.shape(), v));
    const ImageStats s = compute_image_stats(img);
    CHECK(s.false_merges == 1);
    CHECK(s.false_splits == 0);
}

TEST_CASE("partly labeling filters background false positives") {
    LabeledImage img = base_image("partly");
    img.gt.add(1, curve(img.gt.shape(), 2, 4, 2, 30));
    img.pred.add(1, curve(img.gt.shape(), 2, 4, 2, 30));
    img.pred.add(2, curve(img.gt.shape(), 10, 30, 2, 20));  // unlabeled region

    SUBCASE("completely: stray prediction counts as FP") {
        img.labeling = Labeling::Completely;
        const ImageStats s = compute_image_stats(img);
        for (int t = 0; t < kNumThresholds; ++t) CHECK(s.fp[t] == 1);
    }
    SUBCASE("partly: background argmax suppresses it") {
        img.labeling = Labeling::Partly;
        const ImageStats s = compute_image_stats(img);
        for (int t = 0; t < kNumThresholds; ++t) CHECK(s.fp[t] == 0);
    }
    SUBCASE("partly: unmatched prediction inside a gt still counts") {
        img.labeling = Labeling::Partly;
        img.pred.add(3, curve(img.gt.shape(), 2, 4, 2, 8));  // second fragment on gt 1
        const ImageStats s = compute_image_stats(img);
        // the fragment loses the 1:1 match to the perfect prediction and
        // lies fully inside gt 1, so it stays a false positive
        for (int t = 0; t < kNumThresholds; ++t) CHECK(s.fp[t] == 1);
    }
}

TEST_CASE("pooled sweep equals per-image sums") {
    LabeledImage a = base_image("a");
    a.gt.add(1, curve(a.gt.shape(), 2, 4, 2, 30));
    a.pred.add(1, curve(a.gt.shape(), 2, 4, 2, 30));
    LabeledImage b = base_image("b");
    b.gt.add(1, curve(b.gt.shape(), 2, 4, 2, 30));
    b.gt.add(2, curve(b.gt.shape(), 2, 8, 2, 30));
    b.pred.add(1, curve(b.gt.shape(), 2, 4, 2, 16));

    const ImageStats sa = compute_image_stats(a);
    const ImageStats sb = compute_image_stats(b);
    const SplitScores pooled = pool_image_stats({sa, sb});

    for (int t = 0; t < kNumThresholds; ++t) {
        const std::int64_t tp = sa.tp[t] + sb.tp[t];
        const std::int64_t fp = sa.fp[t] + sb.fp[t];
        const std::int64_t fn = sa.fn[t] + sb.fn[t];
        const double expect =
            (2 * tp + fp + fn) > 0 ? 2.0 * tp / static_cast<double>(2 * tp + fp + fn) : 0.0;
        CHECK(pooled.f1[t] == expect);
    }
    CHECK(pooled.n_gt == 3);
    CHECK(pooled.S == score_S(pooled.av_f1, pooled.coverage));
}

TEST_CASE("coverage pools over all gt instances of the split") {
    LabeledImage a = base_image("a");
    a.gt.add(1, curve(a.gt.shape(), 2, 4, 2, 30));
    a.pred.add(1, curve(a.gt.shape(), 2, 4, 2, 30));
    LabeledImage b = base_image("b");
    b.gt.add(1, curve(b.gt.shape(), 2, 4, 2, 30));
    b.pred = InstanceSet(b.gt.shape());

    const SplitScores pooled =
        pool_image_stats({compute_image_stats(a), compute_image_stats(b)});
    CHECK(pooled.coverage == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("subset metrics restrict the global matching") {
    LabeledImage img = base_image("sub");
    // two overlapping gts (share a stretch), one dim gt elsewhere
    std::vector<Voxel> g1, g2;
    for (const Voxel& p : serpentine_curve(2, 4, 2, 30, 1000)) g1.push_back(p);
    for (const Voxel& p : serpentine_curve(2, 4, 20, 30, 1000)) g2.push_back(p);
    img.gt.add(1, VoxelMask::from_voxels(img.gt.shape(), g1));
    img.gt.add(2, VoxelMask::from_voxels(img.gt.shape(), g2));
    img.gt.add(3, curve(img.gt.shape(), 8, 30, 2, 30));
    img.dim_ids = {3};
    img.pred.add(1, VoxelMask::from_voxels(img.gt.shape(), g1));  // only gt1 predicted

    const SplitScores s = pool_image_stats({compute_image_stats(img)});
    REQUIRE(s.tp_ratio.has_value());
    REQUIRE(s.tp_ratio_dim.has_value());
    REQUIRE(s.tp_ratio_ovlp.has_value());
    CHECK(*s.tp_ratio == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(*s.tp_ratio_dim == 0.0);
    CHECK(*s.tp_ratio_ovlp == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(s.coverage_dim.has_value());
    CHECK(*s.coverage_dim == 0.0);
    REQUIRE(s.coverage_ovlp.has_value());
    CHECK(*s.coverage_ovlp > 0.4);
}

TEST_CASE("subset metrics absent when the subset is empty") {
    LabeledImage img = base_image("nosub");
    img.gt.add(1, curve(img.gt.shape(), 2, 4, 2, 30));
    img.pred.add(1, curve(img.gt.shape(), 2, 4, 2, 30));
    const SplitScores s = pool_image_stats({compute_image_stats(img)});
    CHECK_FALSE(s.coverage_dim.has_value());
    CHECK_FALSE(s.coverage_ovlp.has_value());
    CHECK_FALSE(s.tp_ratio_dim.has_value());
    CHECK_FALSE(s.tp_ratio_ovlp.has_value());
    CHECK(s.tp_ratio.has_value());
}

TEST_CASE("aggregate_combined averages normalized and sums counts") {
    LabeledImage a = base_image("a");
    a.gt.add(1, curve(a.gt.shape(), 2, 4, 2, 30));
    a.pred.add(1, curve(a.gt.shape(), 2, 4, 2, 30));
    LabeledImage b = base_image("b");
    b.labeling = Labeling::Partly;
    b.gt.add(1, curve(b.gt.shape(), 2, 4, 2, 30));
    b.pred.add(1, curve(b.gt.shape(), 2, 4, 2, 16));

    const SplitScores sc = pool_image_stats({compute_image_stats(a)});
    const SplitScores sp = pool_image_stats({compute_image_stats(b)});
    const SplitScores comb = aggregate_combined(sc, sp);

    CHECK(comb.av_f1 == 0.5 * (sc.av_f1 + sp.av_f1));
    CHECK(comb.coverage == 0.5 * (sc.coverage + sp.coverage));
    CHECK(comb.cl_dice_tp == 0.5 * (sc.cl_dice_tp + sp.cl_dice_tp));
    CHECK(comb.S == score_S(comb.av_f1, comb.coverage));
    CHECK(comb.false_splits == sc.false_splits + sp.false_splits);
    CHECK(comb.false_merges == sc.false_merges + sp.false_merges);
    CHECK(comb.tp_count == sc.tp_count + sp.tp_count);
    for (int t = 0; t < kNumThresholds; ++t)
        CHECK(comb.f1[t] == 0.5 * (sc.f1[t] + sp.f1[t]));

    SUBCASE("identical inputs double the counts and keep values") {
        const SplitScores twice = aggregate_combined(sc, sc);
        CHECK(twice.av_f1 == sc.av_f1);
        CHECK(twice.S == sc.S);
        CHECK(twice.tp_count == 2 * sc.tp_count);
    }
    SUBCASE("absent subset values pass through") {
        SplitScores with_dim = sc;
        with_dim.coverage_dim = 0.25;
        const SplitScores merged = aggregate_combined(with_dim, sp);
        CHECK(merged.coverage_dim == std::optional<double>(0.25));
    }
}

TEST_CASE("adding a pure-background prediction never helps") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        Phantom ph = random_filament_phantom(seed, 3, 20, 40, 0.0);
        const SplitScores before = pool_image_stats({compute_image_stats(ph.image)});

        // drop a stray prediction into empty space
        LabeledImage img = ph.image;
        InstanceSet pred(img.pred.shape());
        for (const auto& [id, mask] : img.pred.masks()) pred.add(id, mask);
        std::vector<Voxel> stray;
        for (int x = 50; x < 60; ++x) stray.push_back({60, 60, x});
        bool collides = false;
        const VoxelMask stray_mask = VoxelMask::from_voxels(img.pred.shape(), stray);
        for (const auto& [id, mask] : img.gt.masks())
            if (intersect_count(stray_mask, mask) > 0) collides = true;
        if (collides) continue;
        pred.add(999, stray_mask);
        img.pred = pred;
        const SplitScores after = pool_image_stats({compute_image_stats(img)});

        CHECK(after.coverage == before.coverage);
        CHECK(after.av_f1 <= before.av_f1 + 1e-12);
    }
}

TEST_CASE("F1 per threshold is non-increasing") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        Phantom ph = random_filament_phantom(seed, 4, 20, 50, 0.3);
        // degrade the prediction: drop one instance, trim another
        LabeledImage img = ph.image;
        InstanceSet pred(img.pred.shape());
        int k = 0;
        for (const auto& [id, mask] : img.pred.masks()) {
            if (k == 0) {
                const auto v = mask.voxels();
                pred.add(id, VoxelMask::from_voxels(
                                 img.pred.shape(),
                                 std::span<const Voxel>(v.data(), v.size() / 2 + 1)));
            } else if (k > 1) {
                pred.add(id, mask);
            }
            ++k;
        }
        img.pred = pred;
        const SplitScores s = pool_image_stats({compute_image_stats(img)});
        for (int t = 1; t < kNumThresholds; ++t) CHECK(s.f1[t] <= s.f1[t - 1] + 1e-12);
    }
}
