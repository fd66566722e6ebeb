#include "fisbe/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace fisbe {

std::array<double, kNumThresholds> dice_thresholds() {
    std::array<double, kNumThresholds> out{};
    for (int i = 0; i < kNumThresholds; ++i) out[static_cast<std::size_t>(i)] = (i + 1) / 10.0;
    return out;
}

double score_S(double av_f1, double coverage) { return 0.5 * av_f1 + 0.5 * coverage; }

ImageStats compute_image_stats(const LabeledImage& img) {
    img.validate();
    if (!img.has_pred)
        throw std::invalid_argument("image " + img.name + " has no prediction to evaluate");

    ImageStats stats;
    stats.name = img.name;
    stats.labeling = img.labeling;
    stats.n_gt = static_cast<std::int64_t>(img.gt.size());
    stats.n_pred = static_cast<std::int64_t>(img.pred.size());

    const SkeletonMap gt_skels = skeleton_cache(img.gt);
    const SkeletonMap pred_skels = skeleton_cache(img.pred);
    const PairTable table(img, gt_skels, pred_skels);

    const OneToOneMatching one_to_one = greedy_one_to_one(table);
    const CoverageMatching cover = coverage_assign(table);
    const ManyToManyMatching fs_match =
        greedy_many_to_many(img, gt_skels, kFalseSplitThreshold);
    const ManyToManyMatching fm_match =
        greedy_many_to_many(img, gt_skels, kFalseMergeThreshold);

    const auto thresholds = dice_thresholds();

    // Per-threshold TP over matched pairs, FP per labeling mode, FN.
    for (int t = 0; t < kNumThresholds; ++t) {
        const double th = thresholds[static_cast<std::size_t>(t)];
        std::int64_t tp = 0;
        for (const MatchedPair& pair : one_to_one.pairs)
            if (pair.cl_dice > th) ++tp;
        stats.tp[static_cast<std::size_t>(t)] = tp;
        stats.fn[static_cast<std::size_t>(t)] = stats.n_gt - tp;
        if (img.labeling == Labeling::Completely) {
            stats.fp[static_cast<std::size_t>(t)] = stats.n_pred - tp;
        } else {
            // Only predictions that primarily lie within a gt instance count.
            std::int64_t fp = 0;
            for (InstanceId p : table.pred_ids()) {
                const auto pair = one_to_one.pair_for_pred(p);
                if (pair && pair->cl_dice > th) continue;
                if (cover.assignment.at(p).has_value()) ++fp;
            }
            stats.fp[static_cast<std::size_t>(t)] = fp;
        }
    }

    for (const MatchedPair& pair : one_to_one.pairs)
        if (pair.cl_dice > kTruePositiveDice) stats.tp_cl_dice.push_back(pair.cl_dice);

    const auto per_gt_fs = fs_match.matches_per_gt();
    for (const auto& [gt, n] : per_gt_fs) stats.false_splits += std::max(n - 1, 0);
    const auto per_pred_fm = fm_match.matches_per_pred();
    for (const auto& [pred, n] : per_pred_fm) stats.false_merges += std::max(n - 1, 0);

    const std::set<InstanceId> ovlp = overlapping_ids(img.gt);
    for (InstanceId g : table.gt_ids()) {
        ImageStats::GtRow row;
        row.id = g;
        row.dim = img.dim_ids.count(g) > 0;
        row.overlapping = ovlp.count(g) > 0;
        const auto pair = one_to_one.pair_for_gt(g);
        row.matched_05 = pair && pair->cl_dice > kTruePositiveDice;

        // clRecall against the union of assigned predictions, counted on the
        // skeleton so overlapping predictions are not double counted.
        const std::vector<InstanceId> assigned = cover.preds_assigned_to(g);
        if (!assigned.empty()) {
            const VoxelMask& skel = gt_skels.at(g).mask;
            std::int64_t covered = 0;
            skel.for_each([&](Voxel v) {
                for (InstanceId p : assigned)
                    if (img.pred.mask(p).contains(v)) {
                        ++covered;
                        return;
                    }
            });
            row.coverage = static_cast<double>(covered) / static_cast<double>(skel.count());
        }
        stats.gt_rows.push_back(row);
    }
    return stats;
}

SplitScores pool_image_stats(const std::vector<ImageStats>& images) {
    SplitScores out;
    out.n_images = static_cast<std::int64_t>(images.size());

    std::array<std::int64_t, kNumThresholds> tp{}, fp{}, fn{};
    double coverage_sum = 0.0, coverage_dim_sum = 0.0, coverage_ovlp_sum = 0.0;
    std::int64_t n_dim = 0, n_ovlp = 0;
    std::int64_t matched_05 = 0, matched_05_dim = 0, matched_05_ovlp = 0;
    double dice_sum = 0.0;
    std::int64_t dice_n = 0;

    for (const ImageStats& s : images) {
        out.n_gt += s.n_gt;
        out.n_pred += s.n_pred;
        out.false_splits += s.false_splits;
        out.false_merges += s.false_merges;
        for (int t = 0; t < kNumThresholds; ++t) {
            const auto i = static_cast<std::size_t>(t);
            tp[i] += s.tp[i];
            fp[i] += s.fp[i];
            fn[i] += s.fn[i];
        }
        for (double d : s.tp_cl_dice) {
            dice_sum += d;
            ++dice_n;
        }
        for (const ImageStats::GtRow& row : s.gt_rows) {
            coverage_sum += row.coverage;
            if (row.matched_05) ++matched_05;
            if (row.dim) {
                ++n_dim;
                coverage_dim_sum += row.coverage;
                if (row.matched_05) ++matched_05_dim;
            }
            if (row.overlapping) {
                ++n_ovlp;
                coverage_ovlp_sum += row.coverage;
                if (row.matched_05) ++matched_05_ovlp;
            }
        }
    }

    double f1_sum = 0.0;
    for (int t = 0; t < kNumThresholds; ++t) {
        const auto i = static_cast<std::size_t>(t);
        const std::int64_t denom = 2 * tp[i] + fp[i] + fn[i];
        out.f1[i] = denom > 0 ? 2.0 * static_cast<double>(tp[i]) / static_cast<double>(denom)
                              : 0.0;
        f1_sum += out.f1[i];
    }
    out.av_f1 = f1_sum / kNumThresholds;
    out.coverage = out.n_gt > 0 ? coverage_sum / static_cast<double>(out.n_gt) : 0.0;
    out.cl_dice_tp = dice_n > 0 ? dice_sum / static_cast<double>(dice_n) : 0.0;
    out.S = score_S(out.av_f1, out.coverage);
    // Counts at the 0.5 threshold (index 4) mirror the sweep.
    out.tp_count = tp[4];
    out.fp_count = fp[4];
    out.fn_count = fn[4];
    if (out.n_gt > 0) out.tp_ratio = static_cast<double>(matched_05) / static_cast<double>(out.n_gt);
    if (n_dim > 0) {
        out.coverage_dim = coverage_dim_sum / static_cast<double>(n_dim);
        out.tp_ratio_dim = static_cast<double>(matched_05_dim) / static_cast<double>(n_dim);
    }
    if (n_ovlp > 0) {
        out.coverage_ovlp = coverage_ovlp_sum / static_cast<double>(n_ovlp);
        out.tp_ratio_ovlp = static_cast<double>(matched_05_ovlp) / static_cast<double>(n_ovlp);
    }
    return out;
}

namespace {

std::optional<double> combine_optional(const std::optional<double>& a,
                                       const std::optional<double>& b) {
    if (a && b) return 0.5 * (*a + *b);
    if (a) return a;
    return b;
}

}  // namespace

SplitScores aggregate_combined(const SplitScores& completely, const SplitScores& partly) {
    SplitScores out;
    out.av_f1 = 0.5 * (completely.av_f1 + partly.av_f1);
    out.coverage = 0.5 * (completely.coverage + partly.coverage);
    out.cl_dice_tp = 0.5 * (completely.cl_dice_tp + partly.cl_dice_tp);
    out.S = score_S(out.av_f1, out.coverage);
    for (int t = 0; t < kNumThresholds; ++t) {
        const auto i = static_cast<std::size_t>(t);
        out.f1[i] = 0.5 * (completely.f1[i] + partly.f1[i]);
    }
    out.tp_count = completely.tp_count + partly.tp_count;
    out.fp_count = completely.fp_count + partly.fp_count;
    out.fn_count = completely.fn_count + partly.fn_count;
    out.false_splits = completely.false_splits + partly.false_splits;
    out.false_merges = completely.false_merges + partly.false_merges;
    out.n_gt = completely.n_gt + partly.n_gt;
    out.n_pred = completely.n_pred + partly.n_pred;
    out.n_images = completely.n_images + partly.n_images;
    out.coverage_dim = combine_optional(completely.coverage_dim, partly.coverage_dim);
    out.coverage_ovlp = combine_optional(completely.coverage_ovlp, partly.coverage_ovlp);
    out.tp_ratio = combine_optional(completely.tp_ratio, partly.tp_ratio);
    out.tp_ratio_dim = combine_optional(completely.tp_ratio_dim, partly.tp_ratio_dim);
    out.tp_ratio_ovlp = combine_optional(completely.tp_ratio_ovlp, partly.tp_ratio_ovlp);
    return out;
}

}  // namespace fisbe
