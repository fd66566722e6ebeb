#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fisbe/matching.hpp"

namespace fisbe {

inline constexpr int kNumThresholds = 9;
inline constexpr double kFalseSplitThreshold = 0.05;
inline constexpr double kFalseMergeThreshold = 0.1;
inline constexpr double kTruePositiveDice = 0.5;

/// The nine clDice thresholds 0.1 .. 0.9.
std::array<double, kNumThresholds> dice_thresholds();

/// Everything one image contributes to split-level pooling.
struct ImageStats {
    std::string name;
    Labeling labeling = Labeling::Completely;
    std::int64_t n_gt = 0;
    std::int64_t n_pred = 0;
    std::array<std::int64_t, kNumThresholds> tp{};
    std::array<std::int64_t, kNumThresholds> fp{};  // FP_partly on partly images
    std::array<std::int64_t, kNumThresholds> fn{};
    std::int64_t false_splits = 0;
    std::int64_t false_merges = 0;
    std::vector<double> tp_cl_dice;  // clDice of 1:1 pairs above 0.5

    struct GtRow {
        InstanceId id = 0;
        double coverage = 0.0;  // clRecall against the union of assigned preds
        bool matched_05 = false;
        bool dim = false;
        bool overlapping = false;
    };
    std::vector<GtRow> gt_rows;
};

/// Pooled scores for one image group (a split's completely or partly set,
/// or their combination).
struct SplitScores {
    double S = 0.0;
    double av_f1 = 0.0;
    double coverage = 0.0;
    double cl_dice_tp = 0.0;
    std::array<double, kNumThresholds> f1{};
    std::int64_t tp_count = 0;  // at clDice > 0.5
    std::int64_t fp_count = 0;
    std::int64_t fn_count = 0;
    std::int64_t false_splits = 0;
    std::int64_t false_merges = 0;
    std::int64_t n_gt = 0;
    std::int64_t n_pred = 0;
    std::int64_t n_images = 0;
    // Subset metrics; absent when the subset is empty.
    std::optional<double> coverage_dim;
    std::optional<double> coverage_ovlp;
    std::optional<double> tp_ratio;
    std::optional<double> tp_ratio_dim;
    std::optional<double> tp_ratio_ovlp;
};

/// 0.5 * avF1 + 0.5 * C.
double score_S(double av_f1, double coverage);

/// Computes one image's contribution: pair table, the three matchings, and
/// the per-threshold / per-gt statistics.
ImageStats compute_image_stats(const LabeledImage& img);

/// Pools per-image statistics into split scores. TP/FP/FN are summed per
/// threshold before F1 is formed; coverage averages over all gt instances
/// of the group.
SplitScores pool_image_stats(const std::vector<ImageStats>& images);

/// Combines the completely- and partly labeled groups of one split:
/// normalized measures are averaged, counting measures summed. A subset
/// value absent on one side passes through from the other.
SplitScores aggregate_combined(const SplitScores& completely, const SplitScores& partly);

}  // namespace fisbe
