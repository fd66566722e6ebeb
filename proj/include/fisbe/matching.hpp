#pragma once

#include <optional>
#include <vector>

#include "fisbe/localize.hpp"

namespace fisbe {

struct MatchedPair {
    InstanceId gt = 0;
    InstanceId pred = 0;
    double cl_dice = 0.0;
};

/// Greedy 1:1 matching over clDice scores; zero-score pairs never match.
struct OneToOneMatching {
    std::vector<MatchedPair> pairs;  // in acceptance order

    [[nodiscard]] std::optional<MatchedPair> pair_for_gt(InstanceId gt) const;
    [[nodiscard]] std::optional<MatchedPair> pair_for_pred(InstanceId pred) const;
};

/// Every prediction assigned to its highest-clPrecision target; nullopt
/// means the gt background won.
struct CoverageMatching {
    std::map<InstanceId, std::optional<InstanceId>> assignment;

    [[nodiscard]] std::vector<InstanceId> preds_assigned_to(InstanceId gt) const;
};

/// Result of the greedy many-to-many matching run at one clRecall threshold.
struct ManyToManyMatching {
    double threshold = 0.0;
    std::vector<std::pair<InstanceId, InstanceId>> pairs;  // (gt, pred), acceptance order

    [[nodiscard]] std::map<InstanceId, int> matches_per_gt() const;
    [[nodiscard]] std::map<InstanceId, int> matches_per_pred() const;
};

/// Sorts all foreground clDice values descending (ties by ascending
/// (gt, pred) id) and accepts a pair iff neither endpoint is taken and
/// clDice > 0.
OneToOneMatching greedy_one_to_one(const PairTable& table);

/// Assigns each prediction to the argmax of clPrecision over gt instances
/// plus background. Ties prefer foreground over background, then the
/// smaller gt id.
CoverageMatching coverage_assign(const PairTable& table);

/// Greedy many-to-many matching with free-pixel bookkeeping.
///
/// Repeatedly accepts the pair with the highest updated clRecall while it
/// strictly exceeds the threshold. Accepting (g, p) removes p's voxels from
/// g's free skeleton and g's voxels from p's free mask; rows sharing g are
/// rescored against g's free skeleton, columns sharing p against p's free
/// mask.
ManyToManyMatching greedy_many_to_many(const LabeledImage& img,
                                       const SkeletonMap& gt_skeletons,
                                       double threshold);

}  // namespace fisbe
