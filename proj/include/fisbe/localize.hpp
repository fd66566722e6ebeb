#pragma once

#include <map>
#include <vector>

#include "fisbe/skeleton.hpp"
#include "fisbe/volume.hpp"

namespace fisbe {

/// Fraction of the source's skeleton voxels that lie inside the target.
/// The skeleton must belong to the prediction being scored.
double cl_precision(const Skeleton& pred_skeleton, const VoxelMask& target);

/// Fraction of the gt skeleton covered by the target mask.
double cl_recall(const Skeleton& gt_skeleton, const VoxelMask& target);

/// Harmonic mean of the two; defined as 0 when both vanish.
double cl_dice(double precision, double recall);

using SkeletonMap = std::map<InstanceId, Skeleton>;

/// Per-image cache of localization scores for all (prediction, gt) pairs.
///
/// Background enters as an extra clPrecision target (gt background) and an
/// extra clRecall target (predicted background); it is never skeletonized
/// and has no clDice entry.
class PairTable {
public:
    PairTable(const LabeledImage& img, const SkeletonMap& gt_skeletons,
              const SkeletonMap& pred_skeletons);

    [[nodiscard]] const std::vector<InstanceId>& gt_ids() const { return gt_ids_; }
    [[nodiscard]] const std::vector<InstanceId>& pred_ids() const { return pred_ids_; }

    [[nodiscard]] double precision(InstanceId pred, InstanceId gt) const;
    [[nodiscard]] double precision_bg(InstanceId pred) const;
    [[nodiscard]] double recall(InstanceId gt, InstanceId pred) const;
    [[nodiscard]] double recall_bg(InstanceId gt) const;
    [[nodiscard]] double dice(InstanceId gt, InstanceId pred) const;

private:
    [[nodiscard]] std::size_t gt_index(InstanceId id) const;
    [[nodiscard]] std::size_t pred_index(InstanceId id) const;

    std::vector<InstanceId> gt_ids_;
    std::vector<InstanceId> pred_ids_;
    std::map<InstanceId, std::size_t> gt_lookup_;
    std::map<InstanceId, std::size_t> pred_lookup_;
    // Row-major [pred][gt]; the trailing column holds the background target.
    std::vector<double> precision_;
    // Row-major [gt][pred]; trailing column is the predicted background.
    std::vector<double> recall_;
    std::vector<double> dice_;  // [gt][pred]
};

/// Computes all skeletons of an image and its full pair table.
/// Requires img.has_pred.
PairTable build_pair_table(const LabeledImage& img, const SkeletonMap& gt_skeletons,
                           const SkeletonMap& pred_skeletons);

}  // namespace fisbe
