#include "fisbe/localize.hpp"

#include <stdexcept>

namespace fisbe {

double cl_precision(const Skeleton& pred_skeleton, const VoxelMask& target) {
    if (pred_skeleton.mask.empty())
        throw std::invalid_argument("clPrecision needs a non-empty skeleton");
    return static_cast<double>(intersect_count(pred_skeleton.mask, target)) /
           static_cast<double>(pred_skeleton.mask.count());
}

double cl_recall(const Skeleton& gt_skeleton, const VoxelMask& target) {
    if (gt_skeleton.mask.empty())
        throw std::invalid_argument("clRecall needs a non-empty skeleton");
    return static_cast<double>(intersect_count(gt_skeleton.mask, target)) /
           static_cast<double>(gt_skeleton.mask.count());
}

double cl_dice(double precision, double recall) {
    const double denom = precision + recall;
    if (denom == 0.0) return 0.0;
    return 2.0 * precision * recall / denom;
}

PairTable::PairTable(const LabeledImage& img, const SkeletonMap& gt_skeletons,
                     const SkeletonMap& pred_skeletons) {
    if (!img.has_pred)
        throw std::invalid_argument("image " + img.name + " has no prediction to evaluate");
    gt_ids_ = img.gt.ids();
    pred_ids_ = img.pred.ids();
    for (std::size_t i = 0; i < gt_ids_.size(); ++i) gt_lookup_[gt_ids_[i]] = i;
    for (std::size_t i = 0; i < pred_ids_.size(); ++i) pred_lookup_[pred_ids_[i]] = i;

    const std::size_t ng = gt_ids_.size(), np = pred_ids_.size();
    precision_.assign(np * (ng + 1), 0.0);
    recall_.assign(ng * (np + 1), 0.0);
    dice_.assign(ng * np, 0.0);

    const VoxelMask gt_bg = background_mask(img.gt);
    const VoxelMask pred_bg = background_mask(img.pred);

    for (std::size_t p = 0; p < np; ++p) {
        const Skeleton& skel_p = pred_skeletons.at(pred_ids_[p]);
        for (std::size_t g = 0; g < ng; ++g)
            precision_[p * (ng + 1) + g] = cl_precision(skel_p, img.gt.mask(gt_ids_[g]));
        precision_[p * (ng + 1) + ng] = cl_precision(skel_p, gt_bg);
    }
    for (std::size_t g = 0; g < ng; ++g) {
        const Skeleton& skel_g = gt_skeletons.at(gt_ids_[g]);
        for (std::size_t p = 0; p < np; ++p)
            recall_[g * (np + 1) + p] = cl_recall(skel_g, img.pred.mask(pred_ids_[p]));
        recall_[g * (np + 1) + np] = cl_recall(skel_g, pred_bg);
    }
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t p = 0; p < np; ++p)
            dice_[g * np + p] =
                cl_dice(precision_[p * (ng + 1) + g], recall_[g * (np + 1) + p]);
}

std::size_t PairTable::gt_index(InstanceId id) const {
    auto it = gt_lookup_.find(id);
    if (it == gt_lookup_.end())
        throw std::out_of_range("unknown gt instance " + std::to_string(id));
    return it->second;
}

std::size_t PairTable::pred_index(InstanceId id) const {
    auto it = pred_lookup_.find(id);
    if (it == pred_lookup_.end())
        throw std::out_of_range("unknown predicted instance " + std::to_string(id));
    return it->second;
}

double PairTable::precision(InstanceId pred, InstanceId gt) const {
    return precision_[pred_index(pred) * (gt_ids_.size() + 1) + gt_index(gt)];
}

double PairTable::precision_bg(InstanceId pred) const {
    return precision_[pred_index(pred) * (gt_ids_.size() + 1) + gt_ids_.size()];
}

double PairTable::recall(InstanceId gt, InstanceId pred) const {
    return recall_[gt_index(gt) * (pred_ids_.size() + 1) + pred_index(pred)];
}

double PairTable::recall_bg(InstanceId gt) const {
    return recall_[gt_index(gt) * (pred_ids_.size() + 1) + pred_ids_.size()];
}

double PairTable::dice(InstanceId gt, InstanceId pred) const {
    return dice_[gt_index(gt) * pred_ids_.size() + pred_index(pred)];
}

PairTable build_pair_table(const LabeledImage& img, const SkeletonMap& gt_skeletons,
                           const SkeletonMap& pred_skeletons) {
    return PairTable(img, gt_skeletons, pred_skeletons);
}

}  // namespace fisbe
