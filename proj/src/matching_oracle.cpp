#include "fisbe/matching_oracle.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

namespace fisbe::oracle {

namespace {

constexpr std::size_t kMaxInstances = 64;
constexpr std::int64_t kMaxVolume = 64 * 64 * 64;

void require_bounds(const LabeledImage& img) {
    if (!within_bounds(img))
        throw std::invalid_argument("image " + img.name +
                                    " exceeds the matching-oracle size bounds");
}

using VoxelSet = std::set<Voxel>;

VoxelSet to_set(const VoxelMask& m) {
    VoxelSet s;
    m.for_each([&](Voxel v) { s.insert(v); });
    return s;
}

std::size_t set_intersection_size(const VoxelSet& a, const VoxelSet& b) {
    const VoxelSet& small = a.size() <= b.size() ? a : b;
    const VoxelSet& large = a.size() <= b.size() ? b : a;
    std::size_t n = 0;
    for (const Voxel& v : small) n += large.count(v);
    return n;
}

}  // namespace

bool within_bounds(const LabeledImage& img) {
    return img.gt.size() <= kMaxInstances && img.pred.size() <= kMaxInstances &&
           img.gt.shape().volume() <= kMaxVolume;
}

OneToOneMatching one_to_one(const LabeledImage& img) {
    require_bounds(img);

    // clDice of every pair, from scratch.
    struct Entry {
        double dice;
        InstanceId gt, pred;
    };
    std::vector<Entry> entries;
    std::map<InstanceId, VoxelSet> pred_skel, gt_skel;
    for (const auto& [pid, pm] : img.pred.masks()) pred_skel[pid] = to_set(skeletonize(pm).mask);
    for (const auto& [gid, gm] : img.gt.masks()) gt_skel[gid] = to_set(skeletonize(gm).mask);
    for (const auto& [gid, gm] : img.gt.masks())
        for (const auto& [pid, pm] : img.pred.masks()) {
            const double prec =
                static_cast<double>(set_intersection_size(pred_skel[pid], to_set(gm))) /
                static_cast<double>(pred_skel[pid].size());
            const double rec =
                static_cast<double>(set_intersection_size(gt_skel[gid], to_set(pm))) /
                static_cast<double>(gt_skel[gid].size());
            const double dice = cl_dice(prec, rec);
            entries.push_back({dice, gid, pid});
        }

    OneToOneMatching out;
    std::set<InstanceId> used_gt, used_pred;
    while (true) {
        const Entry* best = nullptr;
        for (const Entry& e : entries) {
            if (e.dice <= 0.0 || used_gt.count(e.gt) || used_pred.count(e.pred)) continue;
            if (!best || e.dice > best->dice ||
                (e.dice == best->dice && std::tie(e.gt, e.pred) < std::tie(best->gt, best->pred)))
                best = &e;
        }
        if (!best) break;
        used_gt.insert(best->gt);
        used_pred.insert(best->pred);
        out.pairs.push_back({best->gt, best->pred, best->dice});
    }
    return out;
}

CoverageMatching coverage(const LabeledImage& img) {
    require_bounds(img);
    const VoxelSet gt_bg = to_set(background_mask(img.gt));
    CoverageMatching out;
    for (const auto& [pid, pm] : img.pred.masks()) {
        const VoxelSet skel = to_set(skeletonize(pm).mask);
        const double denom = static_cast<double>(skel.size());
        std::optional<InstanceId> best;
        double best_value = static_cast<double>(set_intersection_size(skel, gt_bg)) / denom;
        for (const auto& [gid, gm] : img.gt.masks()) {
            const double v =
                static_cast<double>(set_intersection_size(skel, to_set(gm))) / denom;
            if (v > best_value || (v == best_value && !best)) {
                best = gid;
                best_value = v;
            }
        }
        out.assignment[pid] = best;
    }
    return out;
}

ManyToManyMatching many_to_many(const LabeledImage& img, double threshold) {
    require_bounds(img);
    ManyToManyMatching out;
    out.threshold = threshold;

    std::map<InstanceId, VoxelSet> gt_free, pred_free, gt_skel;
    std::map<InstanceId, double> skel_size;
    for (const auto& [gid, gm] : img.gt.masks()) {
        gt_skel[gid] = to_set(skeletonize(gm).mask);
        gt_free[gid] = gt_skel[gid];
        skel_size[gid] = static_cast<double>(gt_skel[gid].size());
    }
    for (const auto& [pid, pm] : img.pred.masks()) pred_free[pid] = to_set(pm);

    std::map<std::pair<InstanceId, InstanceId>, double> value;
    std::set<std::pair<InstanceId, InstanceId>> popped;
    for (const auto& [gid, gm] : img.gt.masks())
        for (const auto& [pid, pm] : img.pred.masks())
            value[{gid, pid}] =
                static_cast<double>(set_intersection_size(gt_skel[gid], to_set(pm))) /
                skel_size[gid];

    while (true) {
        // Full scan for the current maximum.
        const std::pair<InstanceId, InstanceId>* best = nullptr;
        double best_value = 0.0;
        for (const auto& [key, v] : value) {
            if (popped.count(key)) continue;
            if (!best || v > best_value || (v == best_value && key < *best)) {
                best = &key;
                best_value = v;
            }
        }
        if (!best || best_value <= threshold) break;

        const auto [gid, pid] = *best;
        popped.insert(*best);
        out.pairs.emplace_back(gid, pid);

        VoxelSet next_gt_free;
        for (const Voxel& v : gt_free[gid])
            if (!img.pred.mask(pid).contains(v)) next_gt_free.insert(v);
        gt_free[gid] = std::move(next_gt_free);

        VoxelSet next_pred_free;
        for (const Voxel& v : pred_free[pid])
            if (!img.gt.mask(gid).contains(v)) next_pred_free.insert(v);
        pred_free[pid] = std::move(next_pred_free);

        for (auto& [key, v] : value) {
            if (popped.count(key)) continue;
            if (key.first == gid)
                v = static_cast<double>(
                        set_intersection_size(gt_free[gid], to_set(img.pred.mask(key.second)))) /
                    skel_size[gid];
            if (key.second == pid)
                v = static_cast<double>(set_intersection_size(gt_skel[key.first], pred_free[pid])) /
                    skel_size[key.first];
        }
    }
    return out;
}

}  // namespace fisbe::oracle
