#include "fisbe/matching.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace fisbe {

std::optional<MatchedPair> OneToOneMatching::pair_for_gt(InstanceId gt) const {
    for (const MatchedPair& p : pairs)
        if (p.gt == gt) return p;
    return std::nullopt;
}

std::optional<MatchedPair> OneToOneMatching::pair_for_pred(InstanceId pred) const {
    for (const MatchedPair& p : pairs)
        if (p.pred == pred) return p;
    return std::nullopt;
}

std::vector<InstanceId> CoverageMatching::preds_assigned_to(InstanceId gt) const {
    std::vector<InstanceId> out;
    for (const auto& [pred, target] : assignment)
        if (target && *target == gt) out.push_back(pred);
    return out;
}

std::map<InstanceId, int> ManyToManyMatching::matches_per_gt() const {
    std::map<InstanceId, int> out;
    for (const auto& [g, p] : pairs) ++out[g];
    return out;
}

std::map<InstanceId, int> ManyToManyMatching::matches_per_pred() const {
    std::map<InstanceId, int> out;
    for (const auto& [g, p] : pairs) ++out[p];
    return out;
}

OneToOneMatching greedy_one_to_one(const PairTable& table) {
    struct Entry {
        double dice;
        InstanceId gt, pred;
    };
    std::vector<Entry> entries;
    entries.reserve(table.gt_ids().size() * table.pred_ids().size());
    for (InstanceId g : table.gt_ids())
        for (InstanceId p : table.pred_ids()) {
            const double d = table.dice(g, p);
            if (d > 0.0) entries.push_back({d, g, p});
        }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.dice != b.dice) return a.dice > b.dice;
        return std::tie(a.gt, a.pred) < std::tie(b.gt, b.pred);
    });

    OneToOneMatching out;
    std::set<InstanceId> used_gt, used_pred;
    for (const Entry& e : entries) {
        if (used_gt.count(e.gt) || used_pred.count(e.pred)) continue;
        used_gt.insert(e.gt);
        used_pred.insert(e.pred);
        out.pairs.push_back({e.gt, e.pred, e.dice});
    }
    return out;
}

CoverageMatching coverage_assign(const PairTable& table) {
    CoverageMatching out;
    for (InstanceId p : table.pred_ids()) {
        std::optional<InstanceId> best;  // background to start
        double best_value = table.precision_bg(p);
        for (InstanceId g : table.gt_ids()) {
            const double v = table.precision(p, g);
            // Foreground wins ties against background; among gts the
            // smaller id (visited first) keeps the slot.
            if (v > best_value || (v == best_value && !best)) {
                best = g;
                best_value = v;
            }
        }
        out.assignment[p] = best;
    }
    return out;
}

namespace {

// State for one instance side of the many-to-many run. Free voxels are
// tracked as explicit voxel lists plus a membership flag vector.
struct FreeSet {
    std::vector<Voxel> voxels;
    std::vector<bool> alive;
    std::int64_t alive_count = 0;

    explicit FreeSet(const VoxelMask& m) {
        voxels = m.voxels();
        alive.assign(voxels.size(), true);
        alive_count = static_cast<std::int64_t>(voxels.size());
    }

    void subtract(const VoxelMask& m) {
        for (std::size_t i = 0; i < voxels.size(); ++i)
            if (alive[i] && m.contains(voxels[i])) {
                alive[i] = false;
                --alive_count;
            }
    }

    [[nodiscard]] std::int64_t count_inside(const VoxelMask& m) const {
        std::int64_t n = 0;
        for (std::size_t i = 0; i < voxels.size(); ++i)
            if (alive[i] && m.contains(voxels[i])) ++n;
        return n;
    }
};

}  // namespace

ManyToManyMatching greedy_many_to_many(const LabeledImage& img,
                                       const SkeletonMap& gt_skeletons,
                                       double threshold) {
    if (!img.has_pred)
        throw std::invalid_argument("image " + img.name + " has no prediction to match");

    const std::vector<InstanceId> gt_ids = img.gt.ids();
    const std::vector<InstanceId> pred_ids = img.pred.ids();
    const std::size_t ng = gt_ids.size(), np = pred_ids.size();

    ManyToManyMatching out;
    out.threshold = threshold;
    if (ng == 0 || np == 0) return out;

    std::vector<FreeSet> gt_free;     // free skeleton voxels per gt
    std::vector<FreeSet> pred_free;   // free mask voxels per prediction
    std::vector<double> skel_size(ng);
    gt_free.reserve(ng);
    pred_free.reserve(np);
    for (std::size_t g = 0; g < ng; ++g) {
        gt_free.emplace_back(gt_skeletons.at(gt_ids[g]).mask);
        skel_size[g] = static_cast<double>(gt_free[g].voxels.size());
    }
    for (std::size_t p = 0; p < np; ++p) pred_free.emplace_back(img.pred.mask(pred_ids[p]));

    // Current clRecall per pair, updated eagerly on each acceptance; a lazy
    // max-heap holds (value, g, p) snapshots that are re-validated on pop.
    std::vector<double> value(ng * np);
    std::vector<bool> matched(ng * np, false);

    struct HeapEntry {
        double value;
        std::size_t g, p;
        bool operator<(const HeapEntry& other) const {
            if (value != other.value) return value < other.value;
            // Inverted id order so the smaller (gt, pred) surfaces first.
            return std::tie(g, p) > std::tie(other.g, other.p);
        }
    };
    std::priority_queue<HeapEntry> heap;

    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t p = 0; p < np; ++p) {
            const double v =
                static_cast<double>(gt_free[g].count_inside(img.pred.mask(pred_ids[p]))) /
                skel_size[g];
            value[g * np + p] = v;
            if (v > threshold) heap.push({v, g, p});
        }

    while (!heap.empty()) {
        const HeapEntry top = heap.top();
        heap.pop();
        const std::size_t idx = top.g * np + top.p;
        if (matched[idx] || top.value != value[idx]) continue;  // stale snapshot
        if (top.value <= threshold) break;

        matched[idx] = true;
        out.pairs.emplace_back(gt_ids[top.g], pred_ids[top.p]);

        gt_free[top.g].subtract(img.pred.mask(pred_ids[top.p]));
        pred_free[top.p].subtract(img.gt.mask(gt_ids[top.g]));

        // Rescore the accepted gt's row against its shrunken free skeleton.
        for (std::size_t p = 0; p < np; ++p) {
            if (p == top.p || matched[top.g * np + p]) continue;
            const double v =
                static_cast<double>(gt_free[top.g].count_inside(img.pred.mask(pred_ids[p]))) /
                skel_size[top.g];
            value[top.g * np + p] = v;
            if (v > threshold) heap.push({v, top.g, p});
        }
        // Rescore the accepted prediction's column against its free mask.
        for (std::size_t g = 0; g < ng; ++g) {
            if (g == top.g || matched[g * np + top.p]) continue;
            const double v =
                static_cast<double>(pred_free[top.p].count_inside(gt_skeletons.at(gt_ids[g]).mask)) /
                skel_size[g];
            value[g * np + top.p] = v;
            if (v > threshold) heap.push({v, g, top.p});
        }
    }
    return out;
}

}  // namespace fisbe
