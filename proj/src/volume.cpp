#include "fisbe/volume.hpp"

#include <algorithm>
#include <stdexcept>

namespace fisbe {

GridShape make_grid_shape(std::int64_t z, std::int64_t y, std::int64_t x) {
    if (z < 1 || y < 1 || x < 1)
        throw std::invalid_argument("grid shape extents must all be >= 1");
    return GridShape{z, y, x};
}

VoxelMask VoxelMask::from_voxels(GridShape shape, std::span<const Voxel> voxels) {
    VoxelMask m(shape);
    if (voxels.empty()) return m;

    Voxel lo = voxels.front(), hi = voxels.front();
    for (const Voxel& v : voxels) {
        if (!shape.contains(v.z, v.y, v.x))
            throw std::out_of_range("voxel coordinate lies outside the grid");
        lo.z = std::min(lo.z, v.z); lo.y = std::min(lo.y, v.y); lo.x = std::min(lo.x, v.x);
        hi.z = std::max(hi.z, v.z); hi.y = std::max(hi.y, v.y); hi.x = std::max(hi.x, v.x);
    }
    m.box_z_ = lo.z; m.box_y_ = lo.y; m.box_x_ = lo.x;
    m.box_dz_ = hi.z - lo.z + 1;
    m.box_dy_ = hi.y - lo.y + 1;
    m.box_dx_ = hi.x - lo.x + 1;
    const std::int64_t bits =
        static_cast<std::int64_t>(m.box_dz_) * m.box_dy_ * m.box_dx_;
    m.words_.assign(static_cast<std::size_t>((bits + 63) / 64), 0);
    for (const Voxel& v : voxels) {
        const std::int64_t bit = m.box_index(v.z, v.y, v.x);
        m.words_[static_cast<std::size_t>(bit >> 6)] |= std::uint64_t{1} << (bit & 63);
    }
    for (std::uint64_t w : m.words_) m.count_ += __builtin_popcountll(w);
    return m;
}

VoxelMask VoxelMask::full(GridShape shape) {
    VoxelMask m(shape);
    m.box_dz_ = static_cast<std::int32_t>(shape.z);
    m.box_dy_ = static_cast<std::int32_t>(shape.y);
    m.box_dx_ = static_cast<std::int32_t>(shape.x);
    const std::int64_t bits = shape.volume();
    m.words_.assign(static_cast<std::size_t>((bits + 63) / 64), ~std::uint64_t{0});
    if (bits & 63) m.words_.back() = (std::uint64_t{1} << (bits & 63)) - 1;
    m.count_ = bits;
    return m;
}

std::vector<Voxel> VoxelMask::voxels() const {
    std::vector<Voxel> out;
    out.reserve(static_cast<std::size_t>(count_));
    for_each([&](Voxel v) { out.push_back(v); });
    return out;
}

bool VoxelMask::operator==(const VoxelMask& other) const {
    if (shape_ != other.shape_ || count_ != other.count_) return false;
    if (count_ == 0) return true;
    bool same = true;
    for_each([&](Voxel v) { same = same && other.contains(v); });
    return same;
}

namespace {

void require_same_shape(const VoxelMask& a, const VoxelMask& b) {
    if (!(a.shape() == b.shape()))
        throw std::invalid_argument("voxel masks have mismatching grid shapes");
}

struct Box {
    std::int32_t z0, y0, x0, z1, y1, x1;  // half-open
    [[nodiscard]] bool empty() const { return z0 >= z1 || y0 >= y1 || x0 >= x1; }
};

Box box_overlap(const VoxelMask& a, const VoxelMask& b) {
    const Voxel ao = a.box_origin(), ae = a.box_extent();
    const Voxel bo = b.box_origin(), be = b.box_extent();
    return Box{std::max(ao.z, bo.z), std::max(ao.y, bo.y), std::max(ao.x, bo.x),
               std::min(ao.z + ae.z, bo.z + be.z),
               std::min(ao.y + ae.y, bo.y + be.y),
               std::min(ao.x + ae.x, bo.x + be.x)};
}

}  // namespace

std::int64_t intersect_count(const VoxelMask& a, const VoxelMask& b) {
    require_same_shape(a, b);
    const Box ov = box_overlap(a, b);
    if (ov.empty()) return 0;
    // Iterate the sparser mask inside the overlap window and probe the other.
    const VoxelMask& scan = a.count() <= b.count() ? a : b;
    const VoxelMask& probe = a.count() <= b.count() ? b : a;
    std::int64_t n = 0;
    for (std::int32_t z = ov.z0; z < ov.z1; ++z)
        for (std::int32_t y = ov.y0; y < ov.y1; ++y)
            for (std::int32_t x = ov.x0; x < ov.x1; ++x)
                if (scan.contains(z, y, x) && probe.contains(z, y, x)) ++n;
    return n;
}

VoxelMask mask_intersection(const VoxelMask& a, const VoxelMask& b) {
    require_same_shape(a, b);
    VoxelMaskBuilder out(a.shape());
    const Box ov = box_overlap(a, b);
    if (!ov.empty())
        for (std::int32_t z = ov.z0; z < ov.z1; ++z)
            for (std::int32_t y = ov.y0; y < ov.y1; ++y)
                for (std::int32_t x = ov.x0; x < ov.x1; ++x)
                    if (a.contains(z, y, x) && b.contains(z, y, x)) out.set(z, y, x);
    return out.build();
}

VoxelMask mask_union(const VoxelMask& a, const VoxelMask& b) {
    require_same_shape(a, b);
    VoxelMaskBuilder out(a.shape());
    a.for_each([&](Voxel v) { out.set(v); });
    b.for_each([&](Voxel v) { out.set(v); });
    return out.build();
}

VoxelMask mask_difference(const VoxelMask& a, const VoxelMask& b) {
    require_same_shape(a, b);
    VoxelMaskBuilder out(a.shape());
    a.for_each([&](Voxel v) {
        if (!b.contains(v)) out.set(v);
    });
    return out.build();
}

std::vector<VoxelMask> connected_components_26(const VoxelMask& m) {
    std::vector<VoxelMask> components;
    if (m.empty()) return components;

    const Voxel o = m.box_origin(), e = m.box_extent();
    const std::int64_t box_bits =
        static_cast<std::int64_t>(e.z) * e.y * e.x;
    std::vector<bool> visited(static_cast<std::size_t>(box_bits), false);
    const auto idx = [&](std::int32_t z, std::int32_t y, std::int32_t x) {
        return (static_cast<std::int64_t>(z - o.z) * e.y + (y - o.y)) * e.x + (x - o.x);
    };

    std::vector<Voxel> stack, member;
    // Raster order finds each component at its lexicographically smallest voxel.
    m.for_each([&](Voxel seed) {
        if (visited[static_cast<std::size_t>(idx(seed.z, seed.y, seed.x))]) return;
        member.clear();
        stack.assign(1, seed);
        visited[static_cast<std::size_t>(idx(seed.z, seed.y, seed.x))] = true;
        while (!stack.empty()) {
            const Voxel v = stack.back();
            stack.pop_back();
            member.push_back(v);
            for (std::int32_t dz = -1; dz <= 1; ++dz)
                for (std::int32_t dy = -1; dy <= 1; ++dy)
                    for (std::int32_t dx = -1; dx <= 1; ++dx) {
                        if (dz == 0 && dy == 0 && dx == 0) continue;
                        const Voxel n{v.z + dz, v.y + dy, v.x + dx};
                        if (!m.contains(n)) continue;
                        auto seen = visited[static_cast<std::size_t>(idx(n.z, n.y, n.x))];
                        if (seen) continue;
                        visited[static_cast<std::size_t>(idx(n.z, n.y, n.x))] = true;
                        stack.push_back(n);
                    }
        }
        components.push_back(VoxelMask::from_voxels(m.shape(), member));
    });
    return components;
}

void InstanceSet::add(InstanceId id, VoxelMask mask) {
    if (masks_.count(id))
        throw std::invalid_argument("duplicate instance id " + std::to_string(id));
    if (mask.empty())
        throw std::invalid_argument("instance " + std::to_string(id) + " has an empty mask");
    if (!(mask.shape() == shape_))
        throw std::invalid_argument("instance " + std::to_string(id) +
                                    " mask shape differs from the set's grid");
    masks_.emplace(id, std::move(mask));
}

const VoxelMask& InstanceSet::mask(InstanceId id) const {
    auto it = masks_.find(id);
    if (it == masks_.end())
        throw std::out_of_range("unknown instance id " + std::to_string(id));
    return it->second;
}

std::vector<InstanceId> InstanceSet::ids() const {
    std::vector<InstanceId> out;
    out.reserve(masks_.size());
    for (const auto& [id, mask] : masks_) out.push_back(id);
    return out;
}

VoxelMask foreground_union(const InstanceSet& s) {
    VoxelMaskBuilder out(s.shape());
    for (const auto& [id, mask] : s.masks())
        mask.for_each([&](Voxel v) { out.set(v); });
    return out.build();
}

VoxelMask background_mask(const InstanceSet& s) {
    // Word-level complement over the whole grid; member masks only clear bits.
    VoxelMask out = VoxelMask::full(s.shape());
    for (const auto& [id, mask] : s.masks())
        mask.for_each([&](Voxel v) {
            const std::int64_t bit = out.box_index(v.z, v.y, v.x);
            std::uint64_t& word = out.words_[static_cast<std::size_t>(bit >> 6)];
            const std::uint64_t flag = std::uint64_t{1} << (bit & 63);
            if (word & flag) {
                word &= ~flag;
                --out.count_;
            }
        });
    return out;
}

std::set<InstanceId> overlapping_ids(const InstanceSet& s) {
    std::set<InstanceId> out;
    const auto ids = s.ids();
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            if (out.count(ids[i]) && out.count(ids[j])) continue;
            if (intersect_count(s.mask(ids[i]), s.mask(ids[j])) > 0) {
                out.insert(ids[i]);
                out.insert(ids[j]);
            }
        }
    return out;
}

void LabeledImage::validate() const {
    if (has_pred && !(pred.shape() == gt.shape()))
        throw std::invalid_argument("image " + name + ": prediction grid differs from gt grid");
    for (InstanceId id : dim_ids)
        if (!gt.contains(id))
            throw std::invalid_argument("image " + name + ": dim instance " +
                                        std::to_string(id) + " not present in gt");
}

}  // namespace fisbe
