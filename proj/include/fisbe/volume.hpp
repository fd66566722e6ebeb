#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fisbe {

using InstanceId = std::int64_t;

/// Extents of a 3d voxel grid, ordered (z, y, x). All extents are >= 1.
struct GridShape {
    std::int64_t z = 1;
    std::int64_t y = 1;
    std::int64_t x = 1;

    bool operator==(const GridShape&) const = default;

    [[nodiscard]] std::int64_t volume() const { return z * y * x; }
    [[nodiscard]] bool contains(std::int64_t vz, std::int64_t vy, std::int64_t vx) const {
        return vz >= 0 && vz < z && vy >= 0 && vy < y && vx >= 0 && vx < x;
    }
};

/// Validates extents and throws std::invalid_argument on a degenerate shape.
GridShape make_grid_shape(std::int64_t z, std::int64_t y, std::int64_t x);

struct Voxel {
    std::int32_t z = 0;
    std::int32_t y = 0;
    std::int32_t x = 0;

    auto operator<=>(const Voxel&) const = default;
};

class VoxelMask;
class InstanceSet;
VoxelMask background_mask(const InstanceSet& s);

/// Sparse binary occupancy over a 3d grid.
///
/// Stored as a tight bounding box plus a bitmap within the box, so large
/// grids with small instances stay cheap. Immutable after construction;
/// all set algebra returns new masks.
class VoxelMask {
public:
    VoxelMask() = default;
    explicit VoxelMask(GridShape shape) : shape_(shape) {}

    /// Builds a mask from voxel coordinates (duplicates allowed).
    /// Throws std::out_of_range if any coordinate lies outside the grid.
    static VoxelMask from_voxels(GridShape shape, std::span<const Voxel> voxels);
    static VoxelMask full(GridShape shape);

    [[nodiscard]] const GridShape& shape() const { return shape_; }
    [[nodiscard]] std::int64_t count() const { return count_; }
    [[nodiscard]] bool empty() const { return count_ == 0; }
    [[nodiscard]] bool contains(std::int32_t z, std::int32_t y, std::int32_t x) const {
        if (z < box_z_ || y < box_y_ || x < box_x_) return false;
        if (z >= box_z_ + box_dz_ || y >= box_y_ + box_dy_ || x >= box_x_ + box_dx_) return false;
        const std::int64_t bit = box_index(z, y, x);
        return (words_[static_cast<std::size_t>(bit >> 6)] >> (bit & 63)) & 1u;
    }
    [[nodiscard]] bool contains(Voxel v) const { return contains(v.z, v.y, v.x); }

    /// Bounding box origin / extents (extents are 0 for an empty mask).
    [[nodiscard]] Voxel box_origin() const { return {box_z_, box_y_, box_x_}; }
    [[nodiscard]] Voxel box_extent() const { return {box_dz_, box_dy_, box_dx_}; }

    /// Visits every voxel in ascending (z, y, x) order.
    template <class F>
    void for_each(F&& fn) const {
        for (std::int32_t z = box_z_; z < box_z_ + box_dz_; ++z)
            for (std::int32_t y = box_y_; y < box_y_ + box_dy_; ++y) {
                std::int64_t bit = box_index(z, y, box_x_);
                for (std::int32_t x = box_x_; x < box_x_ + box_dx_; ++x, ++bit)
                    if ((words_[static_cast<std::size_t>(bit >> 6)] >> (bit & 63)) & 1u)
                        fn(Voxel{z, y, x});
            }
    }

    [[nodiscard]] std::vector<Voxel> voxels() const;

    bool operator==(const VoxelMask& other) const;

private:
    friend class VoxelMaskBuilder;
    friend VoxelMask background_mask(const InstanceSet& s);

    [[nodiscard]] std::int64_t box_index(std::int64_t z, std::int64_t y, std::int64_t x) const {
        return ((z - box_z_) * box_dy_ + (y - box_y_)) * box_dx_ + (x - box_x_);
    }

    GridShape shape_{};
    std::int32_t box_z_ = 0, box_y_ = 0, box_x_ = 0;
    std::int32_t box_dz_ = 0, box_dy_ = 0, box_dx_ = 0;
    std::vector<std::uint64_t> words_;
    std::int64_t count_ = 0;
};

/// Incremental construction helper; collects voxels, then freezes a mask.
class VoxelMaskBuilder {
public:
    explicit VoxelMaskBuilder(GridShape shape) : shape_(shape) {}

    void set(std::int32_t z, std::int32_t y, std::int32_t x) { voxels_.push_back({z, y, x}); }
    void set(Voxel v) { voxels_.push_back(v); }

    [[nodiscard]] VoxelMask build() const { return VoxelMask::from_voxels(shape_, voxels_); }

private:
    GridShape shape_;
    std::vector<Voxel> voxels_;
};

/// |a ∩ b|. Throws std::invalid_argument on shape mismatch.
std::int64_t intersect_count(const VoxelMask& a, const VoxelMask& b);
VoxelMask mask_intersection(const VoxelMask& a, const VoxelMask& b);
VoxelMask mask_union(const VoxelMask& a, const VoxelMask& b);
VoxelMask mask_difference(const VoxelMask& a, const VoxelMask& b);

/// Splits a mask into maximal 26-connected components, ordered by their
/// lexicographically smallest (z, y, x) voxel.
std::vector<VoxelMask> connected_components_26(const VoxelMask& m);

/// Overlap-capable set of instance masks over one grid. Ids are unique,
/// masks are non-empty and share the grid shape; masks may overlap.
class InstanceSet {
public:
    InstanceSet() = default;
    explicit InstanceSet(GridShape shape) : shape_(shape) {}

    /// Throws on duplicate id, empty mask, or shape mismatch.
    void add(InstanceId id, VoxelMask mask);

    [[nodiscard]] const GridShape& shape() const { return shape_; }
    [[nodiscard]] std::size_t size() const { return masks_.size(); }
    [[nodiscard]] bool contains(InstanceId id) const { return masks_.count(id) > 0; }
    [[nodiscard]] const VoxelMask& mask(InstanceId id) const;
    [[nodiscard]] const std::map<InstanceId, VoxelMask>& masks() const { return masks_; }
    [[nodiscard]] std::vector<InstanceId> ids() const;

private:
    GridShape shape_{};
    std::map<InstanceId, VoxelMask> masks_;
};

/// Union of all member masks.
VoxelMask foreground_union(const InstanceSet& s);

/// Complement, within the grid, of the union of all member masks.
VoxelMask background_mask(const InstanceSet& s);

/// Ids whose mask shares at least one voxel with some other member mask.
std::set<InstanceId> overlapping_ids(const InstanceSet& s);

enum class Labeling { Completely, Partly };

/// One sample: ground truth plus (optionally) a prediction to evaluate.
struct LabeledImage {
    std::string name;
    InstanceSet gt;
    InstanceSet pred;
    bool has_pred = false;
    Labeling labeling = Labeling::Completely;
    std::set<InstanceId> dim_ids;

    /// Throws if pred shape differs from gt or dim ids are unknown.
    void validate() const;
};

}  // namespace fisbe
