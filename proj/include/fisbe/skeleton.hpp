#pragma once

#include <map>

#include "fisbe/volume.hpp"

namespace fisbe {

/// Thinned centerline of one instance mask.
struct Skeleton {
    VoxelMask mask;
    std::int64_t source_count = 0;
};

/// Medial-surface axial thinning of a 3d binary mask (Lee et al. 1994).
///
/// Iteratively deletes simple border voxels (Euler-invariant,
/// connectivity-preserving, non-endpoint) over the six axial sub-iterations
/// until a fixpoint. The voxel sets produced match the reference
/// implementation shipped with established scientific imaging stacks
/// (ITK / Fiji Skeletonize3D / scikit-image, method "lee").
///
/// Throws std::invalid_argument on an empty input mask.
Skeleton skeletonize(const VoxelMask& m);

/// One skeleton per instance, each mask thinned exactly once.
std::map<InstanceId, Skeleton> skeleton_cache(const InstanceSet& s);

}  // namespace fisbe
