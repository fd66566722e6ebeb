#include "fisbe/skeleton.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fisbe {
namespace {

// Euler characteristic deltas per octant configuration (Lee et al. 1994).
// Indexed by the 8-bit octant occupancy (center voxel contributes bit 0,
// which is always set). The table matches the reference thinning
// implementations bit for bit; deleting a voxel is Euler-invariant iff the
// deltas of its eight octants sum to zero.
constexpr std::array<int, 256> kEulerDelta = {
    0,  1, 0, -1, 0, -1, 0,  1, 0, -3, 0, -1, 0, -1, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
    0, -3, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
    0, -3, 0,  3, 0, -1, 0,  1, 0,  1, 0,  3, 0, -1, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
    0,  1, 0,  3, 0,  3, 0,  1, 0,  5, 0,  3, 0,  3, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
    0, -7, 0, -1, 0, -1, 0,  1, 0, -3, 0, -1, 0, -1, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
    0, -3, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
    0, -3, 0,  3, 0, -1, 0,  1, 0,  1, 0,  3, 0, -1, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
    0,  1, 0,  3, 0,  3, 0,  1, 0,  5, 0,  3, 0,  3, 0,  1,
    0, -1, 0,  1, 0,  1, 0, -1, 0,  3, 0,  1, 0,  1, 0, -1,
};

// 3x3x3 neighborhood cell index: (dz+1)*9 + (dx+1)*3 + (dy+1). Center = 13.
// The x-before-y layout follows the reference implementation; the octant
// table below is expressed in it.
constexpr int nb_index(int dz, int dy, int dx) {
    return (dz + 1) * 9 + (dx + 1) * 3 + (dy + 1);
}

struct OctantCell {
    int nb;        // neighborhood cell index
    unsigned bit;  // contribution to the octant's LUT index
};

// Eight octants of seven non-center cells each, with the per-cell bit
// weights the Euler table is indexed by.
constexpr OctantCell kOctants[8][7] = {
    {{2, 128}, {1, 64}, {11, 32}, {10, 16}, {5, 8}, {4, 4}, {14, 2}},
    {{0, 128}, {9, 64}, {3, 32}, {12, 16}, {1, 8}, {10, 4}, {4, 2}},
    {{8, 128}, {7, 64}, {17, 32}, {16, 16}, {5, 8}, {4, 4}, {14, 2}},
    {{6, 128}, {15, 64}, {7, 32}, {16, 16}, {3, 8}, {12, 4}, {4, 2}},
    {{20, 128}, {23, 64}, {19, 32}, {22, 16}, {11, 8}, {14, 4}, {10, 2}},
    {{18, 128}, {21, 64}, {9, 32}, {12, 16}, {19, 8}, {22, 4}, {10, 2}},
    {{26, 128}, {23, 64}, {17, 32}, {14, 16}, {25, 8}, {22, 4}, {16, 2}},
    {{24, 128}, {25, 64}, {15, 32}, {16, 16}, {21, 8}, {22, 4}, {12, 2}},
};

// Chebyshev adjacency among the 26 non-center cells (center excluded).
constexpr std::array<std::uint32_t, 27> make_adjacency() {
    std::array<std::uint32_t, 27> adj{};
    for (int az = -1; az <= 1; ++az)
        for (int ay = -1; ay <= 1; ++ay)
            for (int ax = -1; ax <= 1; ++ax) {
                const int a = nb_index(az, ay, ax);
                if (a == 13) continue;
                std::uint32_t mask = 0;
                for (int bz = -1; bz <= 1; ++bz)
                    for (int by = -1; by <= 1; ++by)
                        for (int bx = -1; bx <= 1; ++bx) {
                            const int b = nb_index(bz, by, bx);
                            if (b == 13 || b == a) continue;
                            const int d = std::max(
                                {bz > az ? bz - az : az - bz,
                                 by > ay ? by - ay : ay - by,
                                 bx > ax ? bx - ax : ax - bx});
                            if (d <= 1) mask |= 1u << b;
                        }
                adj[static_cast<std::size_t>(a)] = mask;
            }
    return adj;
}

constexpr std::array<std::uint32_t, 27> kAdjacency = make_adjacency();
constexpr std::uint32_t kCenterBit = 1u << 13;

// Sub-iteration face order of the reference implementation. The two
// z-directed faces come last so single-slab grids can skip them.
constexpr int kBorderOffsets[6][3] = {
    {0, -1, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}, {1, 0, 0}, {-1, 0, 0},
};

bool euler_invariant(std::uint32_t bits) {
    int sum = 0;
    for (const auto& octant : kOctants) {
        unsigned n = 1;
        for (const OctantCell& c : octant)
            if (bits & (1u << c.nb)) n |= c.bit;
        sum += kEulerDelta[n];
    }
    return sum == 0;
}

// Deletion keeps local connectivity iff the foreground cells of the
// 26-neighborhood (center removed) form at most one 26-connected component.
bool simple_point(std::uint32_t bits) {
    std::uint32_t fg = bits & ~kCenterBit;
    if (fg == 0) return true;
    std::uint32_t component = fg & (~fg + 1);  // lowest set bit as seed
    std::uint32_t frontier = component;
    while (frontier) {
        std::uint32_t next = 0;
        std::uint32_t f = frontier;
        while (f) {
            const int cell = __builtin_ctz(f);
            f &= f - 1;
            next |= kAdjacency[static_cast<std::size_t>(cell)] & fg & ~component;
        }
        component |= next;
        frontier = next;
    }
    return component == fg;
}

struct PaddedVolume {
    std::int64_t dz, dy, dx;
    std::vector<std::uint8_t> cells;

    [[nodiscard]] std::int64_t at(std::int64_t z, std::int64_t y, std::int64_t x) const {
        return (z * dy + y) * dx + x;
    }
    [[nodiscard]] std::uint32_t neighborhood(std::int64_t z, std::int64_t y,
                                             std::int64_t x) const {
        std::uint32_t bits = 0;
        for (int oz = -1; oz <= 1; ++oz)
            for (int oy = -1; oy <= 1; ++oy)
                for (int ox = -1; ox <= 1; ++ox)
                    if (cells[static_cast<std::size_t>(at(z + oz, y + oy, x + ox))])
                        bits |= 1u << nb_index(oz, oy, ox);
        return bits;
    }
};

void thin_in_place(PaddedVolume& vol, int num_borders) {
    std::vector<std::int64_t> candidates;
    int unchanged_borders = 0;
    while (unchanged_borders < num_borders) {
        unchanged_borders = 0;
        for (int b = 0; b < num_borders; ++b) {
            const int* dir = kBorderOffsets[b];
            candidates.clear();
            for (std::int64_t z = 1; z < vol.dz - 1; ++z)
                for (std::int64_t y = 1; y < vol.dy - 1; ++y)
                    for (std::int64_t x = 1; x < vol.dx - 1; ++x) {
                        if (!vol.cells[static_cast<std::size_t>(vol.at(z, y, x))]) continue;
                        if (vol.cells[static_cast<std::size_t>(
                                vol.at(z + dir[0], y + dir[1], x + dir[2]))])
                            continue;
                        const std::uint32_t bits = vol.neighborhood(z, y, x);
                        if (__builtin_popcount(bits) == 2) continue;  // endpoint
                        if (!euler_invariant(bits)) continue;
                        if (!simple_point(bits)) continue;
                        candidates.push_back(vol.at(z, y, x));
                    }
            // Candidates were gathered against the unmodified volume; re-check
            // sequentially so connectivity survives the batched deletion.
            bool no_change = true;
            for (std::int64_t lin : candidates) {
                const std::int64_t z = lin / (vol.dy * vol.dx);
                const std::int64_t y = (lin / vol.dx) % vol.dy;
                const std::int64_t x = lin % vol.dx;
                const std::uint32_t bits = vol.neighborhood(z, y, x);
                // A candidate whose neighbors were all deleted is the last
                // voxel of its component and stays, keeping components and
                // skeleton non-emptiness intact. The reference implementation
                // erases such remnants of perfectly symmetric solids.
                if ((bits & ~kCenterBit) == 0) continue;
                if (simple_point(bits)) {
                    vol.cells[static_cast<std::size_t>(lin)] = 0;
                    no_change = false;
                }
            }
            if (no_change) ++unchanged_borders;
        }
    }
}

}  // namespace

Skeleton skeletonize(const VoxelMask& m) {
    if (m.empty())
        throw std::invalid_argument("cannot skeletonize an empty mask");

    const Voxel origin = m.box_origin();
    const Voxel extent = m.box_extent();
    PaddedVolume vol;
    vol.dz = extent.z + 2;
    vol.dy = extent.y + 2;
    vol.dx = extent.x + 2;
    vol.cells.assign(static_cast<std::size_t>(vol.dz * vol.dy * vol.dx), 0);
    m.for_each([&](Voxel v) {
        vol.cells[static_cast<std::size_t>(
            vol.at(v.z - origin.z + 1, v.y - origin.y + 1, v.x - origin.x + 1))] = 1;
    });

    // Single-slab grids thin with the four in-plane faces only, matching the
    // reference behavior for 2d inputs. The grid extent decides, not the
    // instance's bounding box.
    const int num_borders = m.shape().z > 1 ? 6 : 4;
    thin_in_place(vol, num_borders);

    std::vector<Voxel> kept;
    for (std::int64_t z = 1; z < vol.dz - 1; ++z)
        for (std::int64_t y = 1; y < vol.dy - 1; ++y)
            for (std::int64_t x = 1; x < vol.dx - 1; ++x)
                if (vol.cells[static_cast<std::size_t>(vol.at(z, y, x))])
                    kept.push_back(Voxel{static_cast<std::int32_t>(z - 1 + origin.z),
                                         static_cast<std::int32_t>(y - 1 + origin.y),
                                         static_cast<std::int32_t>(x - 1 + origin.x)});
    return Skeleton{VoxelMask::from_voxels(m.shape(), kept), m.count()};
}

std::map<InstanceId, Skeleton> skeleton_cache(const InstanceSet& s) {
    std::map<InstanceId, Skeleton> cache;
    for (const auto& [id, mask] : s.masks()) cache.emplace(id, skeletonize(mask));
    return cache;
}

}  // namespace fisbe
