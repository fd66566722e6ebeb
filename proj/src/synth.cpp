#include "fisbe/synth.hpp"

#include <algorithm>
#include <stdexcept>

namespace fisbe {

namespace {

constexpr std::int64_t kEdgeGrid = 64;
constexpr int kCurveLength = 100;

// splitmix64; fixed here so phantoms are reproducible across platforms.
struct Rng {
    std::uint64_t state;
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
    int range(int lo, int hi) { return lo + below(hi - lo + 1); }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

Phantom::Expectation exact(double v) { return {v, 1e-9}; }

void expect_f1_row(Phantom& ph, const std::array<double, 9>& f1) {
    static const char* keys[9] = {"F1@0.1", "F1@0.2", "F1@0.3", "F1@0.4", "F1@0.5",
                                  "F1@0.6", "F1@0.7", "F1@0.8", "F1@0.9"};
    for (int i = 0; i < 9; ++i) ph.expected[keys[i]] = exact(f1[static_cast<std::size_t>(i)]);
}

std::array<double, 9> flat_row(double v) {
    return {v, v, v, v, v, v, v, v, v};
}

std::array<double, 9> step_row(double v, int high_count) {
    std::array<double, 9> out{};
    for (int i = 0; i < 9; ++i) out[static_cast<std::size_t>(i)] = i < high_count ? v : 0.0;
    return out;
}

VoxelMask curve_mask(GridShape shape, const std::vector<Voxel>& voxels, std::size_t from,
                     std::size_t count) {
    return VoxelMask::from_voxels(
        shape, std::span<const Voxel>(voxels.data() + from, count));
}

}  // namespace

std::vector<Voxel> serpentine_curve(int z0, int y0, int x0, int length, int run) {
    if (length < 1 || run < 2) throw std::invalid_argument("degenerate serpentine curve");
    std::vector<Voxel> out;
    out.reserve(static_cast<std::size_t>(length));
    int z = z0, x = x0, dir = 1, in_row = 0;
    while (static_cast<int>(out.size()) < length) {
        out.push_back({z, y0, x});
        ++in_row;
        if (static_cast<int>(out.size()) == length) break;
        if (in_row == run) {
            // z-fold: the single bridge voxel keeps both row ends
            // non-adjacent, so thinning leaves the turn intact.
            out.push_back({z + 1, y0, x + dir});
            z += 2;
            dir = -dir;
            in_row = 0;
        } else {
            x += dir;
        }
    }
    return out;
}

Phantom edge_case(char name) {
    const GridShape shape{kEdgeGrid, kEdgeGrid, kEdgeGrid};
    const std::vector<Voxel> curve1 = serpentine_curve(10, 12, 5, kCurveLength, 50);
    const std::vector<Voxel> curve2 = serpentine_curve(10, 24, 5, kCurveLength, 50);

    Phantom ph;
    ph.image.name = std::string("edge_case_") + name;
    ph.image.gt = InstanceSet(shape);
    ph.image.gt.add(1, VoxelMask::from_voxels(shape, curve1));
    ph.image.gt.add(2, VoxelMask::from_voxels(shape, curve2));
    ph.image.pred = InstanceSet(shape);
    ph.image.has_pred = true;

    auto& e = ph.expected;
    switch (name) {
        case 'a': {
            ph.image.pred.add(1, VoxelMask::from_voxels(shape, curve1));
            ph.image.pred.add(2, VoxelMask::from_voxels(shape, curve2));
            e["S"] = exact(1.0);
            e["avF1"] = exact(1.0);
            e["C"] = exact(1.0);
            e["clDice_TP"] = exact(1.0);
            e["FS"] = exact(0);
            e["FM"] = exact(0);
            e["TP"] = exact(2);
            e["FP"] = exact(0);
            e["FN"] = exact(0);
            expect_f1_row(ph, flat_row(1.0));
            break;
        }
        case 'b': {
            e["S"] = exact(0.0);
            e["avF1"] = exact(0.0);
            e["C"] = exact(0.0);
            e["clDice_TP"] = exact(0.0);
            e["FS"] = exact(0);
            e["FM"] = exact(0);
            e["TP"] = exact(0);
            e["FP"] = exact(0);
            e["FN"] = exact(2);
            expect_f1_row(ph, flat_row(0.0));
            break;
        }
        case 'c': {
            ph.image.pred.add(1, VoxelMask::full(shape));
            e["S"] = exact(0.0);
            e["avF1"] = exact(0.0);
            e["C"] = exact(0.0);
            e["clDice_TP"] = exact(0.0);
            e["FS"] = exact(0);
            e["FM"] = exact(1);
            e["TP"] = exact(0);
            e["FP"] = exact(1);
            e["FN"] = exact(2);
            expect_f1_row(ph, flat_row(0.0));
            break;
        }
        case 'd': {
            std::vector<Voxel> merged = curve1;
            merged.insert(merged.end(), curve2.begin(), curve2.end());
            ph.image.pred.add(1, VoxelMask::from_voxels(shape, merged));
            e["S"] = exact(0.5 * (4.0 / 9.0 + 0.5));
            e["avF1"] = exact(4.0 / 9.0);
            e["C"] = exact(0.5);
            e["clDice_TP"] = exact(2.0 / 3.0);
            e["FS"] = exact(0);
            e["FM"] = exact(1);
            e["TP"] = exact(1);
            e["FP"] = exact(0);
            e["FN"] = exact(1);
            expect_f1_row(ph, step_row(2.0 / 3.0, 6));
            break;
        }
        case 'e': {
            // 21 tiles per curve: sixteen of five voxels, five of four.
            InstanceId pid = 1;
            for (const auto* curve : {&curve1, &curve2}) {
                std::size_t pos = 0;
                for (int t = 0; t < 21; ++t) {
                    const std::size_t len = t < 16 ? 5 : 4;
                    ph.image.pred.add(pid++, curve_mask(shape, *curve, pos, len));
                    pos += len;
                }
            }
            e["S"] = exact(0.5);
            e["avF1"] = exact(0.0);
            e["C"] = exact(1.0);
            e["clDice_TP"] = exact(0.0);
            e["FS"] = exact(0);
            e["FM"] = exact(0);
            e["TP"] = exact(0);
            e["FP"] = exact(42);
            e["FN"] = exact(2);
            expect_f1_row(ph, flat_row(0.0));
            break;
        }
        case 'f': {
            ph.image.pred.add(1, curve_mask(shape, curve1, 0, 51));
            ph.image.pred.add(2, curve_mask(shape, curve2, 0, 51));
            const double dice = 2.0 * 0.51 / 1.51;
            e["S"] = exact(0.5 * (2.0 / 3.0 + 0.51));
            e["avF1"] = exact(2.0 / 3.0);
            e["C"] = exact(0.51);
            e["clDice_TP"] = exact(dice);
            e["FS"] = exact(0);
            e["FM"] = exact(0);
            e["TP"] = exact(2);
            e["FP"] = exact(0);
            e["FN"] = exact(0);
            expect_f1_row(ph, step_row(1.0, 6));
            break;
        }
        case 'g': {
            ph.image.pred.add(1, VoxelMask::from_voxels(shape, curve1));
            e["S"] = exact(0.5 * (2.0 / 3.0 + 0.5));
            e["avF1"] = exact(2.0 / 3.0);
            e["C"] = exact(0.5);
            e["clDice_TP"] = exact(1.0);
            e["FS"] = exact(0);
            e["FM"] = exact(0);
            e["TP"] = exact(1);
            e["FP"] = exact(0);
            e["FN"] = exact(1);
            expect_f1_row(ph, flat_row(2.0 / 3.0));
            break;
        }
        case 'h': {
            ph.image.pred.add(1, VoxelMask::from_voxels(shape, curve1));
            ph.image.pred.add(2, curve_mask(shape, curve2, 0, 4));
            e["S"] = exact(0.51);
            e["avF1"] = exact(0.5);
            e["C"] = exact(0.52);
            e["clDice_TP"] = exact(1.0);
            e["FS"] = exact(0);
            e["FM"] = exact(0);
            e["TP"] = exact(1);
            e["FP"] = exact(1);
            e["FN"] = exact(1);
            expect_f1_row(ph, flat_row(0.5));
            break;
        }
        case 'i': {
            ph.image.pred.add(1, VoxelMask::from_voxels(shape, curve1));
            ph.image.pred.add(2, VoxelMask::from_voxels(shape, curve2));
            for (int k = 0; k < 7; ++k) {
                std::vector<Voxel> noise;
                for (int x = 30; x < 35; ++x) noise.push_back({40, 6 + 3 * k, x});
                ph.image.pred.add(3 + k, VoxelMask::from_voxels(shape, noise));
            }
            e["S"] = exact(0.5 * (4.0 / 11.0 + 1.0));
            e["avF1"] = exact(4.0 / 11.0);
            e["C"] = exact(1.0);
            e["clDice_TP"] = exact(1.0);
            e["FS"] = exact(0);
            e["FM"] = exact(0);
            e["TP"] = exact(2);
            e["FP"] = exact(7);
            e["FN"] = exact(0);
            expect_f1_row(ph, flat_row(4.0 / 11.0));
            break;
        }
        default:
            throw std::invalid_argument(std::string("unknown edge case '") + name + "'");
    }
    return ph;
}

std::vector<Phantom> all_edge_cases() {
    std::vector<Phantom> out;
    for (char c = 'a'; c <= 'i'; ++c) out.push_back(edge_case(c));
    return out;
}

Phantom random_filament_phantom(std::uint64_t seed, int n_instances, int min_len,
                                int max_len, double overlap_prob) {
    if (n_instances < 1 || min_len < 8 || max_len < min_len)
        throw std::invalid_argument("bad filament phantom parameters");
    const GridShape shape{64, 64, 64};
    Rng rng{seed * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull};

    Phantom ph;
    ph.image.name = "filaments_" + std::to_string(seed);
    ph.image.gt = InstanceSet(shape);

    std::vector<std::vector<Voxel>> curves;
    auto collides = [&](const std::vector<Voxel>& cand, int allow_overlap_with) {
        for (std::size_t j = 0; j < curves.size(); ++j) {
            if (static_cast<int>(j) == allow_overlap_with) continue;
            for (const Voxel& v : cand)
                for (const Voxel& w : curves[j])
                    if (v == w) return true;
        }
        return false;
    };
    auto in_bounds = [&](const std::vector<Voxel>& cand) {
        for (const Voxel& v : cand)
            if (!shape.contains(v.z, v.y, v.x)) return false;
        return true;
    };

    for (int i = 0; i < n_instances; ++i) {
        bool placed = false;
        const bool want_overlap = i > 0 && rng.unit() < overlap_prob;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const int length = rng.range(min_len, max_len);
            std::vector<Voxel> cand;
            int allow = -1;
            if (want_overlap) {
                // Share a short straight window of an existing curve, then
                // branch off with a diagonal step and a straight y tail
                // (toward whichever side has room). Only the tail needs to be
                // free of other instances; the window is a genuine overlap.
                allow = rng.below(static_cast<int>(curves.size()));
                const auto& host = curves[static_cast<std::size_t>(allow)];
                const int k = std::min(rng.range(4, 9), static_cast<int>(host.size()) - 1);
                const int offset = rng.below(std::max(
                    1, static_cast<int>(host.size()) - k));
                bool straight = true;
                for (int t = 1; t < k; ++t) {
                    const auto& a = host[static_cast<std::size_t>(offset)];
                    const auto& b = host[static_cast<std::size_t>(offset + t)];
                    if (b.z != a.z || b.y != a.y || b.x != a.x + t) straight = false;
                }
                if (!straight) continue;
                cand.assign(host.begin() + offset, host.begin() + offset + k);
                const Voxel end = cand.back();
                const std::int32_t dir = end.y <= 32 ? 1 : -1;
                const int room = dir > 0 ? static_cast<int>(shape.y) - 2 - end.y : end.y - 1;
                const int tail = std::min(length - k, room);
                if (tail < 2) continue;
                std::vector<Voxel> tail_voxels;
                Voxel t{end.z, end.y + dir, end.x + 1};
                tail_voxels.push_back(t);
                for (int n = 1; n < tail; ++n) {
                    t.y += dir;
                    tail_voxels.push_back(t);
                }
                if (!in_bounds(tail_voxels) || collides(tail_voxels, allow)) continue;
                cand.insert(cand.end(), tail_voxels.begin(), tail_voxels.end());
                // Forbid full containment in either direction; downstream
                // score ties depend on every skeleton keeping private voxels.
                bool contained = false;
                for (const auto& other : curves) {
                    std::size_t shared = 0;
                    for (const Voxel& v : cand)
                        for (const Voxel& w : other)
                            if (v == w) ++shared;
                    if (shared == cand.size() || shared == other.size()) contained = true;
                }
                if (contained) continue;
                curves.push_back(cand);
                ph.image.gt.add(i + 1, VoxelMask::from_voxels(shape, cand));
                placed = true;
                continue;
            }
            const int run = rng.range(10, 28);
            const int z0 = rng.range(1, 44);
            const int y0 = rng.range(1, 62);
            const int x0 = rng.range(1, 30);
            cand = serpentine_curve(z0, y0, x0, length, run);
            if (!in_bounds(cand) || collides(cand, allow)) continue;
            curves.push_back(cand);
            ph.image.gt.add(i + 1, VoxelMask::from_voxels(shape, cand));
            placed = true;
        }
        if (!placed)
            throw std::runtime_error("filament phantom placement failed for seed " +
                                     std::to_string(seed));
    }

    ph.image.pred = InstanceSet(shape);
    for (const auto& [id, mask] : ph.image.gt.masks()) ph.image.pred.add(id, mask);
    ph.image.has_pred = true;
    ph.expected["S"] = exact(1.0);
    ph.expected["FS"] = exact(0);
    ph.expected["FM"] = exact(0);
    return ph;
}

InstanceSet toy_cc_predictor(const LabeledImage& img) {
    InstanceSet pred(img.gt.shape());
    const VoxelMask fg = foreground_union(img.gt);
    if (fg.empty()) return pred;
    InstanceId next = 1;
    std::vector<VoxelMask> components = connected_components_26(fg);
    for (VoxelMask& component : components) pred.add(next++, std::move(component));
    return pred;
}

}  // namespace fisbe
