#pragma once

#include <map>
#include <string>

#include "fisbe/volume.hpp"

namespace fisbe {

/// A constructed gt/pred configuration with attached expected metric values.
struct Phantom {
    LabeledImage image;
    struct Expectation {
        double value = 0.0;
        double tolerance = 0.0;
    };
    std::map<std::string, Expectation> expected;
};

/// The nine canonical edge-case configurations, built on a 64^3 grid with
/// two disjoint 100-voxel width-1 gt curves (except where noted):
///   a  perfect prediction
///   b  no prediction
///   c  one prediction spanning the whole grid
///   d  one prediction merging both gt instances
///   e  each gt tiled by 21 tiny predictions
///   f  both gt instances covered slightly more than half
///   g  one gt covered completely, the other missed
///   h  one gt covered completely plus a tiny second prediction
///   i  perfect prediction plus seven background false positives
/// Throws std::invalid_argument for an unknown name.
Phantom edge_case(char name);

/// All nine, in order a..i.
std::vector<Phantom> all_edge_cases();

/// Seeded random width-1 filament phantoms. Instances are self-avoiding
/// serpentine curves; with overlap_prob > 0, pairs of instances share short
/// forced overlap segments. pred is left empty.
/// Deterministic for a given seed across platforms.
Phantom random_filament_phantom(std::uint64_t seed, int n_instances, int min_len,
                                int max_len, double overlap_prob);

/// Predicts one instance per 26-connected component of the gt foreground.
InstanceSet toy_cc_predictor(const LabeledImage& img);

/// Width-1 serpentine curve of `length` voxels are placed starting at
/// (z0, y0, x0), folding in z every `run` voxels of x travel. Every interior
/// voxel keeps exactly two mutually non-adjacent neighbors, so the curve is
/// its own skeleton.
std::vector<Voxel> serpentine_curve(int z0, int y0, int x0, int length, int run);

}  // namespace fisbe
