#pragma once

#include "fisbe/matching.hpp"

namespace fisbe {

/// Naive re-scan reimplementations of the three greedy matching schemes,
/// used to certify the optimized paths. No incremental bookkeeping, no
/// heaps, no cached tables: every iteration recomputes scores from plain
/// coordinate sets and scans the full pair list for the maximum.
///
/// Inputs are bounded (instance counts and grid volume) and rejected with
/// std::invalid_argument beyond the bounds.
namespace oracle {

bool within_bounds(const LabeledImage& img);

OneToOneMatching one_to_one(const LabeledImage& img);
CoverageMatching coverage(const LabeledImage& img);
ManyToManyMatching many_to_many(const LabeledImage& img, double threshold);

}  // namespace oracle
}  // namespace fisbe
