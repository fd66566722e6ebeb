#pragma once

#include <json.hpp>

#include <optional>

#include "fisbe/metrics.hpp"

namespace fisbe {

/// Per-image rows plus the pooled scores of one evaluation scenario
/// (one set of images, one prediction run).
struct EvalReport {
    std::vector<ImageStats> per_image;  // sorted by image name
    std::optional<SplitScores> completely;
    std::optional<SplitScores> partly;
    std::optional<SplitScores> combined;
};

/// Multi-run assembly: the per-run reports plus, from two runs on, the
/// per-metric mean and sample standard deviation (n-1 denominator).
struct MultiRunReport {
    std::vector<EvalReport> runs;
    std::optional<nlohmann::ordered_json> summary;  // mean/std per metric
};

/// Evaluates one group of images: per-image statistics (fanned out over
/// `threads` workers, deterministic reduction by name) pooled into
/// completely / partly / combined scores.
EvalReport evaluate_images(const std::vector<LabeledImage>& images, int threads = 0);

/// Combines per-run reports. All runs must cover the identical image set.
MultiRunReport summarize_runs(std::vector<EvalReport> runs);

nlohmann::ordered_json to_json(const SplitScores& scores);
nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const MultiRunReport& report);

}  // namespace fisbe
