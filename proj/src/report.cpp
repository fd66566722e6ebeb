#include "fisbe/report.hpp"

#include "fisbe/manifest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace fisbe {

namespace {

using nlohmann::ordered_json;

ordered_json optional_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json stats_json(const ImageStats& s) {
    ordered_json j;
    j["labeling"] = to_string(s.labeling);
    j["n_gt"] = s.n_gt;
    j["n_pred"] = s.n_pred;
    j["tp_per_threshold"] = s.tp;
    j["fp_per_threshold"] = s.fp;
    j["fn_per_threshold"] = s.fn;
    j["FS"] = s.false_splits;
    j["FM"] = s.false_merges;
    ordered_json coverage = ordered_json::object();
    ordered_json matched = ordered_json::object();
    for (const auto& row : s.gt_rows) {
        coverage[std::to_string(row.id)] = row.coverage;
        matched[std::to_string(row.id)] = row.matched_05;
    }
    j["gt_coverage"] = coverage;
    j["gt_matched_05"] = matched;
    return j;
}

// Flat metric vector used for the multi-run mean/std summary.
std::vector<std::pair<std::string, std::optional<double>>> metric_row(const SplitScores& s) {
    std::vector<std::pair<std::string, std::optional<double>>> out = {
        {"S", s.S},
        {"avF1", s.av_f1},
        {"C", s.coverage},
        {"clDice_TP", s.cl_dice_tp},
        {"FS", static_cast<double>(s.false_splits)},
        {"FM", static_cast<double>(s.false_merges)},
        {"TP", static_cast<double>(s.tp_count)},
        {"FP", static_cast<double>(s.fp_count)},
        {"FN", static_cast<double>(s.fn_count)},
        {"C_dim", s.coverage_dim},
        {"C_ovlp", s.coverage_ovlp},
        {"tp", s.tp_ratio},
        {"tp_dim", s.tp_ratio_dim},
        {"tp_ovlp", s.tp_ratio_ovlp},
    };
    for (int i = 0; i < kNumThresholds; ++i) {
        char key[16];
        std::snprintf(key, sizeof key, "F1@0.%d", i + 1);
        out.emplace_back(key, s.f1[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace

EvalReport evaluate_images(const std::vector<LabeledImage>& images, int threads) {
    EvalReport report;
    if (images.empty()) return report;

    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return images[a].name < images[b].name;
    });

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min<int>(threads, static_cast<int>(images.size()));

    std::vector<ImageStats> stats(images.size());
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= order.size()) return;
            try {
                stats[i] = compute_image_stats(images[order[i]]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::make_exception_ptr(std::runtime_error(
                        "evaluating image " + images[order[i]].name + ": " + e.what()));
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    report.per_image = std::move(stats);

    std::vector<ImageStats> completely, partly;
    for (const ImageStats& s : report.per_image)
        (s.labeling == Labeling::Completely ? completely : partly).push_back(s);
    if (!completely.empty()) report.completely = pool_image_stats(completely);
    if (!partly.empty()) report.partly = pool_image_stats(partly);
    if (report.completely && report.partly)
        report.combined = aggregate_combined(*report.completely, *report.partly);
    else if (report.completely)
        report.combined = report.completely;
    else if (report.partly)
        report.combined = report.partly;
    return report;
}

MultiRunReport summarize_runs(std::vector<EvalReport> runs) {
    if (runs.empty()) throw std::invalid_argument("no runs to summarize");
    const auto names_of = [](const EvalReport& r) {
        std::vector<std::string> names;
        for (const auto& s : r.per_image) names.push_back(s.name);
        return names;
    };
    const auto reference = names_of(runs.front());
    for (const EvalReport& r : runs)
        if (names_of(r) != reference)
            throw std::invalid_argument("runs cover different image sets");

    MultiRunReport out;
    out.runs = std::move(runs);
    if (out.runs.size() < 2) return out;

    ordered_json summary;
    const auto group_of = [](const EvalReport& r, const std::string& g) {
        if (g == "completely") return r.completely;
        if (g == "partly") return r.partly;
        return r.combined;
    };
    for (const std::string group : {"completely", "partly", "combined"}) {
        if (!group_of(out.runs.front(), group)) continue;
        ordered_json mean_j, std_j;
        const auto keys = metric_row(*group_of(out.runs.front(), group));
        for (std::size_t k = 0; k < keys.size(); ++k) {
            std::vector<double> values;
            bool present = true;
            for (const EvalReport& r : out.runs) {
                const auto row = metric_row(*group_of(r, group));
                if (!row[k].second) {
                    present = false;
                    break;
                }
                values.push_back(*row[k].second);
            }
            if (!present) {
                mean_j[keys[k].first] = nullptr;
                std_j[keys[k].first] = nullptr;
                continue;
            }
            const bool all_equal =
                std::all_of(values.begin(), values.end(),
                            [&](double v) { return v == values.front(); });
            if (all_equal) {
                mean_j[keys[k].first] = values.front();
                std_j[keys[k].first] = 0.0;
                continue;
            }
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(values.size() - 1);
            mean_j[keys[k].first] = mean;
            std_j[keys[k].first] = std::sqrt(var);
        }
        summary[group] = {{"mean", mean_j}, {"std", std_j}};
    }
    out.summary = summary;
    return out;
}

ordered_json to_json(const SplitScores& s) {
    ordered_json j;
    j["n_images"] = s.n_images;
    j["n_gt"] = s.n_gt;
    j["n_pred"] = s.n_pred;
    j["S"] = s.S;
    j["avF1"] = s.av_f1;
    j["C"] = s.coverage;
    j["clDice_TP"] = s.cl_dice_tp;
    j["FS"] = s.false_splits;
    j["FM"] = s.false_merges;
    j["TP"] = s.tp_count;
    j["FP"] = s.fp_count;
    j["FN"] = s.fn_count;
    j["f1_per_threshold"] = s.f1;
    j["C_dim"] = optional_json(s.coverage_dim);
    j["C_ovlp"] = optional_json(s.coverage_ovlp);
    j["tp"] = optional_json(s.tp_ratio);
    j["tp_dim"] = optional_json(s.tp_ratio_dim);
    j["tp_ovlp"] = optional_json(s.tp_ratio_ovlp);
    return j;
}

ordered_json to_json(const EvalReport& r) {
    ordered_json j;
    ordered_json images = ordered_json::object();
    for (const ImageStats& s : r.per_image) images[s.name] = stats_json(s);
    j["images"] = images;
    ordered_json splits = ordered_json::object();
    splits["completely"] = r.completely ? to_json(*r.completely) : ordered_json(nullptr);
    splits["partly"] = r.partly ? to_json(*r.partly) : ordered_json(nullptr);
    splits["combined"] = r.combined ? to_json(*r.combined) : ordered_json(nullptr);
    j["scores"] = splits;
    return j;
}

ordered_json to_json(const MultiRunReport& r) {
    ordered_json j;
    j["n_runs"] = r.runs.size();
    ordered_json runs = ordered_json::array();
    for (const EvalReport& run : r.runs) runs.push_back(to_json(run));
    j["runs"] = runs;
    j["summary"] = r.summary ? *r.summary : ordered_json(nullptr);
    return j;
}

}  // namespace fisbe
