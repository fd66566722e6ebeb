#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "fisbe/fiv.hpp"
#include "fisbe/manifest.hpp"
#include "fisbe/matching_oracle.hpp"
#include "fisbe/report.hpp"
#include "fisbe/report_writer.hpp"
#include "fisbe/synth.hpp"
#include "fisbe/zarr_volume.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSelftest = 3;

struct EvaluateOptions {
    std::string gt_dir;
    std::vector<std::string> pred_dirs;
    std::string manifest_path;
    std::string dim_path;
    std::vector<std::string> splits;
    std::string labeling_override;
    std::string out_path;
    std::string format = "json";
    int threads = 0;
};

fisbe::LabeledImage load_image(const fs::path& gt_dir, const fs::path& pred_dir,
                               const fisbe::ManifestRow& row,
                               const std::map<std::string, std::set<fisbe::InstanceId>>& dim,
                               const std::string& labeling_override) {
    const fs::path gt_path = gt_dir / (row.name + ".fiv");
    if (!fs::exists(gt_path))
        throw std::runtime_error("ground truth file missing for image " + row.name + " (" +
                                 gt_path.string() + ")");
    const fs::path pred_path = pred_dir / (row.name + ".fiv");
    if (!fs::exists(pred_path))
        throw std::runtime_error("prediction file missing for image " + row.name + " (" +
                                 pred_path.string() + ")");

    fisbe::LabeledImage img;
    img.name = row.name;
    img.gt = fisbe::read_fiv(gt_path).instances;
    img.pred = fisbe::read_fiv(pred_path).instances;
    img.has_pred = true;
    img.labeling = row.labeling;
    if (labeling_override == "completely") img.labeling = fisbe::Labeling::Completely;
    else if (labeling_override == "partly") img.labeling = fisbe::Labeling::Partly;
    if (auto it = dim.find(row.name); it != dim.end()) img.dim_ids = it->second;
    img.validate();
    return img;
}

int cmd_evaluate(const EvaluateOptions& opt) {
    const auto manifest = fisbe::read_split_manifest(opt.manifest_path);
    std::map<std::string, std::set<fisbe::InstanceId>> dim;
    if (!opt.dim_path.empty()) dim = fisbe::read_dim_list(opt.dim_path);
    else std::cerr << "note: no dim list given; dim-subset metrics will be absent\n";

    std::vector<std::string> wanted = opt.splits;
    if (wanted.empty()) {
        std::set<std::string> seen;
        for (const auto& row : manifest) seen.insert(to_string(row.split));
        wanted.assign(seen.begin(), seen.end());
    }

    ordered_json document;
    document["format"] = "fisbe-eval-report/1";
    document["splits"] = ordered_json::object();
    for (const std::string& split_name : wanted) {
        std::vector<fisbe::ManifestRow> rows;
        for (const auto& row : manifest)
            if (to_string(row.split) == split_name) rows.push_back(row);
        if (rows.empty())
            throw std::runtime_error("split '" + split_name + "' has no rows in the manifest");

        std::vector<fisbe::EvalReport> runs;
        for (const std::string& pred_dir : opt.pred_dirs) {
            std::vector<fisbe::LabeledImage> images;
            for (const auto& row : rows)
                images.push_back(
                    load_image(opt.gt_dir, pred_dir, row, dim, opt.labeling_override));
            runs.push_back(fisbe::evaluate_images(images, opt.threads));
        }
        document["splits"][split_name] = to_json(fisbe::summarize_runs(std::move(runs)));
    }

    fisbe::write_report(document, opt.out_path, fisbe::parse_report_format(opt.format));
    return kExitOk;
}

int cmd_synth(const std::string& what, std::uint64_t seed, int instances, int min_len,
              int max_len, double overlap_prob, const std::string& out_dir) {
    fs::create_directories(out_dir);
    ordered_json expectations = ordered_json::object();
    auto emit = [&](const fisbe::Phantom& ph) {
        fisbe::write_fiv(fs::path(out_dir) / (ph.image.name + "_gt.fiv"), ph.image.gt);
        fisbe::write_fiv(fs::path(out_dir) / (ph.image.name + "_pred.fiv"), ph.image.pred);
        ordered_json ex = ordered_json::object();
        for (const auto& [key, expectation] : ph.expected)
            ex[key] = {{"value", expectation.value}, {"tolerance", expectation.tolerance}};
        expectations[ph.image.name] = ex;
    };

    if (what == "all") {
        for (const fisbe::Phantom& ph : fisbe::all_edge_cases()) emit(ph);
    } else if (what == "random") {
        emit(fisbe::random_filament_phantom(seed, instances, min_len, max_len, overlap_prob));
    } else if (what.size() == 1 && what[0] >= 'a' && what[0] <= 'i') {
        emit(fisbe::edge_case(what[0]));
    } else {
        std::cerr << "unknown synth case '" << what << "' (use a..i, all, random)\n";
        return kExitUsage;
    }
    fisbe::write_report(expectations, fs::path(out_dir) / "expectations.json",
                        fisbe::ReportFormat::Json);
    return kExitOk;
}

int cmd_selftest(bool perturb) {
    int failures = 0;
    std::printf("%-14s %-12s %12s %12s %10s  %s\n", "case", "metric", "expected", "actual",
                "tolerance", "status");
    for (const fisbe::Phantom& ph : fisbe::all_edge_cases()) {
        const fisbe::EvalReport report = fisbe::evaluate_images({ph.image}, 1);
        const fisbe::SplitScores& s = *report.combined;
        const auto actual_of = [&](const std::string& key) -> double {
            if (key == "S") return s.S;
            if (key == "avF1") return s.av_f1;
            if (key == "C") return s.coverage;
            if (key == "clDice_TP") return s.cl_dice_tp;
            if (key == "FS") return static_cast<double>(s.false_splits);
            if (key == "FM") return static_cast<double>(s.false_merges);
            if (key == "TP") return static_cast<double>(s.tp_count);
            if (key == "FP") return static_cast<double>(s.fp_count);
            if (key == "FN") return static_cast<double>(s.fn_count);
            if (key.rfind("F1@0.", 0) == 0)
                return s.f1[static_cast<std::size_t>(key.back() - '1')];
            throw std::logic_error("unknown expectation key " + key);
        };
        for (const auto& [key, expectation] : ph.expected) {
            double expected = expectation.value;
            if (perturb && key == "S") expected += 0.1;  // testing aid: force a mismatch
            const double actual = actual_of(key);
            const bool ok = std::abs(actual - expected) <= expectation.tolerance;
            if (!ok) ++failures;
            std::printf("%-14s %-12s %12.6f %12.6f %10.1e  %s\n", ph.image.name.c_str(),
                        key.c_str(), expected, actual, expectation.tolerance,
                        ok ? "pass" : "FAIL");
        }
    }
    if (failures) {
        std::printf("selftest: %d expectation(s) failed\n", failures);
        return kExitSelftest;
    }
    std::printf("selftest: all expectations met\n");
    return kExitOk;
}

int cmd_skeletonize(const std::string& in_path, const std::string& out_path) {
    const fisbe::FivVolume vol = fisbe::read_fiv(in_path);
    fisbe::InstanceSet skeletons(vol.instances.shape());
    for (const auto& [id, mask] : vol.instances.masks())
        skeletons.add(id, fisbe::skeletonize(mask).mask);
    fisbe::write_fiv(out_path, skeletons);
    return kExitOk;
}

int cmd_convert(const std::string& in_path, const std::string& out_path) {
    const fisbe::DatasetVolume vol = fisbe::read_dataset_container(in_path);
    fisbe::write_fiv(out_path, vol.instances, vol.has_raw ? std::optional<int>(3) : std::nullopt);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluation toolkit for 3d instance segmentations of thin filamentous "
                 "structures: centerline scores, greedy matchings, and benchmark reports"};
    app.require_subcommand(1);

    EvaluateOptions eval_opt;
    auto* eval = app.add_subcommand("evaluate", "Evaluate prediction runs against ground truth");
    eval->add_option("--gt", eval_opt.gt_dir, "Directory with <name>.fiv ground truth")
        ->required();
    eval->add_option("--pred", eval_opt.pred_dirs,
                     "Prediction directories, one per run (multi-run reports get mean/std)")
        ->required()
        ->expected(-1);
    eval->add_option("--manifest", eval_opt.manifest_path, "Split manifest CSV")->required();
    eval->add_option("--dim", eval_opt.dim_path, "Dim-instance list CSV");
    eval->add_option("--splits", eval_opt.splits, "Splits to evaluate (default: all in manifest)");
    eval->add_option("--labeling", eval_opt.labeling_override,
                     "Override manifest labeling (completely|partly)")
        ->check(CLI::IsMember({"completely", "partly"}));
    eval->add_option("--out", eval_opt.out_path, "Report output path")->required();
    eval->add_option("--format", eval_opt.format, "Report format (json|csv|md)")
        ->check(CLI::IsMember({"json", "csv", "md"}));
    eval->add_option("--threads", eval_opt.threads, "Worker threads (default: hardware)");

    std::string synth_what = "all", synth_out = "phantoms";
    std::uint64_t synth_seed = 1;
    int synth_instances = 5, synth_min_len = 40, synth_max_len = 90;
    double synth_overlap = 0.0;
    auto* synth = app.add_subcommand("synth", "Write phantom volumes as FIV pairs");
    synth->add_option("--case", synth_what, "a..i, all, or random");
    synth->add_option("--seed", synth_seed, "Seed for random phantoms");
    synth->add_option("--instances", synth_instances, "Instances in a random phantom");
    synth->add_option("--min-len", synth_min_len, "Minimum curve length");
    synth->add_option("--max-len", synth_max_len, "Maximum curve length");
    synth->add_option("--overlap-prob", synth_overlap, "Probability of forced overlaps");
    synth->add_option("--out", synth_out, "Output directory");

    bool selftest_perturb = false;
    auto* selftest = app.add_subcommand("selftest",
                                        "Evaluate the built-in edge cases against their "
                                        "expected values");
    selftest->add_flag("--perturb", selftest_perturb,
                       "Inject a wrong expectation to exercise failure reporting");

    std::string skel_in, skel_out;
    auto* skel = app.add_subcommand("skeletonize", "Thin every instance of a FIV file");
    skel->add_option("--in", skel_in, "Input .fiv")->required();
    skel->add_option("--out", skel_out, "Output .fiv")->required();

    std::string conv_in, conv_out;
    auto* conv = app.add_subcommand("convert", "Convert a dataset container to FIV");
    conv->add_option("--in", conv_in, "Container directory (zarr)")->required();
    conv->add_option("--out", conv_out, "Output .fiv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (eval->parsed()) return cmd_evaluate(eval_opt);
        if (synth->parsed())
            return cmd_synth(synth_what, synth_seed, synth_instances, synth_min_len,
                             synth_max_len, synth_overlap, synth_out);
        if (selftest->parsed()) return cmd_selftest(selftest_perturb);
        if (skel->parsed()) return cmd_skeletonize(skel_in, skel_out);
        if (conv->parsed()) return cmd_convert(conv_in, conv_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
