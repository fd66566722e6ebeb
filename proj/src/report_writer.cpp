#include "fisbe/report_writer.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fisbe {

namespace {

using nlohmann::ordered_json;

const char* kScalarColumns[] = {"S",  "avF1", "C",  "clDice_TP", "FS",     "FM",
                                "TP", "FP",   "FN", "C_dim",     "C_ovlp", "tp",
                                "tp_dim", "tp_ovlp"};

std::string round2(const ordered_json& v) {
    if (v.is_null()) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v.get<double>());
    return buf;
}

void append_score_cells(std::vector<std::string>& cells, const ordered_json& scores) {
    for (const char* key : kScalarColumns)
        cells.push_back(scores.contains(key) ? round2(scores[key]) : "");
    if (scores.contains("f1_per_threshold") && scores["f1_per_threshold"].is_array())
        for (const auto& v : scores["f1_per_threshold"]) cells.push_back(round2(v));
    else if (scores.is_object()) {
        // summary objects carry flattened F1@0.x keys
        for (int i = 1; i <= 9; ++i) {
            char key[16];
            std::snprintf(key, sizeof key, "F1@0.%d", i);
            cells.push_back(scores.contains(key) ? round2(scores[key]) : "");
        }
    }
}

std::vector<std::string> header_cells() {
    std::vector<std::string> cells = {"split", "group", "run"};
    for (const char* key : kScalarColumns) cells.emplace_back(key);
    for (int i = 1; i <= 9; ++i) {
        char key[16];
        std::snprintf(key, sizeof key, "F1@0.%d", i);
        cells.emplace_back(key);
    }
    return cells;
}

std::vector<std::vector<std::string>> tabulate(const ordered_json& document) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back(header_cells());
    for (const auto& [split_name, multirun] : document["splits"].items()) {
        const auto& runs = multirun["runs"];
        for (const char* group : {"completely", "partly", "combined"}) {
            for (std::size_t r = 0; r < runs.size(); ++r) {
                const auto& scores = runs[r]["scores"][group];
                if (scores.is_null()) continue;
                std::vector<std::string> cells = {split_name, group, std::to_string(r + 1)};
                append_score_cells(cells, scores);
                rows.push_back(std::move(cells));
            }
            if (!multirun["summary"].is_null() && multirun["summary"].contains(group)) {
                for (const char* stat : {"mean", "std"}) {
                    std::vector<std::string> cells = {split_name, group, stat};
                    append_score_cells(cells, multirun["summary"][group][stat]);
                    rows.push_back(std::move(cells));
                }
            }
        }
    }
    return rows;
}

std::string render_csv(const ordered_json& document) {
    std::string out;
    for (const auto& row : tabulate(document)) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

std::string render_markdown(const ordered_json& document) {
    const auto rows = tabulate(document);
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out += '|';
        for (const auto& cell : rows[r]) {
            out += ' ';
            out += cell.empty() ? "-" : cell;
            out += " |";
        }
        out += '\n';
        if (r == 0) {
            out += '|';
            for (std::size_t i = 0; i < rows[0].size(); ++i) out += " --- |";
            out += '\n';
        }
    }
    return out;
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "md" || name == "markdown") return ReportFormat::Markdown;
    throw std::invalid_argument("unknown report format '" + name + "'");
}

std::string render_report(const ordered_json& document, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: return document.dump(2) + "\n";
        case ReportFormat::Csv: return render_csv(document);
        case ReportFormat::Markdown: return render_markdown(document);
    }
    throw std::logic_error("unreachable");
}

void write_report(const ordered_json& document, const std::filesystem::path& path,
                  ReportFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    const std::string text = render_report(document, format);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace fisbe
