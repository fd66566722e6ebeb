#include "fisbe/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fisbe {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    return out;
}

}  // namespace

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

std::string to_string(Labeling l) {
    return l == Labeling::Completely ? "completely" : "partly";
}

std::vector<ManifestRow> read_split_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open manifest");
    std::string line;
    if (!std::getline(in, line)) fail(path, "empty manifest");
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "name" || header[1] != "split" ||
        header[2] != "labeling")
        fail(path, "manifest header must be 'name,split,labeling'");

    std::vector<ManifestRow> rows;
    std::set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            fail(path, "line " + std::to_string(line_no) + ": expected 3 fields");
        ManifestRow row;
        row.name = fields[0];
        if (!seen.insert(row.name).second)
            fail(path, "duplicate sample name '" + row.name + "'");
        if (fields[1] == "train") row.split = Split::Train;
        else if (fields[1] == "val") row.split = Split::Val;
        else if (fields[1] == "test") row.split = Split::Test;
        else fail(path, "line " + std::to_string(line_no) + ": unknown split '" + fields[1] + "'");
        if (fields[2] == "completely") row.labeling = Labeling::Completely;
        else if (fields[2] == "partly") row.labeling = Labeling::Partly;
        else fail(path, "line " + std::to_string(line_no) + ": unknown labeling '" + fields[2] + "'");
        rows.push_back(row);
    }
    return rows;
}

std::map<std::string, std::set<InstanceId>> read_dim_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open dim list");
    std::string line;
    if (!std::getline(in, line)) fail(path, "empty dim list");
    auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "name" || header[1] != "instance_id")
        fail(path, "dim list header must be 'name,instance_id'");

    std::map<std::string, std::set<InstanceId>> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            fail(path, "line " + std::to_string(line_no) + ": expected 2 fields");
        try {
            out[fields[0]].insert(std::stoll(fields[1]));
        } catch (const std::exception&) {
            fail(path, "line " + std::to_string(line_no) + ": bad instance id '" + fields[1] + "'");
        }
    }
    return out;
}

}  // namespace fisbe
