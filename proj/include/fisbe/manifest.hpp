#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fisbe/volume.hpp"

namespace fisbe {

enum class Split { Train, Val, Test };

std::string to_string(Split s);
std::string to_string(Labeling l);

struct ManifestRow {
    std::string name;
    Split split = Split::Train;
    Labeling labeling = Labeling::Completely;
};

/// Split manifest CSV: header "name,split,labeling", one row per sample.
/// Sample names must be unique.
std::vector<ManifestRow> read_split_manifest(const std::filesystem::path& path);

/// Dim-instance list CSV: header "name,instance_id".
std::map<std::string, std::set<InstanceId>> read_dim_list(const std::filesystem::path& path);

}  // namespace fisbe
