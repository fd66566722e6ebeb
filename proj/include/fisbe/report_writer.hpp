#pragma once

#include <filesystem>
#include <string>

#include "fisbe/report.hpp"

namespace fisbe {

enum class ReportFormat { Json, Csv, Markdown };

ReportFormat parse_report_format(const std::string& name);

/// Serializes a report document deterministically. JSON carries full
/// precision; CSV and Markdown round to two decimals.
void write_report(const nlohmann::ordered_json& document, const std::filesystem::path& path,
                  ReportFormat format);

/// The rendered text (exposed for determinism tests).
std::string render_report(const nlohmann::ordered_json& document, ReportFormat format);

}  // namespace fisbe
