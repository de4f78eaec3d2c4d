#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "levyflow/experiments.hpp"

namespace levyflow {

struct ReportSummary {
    std::size_t records = 0;
    std::size_t failed = 0;
    std::vector<std::filesystem::path> written;
    int exit_code = 0; ///< 0 when every record passed, 1 otherwise
};

/// Log-log (or linear) line plot of the series as a standalone SVG document.
std::string render_svg(const Series& series, const std::string& title);

/// Writes summary.json and one SVG per series into `directory`. Throws IoError.
ReportSummary emit_report(const std::vector<ResultRecord>& records, const std::filesystem::path& directory,
                          bool plots = true);

/// Reads every `*.json` result record in `directory`, sorted by file name.
std::vector<ResultRecord> load_records(const std::filesystem::path& directory);

} // namespace levyflow
