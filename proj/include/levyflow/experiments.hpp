#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "levyflow/config.hpp"

namespace levyflow {

/// One checked quantity. pass is exactly lower ≤ value ≤ upper, so it can be
/// recomputed from the stored numbers; infinite bounds mark diagnostics.
struct MetricRow {
    std::string name;
    double value = 0.0;
    double se = 0.0;
    double oracle = 0.0;
    double tolerance = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool pass = false;

    bool recompute() const;

    /// |value − oracle| ≤ tolerance.
    static MetricRow within(std::string name, double value, double se, double oracle, double tolerance);
    static MetricRow at_most(std::string name, double value, double bound, double se = 0.0);
    static MetricRow at_least(std::string name, double value, double bound, double se = 0.0);
    static MetricRow between(std::string name, double value, double lo, double hi, double se = 0.0);
    static MetricRow diagnostic(std::string name, double value, double se = 0.0);
};

/// Numeric table written as CSV: comment line, header row, body.
struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// A curve for the report plots.
struct Series {
    std::string name;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
    bool log_x = true;
    bool log_y = true;
};

struct ResultRecord {
    std::string id;
    ExperimentKind kind = ExperimentKind::Sample;
    std::string config_hash;
    std::vector<MetricRow> rows;
    std::vector<Table> tables;
    std::vector<Series> series;
    double wall_clock_seconds = 0.0;
    std::size_t replicas = 0;

    bool passed() const;
    const MetricRow* find(const std::string& name) const;
};

nlohmann::json record_to_json(const ResultRecord& record);
ResultRecord record_from_json(const nlohmann::json& j);

/// Defaults for each kind; these are the configurations the acceptance suite pins.
ExperimentConfig default_config(ExperimentKind kind);

/// Runs one experiment without touching the file system.
ResultRecord execute_experiment(const ExperimentConfig& config);

/// For common noise per replica, flows with b^n and b^{2n} for every level n:
/// D(n) = E[sup_t |X^n − X^{2n}| ∧ 1] and G(n) = E[sup_t ‖∇X^n − ∇X^{2n}‖²].
/// Replicas escaping at any level are dropped at every level.
ResultRecord run_uniqueness_suite(const ExperimentConfig& config);

/// execute_experiment followed by write_outputs into config.output.directory.
ResultRecord run_experiment(const ExperimentConfig& config);

/// CSV tables (`<id>_<table>.csv`) and the JSON record (`<id>.json`) as
/// selected by the output formats. Throws IoError.
std::vector<std::filesystem::path> write_outputs(const ResultRecord& record, const ExperimentConfig& config);

/// Renders a table with a leading `#` line carrying the id, hash and a timestamp.
std::string render_csv(const Table& table, const std::string& id, const std::string& hash);
/// The CSV text without its `#` lines.
std::string csv_body(const std::string& text);

} // namespace levyflow
