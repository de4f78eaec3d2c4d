#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "levyflow/errors.hpp"
#include "levyflow/experiments.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/report.hpp"

using namespace levyflow;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    std::string out;
    unsigned threads = 0;
};

void add_overrides(CLI::App& cmd, Overrides& o, bool need_config) {
    auto* c = cmd.add_option("--config", o.config, "JSON experiment configuration")->check(CLI::ExistingFile);
    if (need_config) c->required();
    cmd.add_option("--seed", o.seed, "master seed");
    cmd.add_option("--replicas", o.replicas, "Monte Carlo replica count");
    cmd.add_option("--out", o.out, "output directory");
    cmd.add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

ExperimentConfig resolve(const Overrides& o, std::optional<ExperimentKind> kind) {
    ExperimentConfig c = o.config.empty() ? default_config(*kind) : load_config(o.config);
    if (kind && c.kind != *kind)
        throw ConfigError("configuration is for '" + std::string(kind_name(c.kind)) + "', not '" +
                          std::string(kind_name(*kind)) + "'");
    if (o.seed) c.master_seed = *o.seed;
    if (o.replicas) c.numerics.replicas = *o.replicas;
    if (!o.out.empty()) c.output.directory = o.out;
    return c;
}

int run_one(const ExperimentConfig& c) {
    const auto record = run_experiment(c);
    for (const auto& m : record.rows)
        std::printf("%-44s %-4s value=%.6g [%.6g, %.6g]\n", m.name.c_str(), m.pass ? "ok" : "FAIL", m.value, m.lower,
                    m.upper);
    if (c.output.wants("svg")) emit_report({record}, c.output.directory);
    std::printf("%s: %s (%.1f s)\n", record.id.c_str(), record.passed() ? "PASS" : "FAIL", record.wall_clock_seconds);
    return record.passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo and PDE experiments for stochastic flows driven by Levy noise"};
    app.require_subcommand(1);

    Overrides o;
    std::vector<std::pair<CLI::App*, ExperimentKind>> kinds;
    for (auto k : all_kinds()) {
        auto* cmd = app.add_subcommand(std::string(kind_name(k)), "run the " + std::string(kind_name(k)) + " experiment");
        add_overrides(*cmd, o, false);
        kinds.emplace_back(cmd, k);
    }
    auto* run = app.add_subcommand("run", "run the experiment described by a configuration file");
    add_overrides(*run, o, true);

    std::string report_dir;
    auto* report = app.add_subcommand("report", "summarise the JSON records in a directory");
    report->add_option("dir", report_dir, "directory holding experiment records")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code(ErrorKind::Config);
    }

    try {
        set_thread_count(o.threads);
        if (report->parsed()) {
            const auto records = load_records(report_dir);
            const auto summary = emit_report(records, report_dir);
            std::printf("%zu records, %zu failed\n", summary.records, summary.failed);
            return summary.exit_code;
        }
        if (run->parsed()) return run_one(resolve(o, std::nullopt));
        for (const auto& [cmd, kind] : kinds)
            if (cmd->parsed()) return run_one(resolve(o, kind));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::Numeric);
    }
    return 0;
}
