#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "levyflow/drift.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/semigroup.hpp"

namespace levyflow {

enum class ExperimentKind {
    Sample,
    SemigroupScaling,
    NegMoment,
    Holder,
    Pde,
    ZvonkinFlow,
    Bismut,
    Uniqueness,
    Decay,
};

/// Names used in configuration files and as CLI subcommands.
std::string_view kind_name(ExperimentKind kind);
/// Throws ConfigError for an unknown name.
ExperimentKind parse_kind(std::string_view name);
const std::vector<ExperimentKind>& all_kinds();

/// Numerical knobs shared by the experiments. Empty lists and zero values
/// select the experiment's own default.
struct Numerics {
    std::size_t replicas = 10000; ///< Monte Carlo sample or replica count
    int steps = 256;              ///< time steps per unit time
    int points = 0;               ///< spatial grid points
    double tolerance = 1e-6;      ///< Picard tolerance
    double lambda = 0.0;          ///< fixed λ when positive
    double r0 = 0.0;              ///< fixed jump threshold when positive
    double gamma = 0.15;
    double p = 0.5;               ///< moment order
    double fd_step = 1e-2;
    std::vector<double> t_grid;
    std::vector<double> x;  ///< starting points, flattened by model dimension
    std::vector<double> xi; ///< frequency for characteristic-function checks
    std::vector<int> levels{4, 8, 16, 32};
    std::optional<TestFunction> test_function;
};

struct OutputSpec {
    std::string directory = "levyflow_out";
    std::vector<std::string> formats{"csv", "json", "svg"};

    bool wants(std::string_view format) const;
};

struct ExperimentConfig {
    std::string id; ///< empty means the kind name
    ExperimentKind kind = ExperimentKind::Sample;
    LevyModel model = subordinate_stable(1.0, 1);
    DriftSpec drift;
    Numerics numerics;
    std::uint64_t master_seed = 0;
    OutputSpec output;

    std::string record_id() const { return id.empty() ? std::string(kind_name(kind)) : id; }
};

nlohmann::json model_to_json(const LevyModel& model);
LevyModel model_from_json(const nlohmann::json& j);
nlohmann::json drift_to_json(const DriftSpec& b);
DriftSpec drift_from_json(const nlohmann::json& j);
nlohmann::json test_function_to_json(const TestFunction& f);
TestFunction test_function_from_json(const nlohmann::json& j);

/// Every field written out, so that serialisation is canonical.
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Missing keys take defaults; unknown keys, wrong types and invalid models
/// throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a of the canonical serialisation without the output section, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

} // namespace levyflow
