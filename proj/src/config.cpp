#include "levyflow/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "levyflow/errors.hpp"

namespace levyflow {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 9> kKindNames{{
    {ExperimentKind::Sample, "sample"},
    {ExperimentKind::SemigroupScaling, "semigroup-scaling"},
    {ExperimentKind::NegMoment, "negmoment"},
    {ExperimentKind::Holder, "holder"},
    {ExperimentKind::Pde, "pde"},
    {ExperimentKind::ZvonkinFlow, "zvonkin-flow"},
    {ExperimentKind::Bismut, "bismut"},
    {ExperimentKind::Uniqueness, "uniqueness"},
    {ExperimentKind::Decay, "decay"},
}};

/// Rejects keys of `j` outside `allowed`; `where` names the section.
void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <class T>
T get_required(const json& j, const char* key, std::string_view where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + std::string(where));
    return get_or<T>(j, key, T{});
}

// JSON has no infinity; open-ended pieces store null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double null_as_infinity(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (j.at(key).is_null()) return std::numeric_limits<double>::infinity();
    return get_or<double>(j, key, fallback);
}

json subordinator_to_json(const SubordinatorSpec& sub) {
    return std::visit(Overloaded{
                          [](const StableSub& s) { return json{{"kind", "stable"}, {"rho", s.rho}, {"scale", s.scale}}; },
                          [](const RelativisticSub& s) {
                              return json{{"kind", "relativistic"}, {"alpha", s.alpha}, {"mass", s.mass}};
                          },
                          [](const IdentitySub&) { return json{{"kind", "identity"}}; },
                      },
                      sub);
}

SubordinatorSpec subordinator_from_json(const json& j) {
    const auto kind = get_required<std::string>(j, "kind", "subordinator");
    if (kind == "stable") {
        check_keys(j, "subordinator", {"kind", "rho", "scale"});
        return StableSub{get_required<double>(j, "rho", "subordinator"), get_or<double>(j, "scale", 2.0)};
    }
    if (kind == "relativistic") {
        check_keys(j, "subordinator", {"kind", "alpha", "mass"});
        return RelativisticSub{get_required<double>(j, "alpha", "subordinator"), get_or<double>(j, "mass", 1.0)};
    }
    if (kind == "identity") {
        check_keys(j, "subordinator", {"kind"});
        return IdentitySub{};
    }
    throw ConfigError("unknown subordinator kind '" + kind + "'");
}

json density_to_json(const RadialDensity& k) {
    json pieces = json::array();
    for (const auto& p : k.pieces)
        pieces.push_back({{"coef", p.coef}, {"alpha", p.alpha}, {"r_lo", p.r_lo}, {"r_hi", finite_or_null(p.r_hi)}});
    return pieces;
}

RadialDensity density_from_json(const json& j, int dim) {
    if (!j.is_array()) throw ConfigError("density pieces must be a list");
    RadialDensity k;
    k.dim = dim;
    for (const auto& p : j) {
        check_keys(p, "density piece", {"coef", "alpha", "r_lo", "r_hi"});
        k.pieces.push_back(PowerPiece{get_required<double>(p, "coef", "density piece"),
                                      get_required<double>(p, "alpha", "density piece"), get_or<double>(p, "r_lo", 0.0),
                                      null_as_infinity(p, "r_hi", std::numeric_limits<double>::infinity())});
    }
    return k;
}

DriftShape shape_from_name(const std::string& s) {
    if (s == "zero") return DriftShape::Zero;
    if (s == "capped_power") return DriftShape::CappedPower;
    if (s == "restoring") return DriftShape::Restoring;
    if (s == "sinusoid") return DriftShape::Sinusoid;
    if (s == "linear") return DriftShape::Linear;
    throw ConfigError("unknown drift shape '" + s + "'");
}

std::string shape_name(DriftShape s) {
    switch (s) {
        case DriftShape::Zero: return "zero";
        case DriftShape::CappedPower: return "capped_power";
        case DriftShape::Restoring: return "restoring";
        case DriftShape::Sinusoid: return "sinusoid";
        case DriftShape::Linear: return "linear";
    }
    return "zero";
}

} // namespace

std::string_view kind_name(ExperimentKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "sample";
}

ExperimentKind parse_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames)
        if (n == name) return k;
    throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

const std::vector<ExperimentKind>& all_kinds() {
    static const std::vector<ExperimentKind> kinds = [] {
        std::vector<ExperimentKind> v;
        for (const auto& [k, n] : kKindNames) v.push_back(k);
        return v;
    }();
    return kinds;
}

bool OutputSpec::wants(std::string_view format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

json model_to_json(const LevyModel& model) {
    json j = std::visit(
        Overloaded{
            [](const IsotropicStable& m) { return json{{"family", "isotropic_stable"}, {"alpha", m.alpha}, {"dim", m.dim}}; },
            [](const SubordinateBM& m) {
                return json{{"family", "subordinate_bm"}, {"subordinator", subordinator_to_json(m.subordinator)},
                            {"dim", m.dim}};
            },
            [](const CylindricalStable& m) {
                json blocks = json::array();
                for (const auto& b : m.blocks) blocks.push_back({{"alpha", b.alpha}, {"dim", b.dim}});
                return json{{"family", "cylindrical_stable"}, {"blocks", blocks}};
            },
            [](const StableTypeDensity& m) {
                return json{{"family", "stable_type"}, {"density", density_to_json(m.kappa)},
                            {"alpha1", m.alpha1},      {"alpha2", m.alpha2},
                            {"c1", m.c1},              {"c2", m.c2},
                            {"dim", m.dim}};
            },
            [](const RelativisticStable& m) {
                return json{{"family", "relativistic_stable"}, {"alpha", m.alpha}, {"mass", m.mass}, {"dim", m.dim}};
            },
            [](const TruncatedStable& m) { return json{{"family", "truncated_stable"}, {"alpha", m.alpha}, {"dim", m.dim}}; },
        },
        model.family);
    j["eta"] = model.eta;
    return j;
}

LevyModel model_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("model must be an object");
    const auto family = get_required<std::string>(j, "family", "model");
    LevyModel m{IsotropicStable{}, get_or<std::vector<double>>(j, "eta", {})};
    const int dim = get_or<int>(j, "dim", 1);
    if (family == "isotropic_stable") {
        check_keys(j, "model", {"family", "alpha", "dim", "eta"});
        m.family = IsotropicStable{get_required<double>(j, "alpha", "model"), dim};
    } else if (family == "subordinate_bm") {
        check_keys(j, "model", {"family", "subordinator", "dim", "eta"});
        if (!j.contains("subordinator")) throw ConfigError("missing key 'subordinator' in model");
        m.family = SubordinateBM{subordinator_from_json(j.at("subordinator")), dim};
    } else if (family == "cylindrical_stable") {
        check_keys(j, "model", {"family", "blocks", "eta"});
        CylindricalStable c;
        if (!j.contains("blocks") || !j.at("blocks").is_array()) throw ConfigError("cylindrical model needs a block list");
        for (const auto& b : j.at("blocks")) {
            check_keys(b, "cylindrical block", {"alpha", "dim"});
            c.blocks.push_back({get_required<double>(b, "alpha", "cylindrical block"), get_or<int>(b, "dim", 1)});
        }
        m.family = c;
    } else if (family == "stable_type") {
        check_keys(j, "model", {"family", "density", "alpha1", "alpha2", "c1", "c2", "dim", "eta"});
        StableTypeDensity s;
        s.dim = dim;
        s.kappa = density_from_json(j.contains("density") ? j.at("density") : json::array(), dim);
        s.alpha1 = get_required<double>(j, "alpha1", "model");
        s.alpha2 = get_required<double>(j, "alpha2", "model");
        s.c1 = get_required<double>(j, "c1", "model");
        s.c2 = get_required<double>(j, "c2", "model");
        m.family = s;
    } else if (family == "relativistic_stable") {
        check_keys(j, "model", {"family", "alpha", "mass", "dim", "eta"});
        m.family = RelativisticStable{get_required<double>(j, "alpha", "model"), get_or<double>(j, "mass", 1.0), dim};
    } else if (family == "truncated_stable") {
        check_keys(j, "model", {"family", "alpha", "dim", "eta"});
        m.family = TruncatedStable{get_required<double>(j, "alpha", "model"), dim};
    } else {
        throw ConfigError("unknown model family '" + family + "'");
    }
    validate(m);
    return m;
}

json drift_to_json(const DriftSpec& b) {
    return json{{"shape", shape_name(b.shape)},   {"dim", b.dim},
                {"beta", b.beta},                 {"amplitude", b.amplitude},
                {"center", b.center},             {"direction", b.direction},
                {"frequency", b.frequency},       {"phase", b.phase},
                {"modulation", b.modulation},     {"mollification", b.mollification}};
}

DriftSpec drift_from_json(const json& j) {
    check_keys(j, "drift", {"shape", "dim", "beta", "amplitude", "center", "direction", "frequency", "phase",
                            "modulation", "mollification"});
    DriftSpec b;
    b.shape = shape_from_name(get_or<std::string>(j, "shape", "zero"));
    b.dim = get_or<int>(j, "dim", 1);
    b.beta = get_or<double>(j, "beta", 1.0);
    b.amplitude = get_or<double>(j, "amplitude", 1.0);
    b.center = get_or<std::vector<double>>(j, "center", {});
    b.direction = get_or<std::vector<double>>(j, "direction", {});
    b.frequency = get_or<std::vector<double>>(j, "frequency", {});
    b.phase = get_or<double>(j, "phase", 0.0);
    b.modulation = get_or<double>(j, "modulation", 0.0);
    b.mollification = get_or<int>(j, "mollification", 0);
    if (b.dim < 1) throw ConfigError("drift dimension must be positive");
    if (!(b.beta > 0.0 && b.beta <= 1.0)) throw ConfigError("drift beta must lie in (0, 1]");
    if (b.mollification < 0) throw ConfigError("mollification level must be nonnegative");
    return b;
}

json test_function_to_json(const TestFunction& f) {
    json j = std::visit(
        Overloaded{
            [](const Sinusoid& s) { return json{{"kind", "sinusoid"}, {"frequency", s.frequency}, {"phase", s.phase}}; },
            [](const CappedPower& c) {
                return json{{"kind", "capped_power"}, {"beta", c.beta}, {"center", c.center},
                            {"axis_offset", c.axis_offset}, {"axis_dim", c.axis_dim}};
            },
            [](const IndicatorSmoothed& s) { return json{{"kind", "indicator"}, {"edge", s.edge}, {"width", s.width}}; },
            [](const Constant& c) { return json{{"kind", "constant"}, {"value", c.value}}; },
            [](const GaussianBump& g) { return json{{"kind", "gaussian_bump"}, {"center", g.center}, {"width", g.width}}; },
            [](const Linear& l) { return json{{"kind", "linear"}, {"coef", l.coef}}; },
        },
        f.kind());
    j["scale"] = f.scale();
    return j;
}

TestFunction test_function_from_json(const json& j) {
    const auto kind = get_required<std::string>(j, "kind", "test_function");
    const double scale = get_or<double>(j, "scale", 1.0);
    auto make = [&]() -> TestFunction {
        if (kind == "sinusoid") {
            check_keys(j, "test_function", {"kind", "frequency", "phase", "scale"});
            return TestFunction(Sinusoid{get_or<std::vector<double>>(j, "frequency", {1.0}), get_or<double>(j, "phase", 0.0)});
        }
        if (kind == "capped_power") {
            check_keys(j, "test_function", {"kind", "beta", "center", "axis_offset", "axis_dim", "scale"});
            return TestFunction(CappedPower{get_or<double>(j, "beta", 0.5), get_or<std::vector<double>>(j, "center", {}),
                                            get_or<int>(j, "axis_offset", 0), get_or<int>(j, "axis_dim", 0)});
        }
        if (kind == "indicator") {
            check_keys(j, "test_function", {"kind", "edge", "width", "scale"});
            return TestFunction(IndicatorSmoothed{get_or<double>(j, "edge", 0.0), get_or<double>(j, "width", 0.05)});
        }
        if (kind == "constant") {
            check_keys(j, "test_function", {"kind", "value", "scale"});
            return TestFunction(Constant{get_or<double>(j, "value", 1.0)});
        }
        if (kind == "gaussian_bump") {
            check_keys(j, "test_function", {"kind", "center", "width", "scale"});
            return TestFunction(GaussianBump{get_or<std::vector<double>>(j, "center", {}), get_or<double>(j, "width", 0.1)});
        }
        if (kind == "linear") {
            check_keys(j, "test_function", {"kind", "coef", "scale"});
            return TestFunction(Linear{get_or<std::vector<double>>(j, "coef", {1.0})});
        }
        throw ConfigError("unknown test function kind '" + kind + "'");
    };
    const auto f = make();
    return scale == 1.0 ? f : f.scaled(scale);
}

json config_to_json(const ExperimentConfig& c) {
    const auto& n = c.numerics;
    json numerics{{"replicas", n.replicas}, {"steps", n.steps},       {"points", n.points},
                  {"tolerance", n.tolerance}, {"lambda", n.lambda},   {"r0", n.r0},
                  {"gamma", n.gamma},       {"p", n.p},               {"fd_step", n.fd_step},
                  {"t_grid", n.t_grid},     {"x", n.x},               {"xi", n.xi},
                  {"levels", n.levels}};
    numerics["test_function"] = n.test_function ? test_function_to_json(*n.test_function) : json(nullptr);
    return json{{"id", c.id},
                {"experiment", kind_name(c.kind)},
                {"model", model_to_json(c.model)},
                {"drift", drift_to_json(c.drift)},
                {"numerics", numerics},
                {"seed", {{"master_seed", c.master_seed}}},
                {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
}

ExperimentConfig config_from_json(const json& j) {
    check_keys(j, "configuration", {"id", "experiment", "model", "drift", "numerics", "seed", "output"});
    ExperimentConfig c;
    c.id = get_or<std::string>(j, "id", "");
    c.kind = parse_kind(get_required<std::string>(j, "experiment", "configuration"));
    try {
        if (j.contains("model")) c.model = model_from_json(j.at("model"));
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
    c.drift = drift_from_json(j.value("drift", json::object()));
    if (c.drift.dim != c.model.dim()) throw ConfigError("drift dimension does not match the model");

    const json numerics = j.value("numerics", json::object());
    check_keys(numerics, "numerics", {"replicas", "steps", "points", "tolerance", "lambda", "r0", "gamma", "p", "fd_step",
                                      "t_grid", "x", "xi", "levels", "test_function"});
    auto& n = c.numerics;
    n.replicas = get_or<std::size_t>(numerics, "replicas", n.replicas);
    n.steps = get_or<int>(numerics, "steps", n.steps);
    n.points = get_or<int>(numerics, "points", n.points);
    n.tolerance = get_or<double>(numerics, "tolerance", n.tolerance);
    n.lambda = get_or<double>(numerics, "lambda", n.lambda);
    n.r0 = get_or<double>(numerics, "r0", n.r0);
    n.gamma = get_or<double>(numerics, "gamma", n.gamma);
    n.p = get_or<double>(numerics, "p", n.p);
    n.fd_step = get_or<double>(numerics, "fd_step", n.fd_step);
    n.t_grid = get_or<std::vector<double>>(numerics, "t_grid", {});
    n.x = get_or<std::vector<double>>(numerics, "x", {});
    n.xi = get_or<std::vector<double>>(numerics, "xi", {});
    n.levels = get_or<std::vector<int>>(numerics, "levels", n.levels);
    if (numerics.contains("test_function") && !numerics.at("test_function").is_null())
        n.test_function = test_function_from_json(numerics.at("test_function"));
    if (n.replicas < 2) throw ConfigError("replicas must be at least 2");
    if (n.steps < 1) throw ConfigError("steps must be positive");
    if (n.points < 0) throw ConfigError("points must be nonnegative");
    if (!n.x.empty() && n.x.size() % static_cast<std::size_t>(c.model.dim()) != 0)
        throw ConfigError("numerics.x must hold whole points of the model dimension");

    const json seed = j.value("seed", json::object());
    check_keys(seed, "seed", {"master_seed"});
    c.master_seed = get_or<std::uint64_t>(seed, "master_seed", 0);

    const json output = j.value("output", json::object());
    check_keys(output, "output", {"directory", "formats"});
    c.output.directory = get_or<std::string>(output, "directory", c.output.directory);
    c.output.formats = get_or<std::vector<std::string>>(output, "formats", c.output.formats);
    for (const auto& f : c.output.formats)
        if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown output format '" + f + "'");
    return c;
}

ExperimentConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read configuration file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) { return config_to_json(config).dump(2); }

std::string config_hash(const ExperimentConfig& config) {
    auto j = config_to_json(config);
    j.erase("output");
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

} // namespace levyflow
