// Acceptance suite: runs the pinned experiment configurations and prints one
// PASS/FAIL line per criterion. Exit status 1 if any criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "levyflow/errors.hpp"
#include "levyflow/experiments.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/report.hpp"

using namespace levyflow;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(const ResultRecord& r, const std::string& prefix = "") {
        for (const auto& m : r.rows) {
            if (!prefix.empty() && m.name.rfind(prefix, 0) != 0) continue;
            if (!m.pass) {
                pass = false;
                std::ostringstream os;
                os << " " << r.id << "/" << m.name << "=" << m.value;
                detail += os.str();
            }
        }
    }
};

class Suite {
public:
    explicit Suite(fs::path out) : out_(std::move(out)) {}

    ResultRecord run(ExperimentConfig c, const std::string& id) {
        c.id = id;
        c.master_seed = kSeed;
        c.output.directory = out_.string();
        c.output.formats = {"csv", "json"};
        auto r = run_experiment(c);
        records_.push_back(r);
        return r;
    }

    const std::vector<ResultRecord>& records() const { return records_; }
    const fs::path& out() const { return out_; }

private:
    fs::path out_;
    std::vector<ResultRecord> records_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig with_model(ExperimentKind kind, LevyModel model) {
    auto c = default_config(kind);
    c.model = std::move(model);
    c.drift.dim = c.model.dim();
    return c;
}

LevyModel mixed_stable_type() {
    StableTypeDensity m;
    m.kappa = RadialDensity{{PowerPiece{1.0, 0.8, 0.0, std::numeric_limits<double>::infinity()},
                             PowerPiece{0.5, 1.4, 0.0, 1.0}},
                            1};
    m.alpha1 = 0.8;
    m.alpha2 = 1.4;
    m.c1 = 1.0;
    m.c2 = 1.5;
    return {m, {}};
}

Outcome sampler_fidelity(Suite& s) {
    Outcome o;
    struct Case {
        std::string id;
        LevyModel model;
        std::vector<double> xi;
    };
    const std::vector<Case> cases{
        {"sample_cauchy", subordinate_stable(1.0, 1), {1.0}},
        {"sample_isotropic", isotropic_stable(1.5, 2), {0.7, -0.4}},
        {"sample_relativistic_sub", subordinate_relativistic(1.2, 1.0, 1), {1.5}},
        {"sample_relativistic", {RelativisticStable{0.9, 2.0, 2}, {}}, {0.5, 1.0}},
        {"sample_cylindrical_a", cylindrical_stable({{1.2, 1}, {1.8, 1}}), {0.8, 0.6}},
        {"sample_cylindrical_b", cylindrical_stable({{0.9, 1}, {1.0, 1}}), {1.0, -0.5}},
        {"sample_stable_type", mixed_stable_type(), {0.7}},
        {"sample_truncated_1d", {TruncatedStable{1.2, 1}, {}}, {1.5}},
        {"sample_truncated_2d", {TruncatedStable{1.5, 2}, {}}, {1.0, 1.0}},
    };
    for (const auto& c : cases) {
        auto cfg = with_model(ExperimentKind::Sample, c.model);
        cfg.numerics.replicas = 100000;
        cfg.numerics.xi = c.xi;
        const auto r = s.run(cfg, c.id);
        o.require(r);
        if (c.id == "sample_cauchy" && !r.find("ks_cauchy_p_value")) {
            o.pass = false;
            o.detail += " missing KS row";
        }
    }
    return o;
}

Outcome negative_moments(Suite& s) {
    Outcome o;
    for (double p : {0.3, 0.5}) {
        auto c = default_config(ExperimentKind::NegMoment);
        c.numerics.p = p;
        c.numerics.replicas = 100000;
        o.require(s.run(c, p == 0.3 ? "negmoment_p03" : "negmoment_p05"));
    }
    return o;
}

Outcome gradient_scaling(Suite& s) {
    Outcome o;
    for (double beta : {0.5, 1.0}) {
        auto c = default_config(ExperimentKind::SemigroupScaling);
        c.numerics.test_function = TestFunction(CappedPower{beta, {0.0}});
        o.require(s.run(c, beta == 0.5 ? "scaling_beta05" : "scaling_beta10"));
    }
    auto c = with_model(ExperimentKind::SemigroupScaling, cylindrical_stable({{0.9, 1}, {1.0, 1}}));
    c.numerics.test_function = TestFunction(CappedPower{0.8, {0.0, 0.0}});
    const auto r = s.run(c, "scaling_cylindrical");
    o.require(r);
    if (const auto* m = r.find("gradient_slope"); !m || std::abs(m->oracle - (0.9 * 0.8 - 1.0) / 0.9) > 1e-12) {
        o.pass = false;
        o.detail += " cylindrical target exponent";
    }
    return o;
}

Outcome holder_characterisation(Suite& s) {
    Outcome o;
    for (double beta : {0.3, 0.5}) {
        auto c = default_config(ExperimentKind::Holder);
        c.numerics.test_function = TestFunction(CappedPower{beta, {0.0}});
        o.require(s.run(c, beta == 0.3 ? "holder_beta03" : "holder_beta05"));
    }
    return o;
}

Outcome mild_pde(Suite& s) {
    Outcome o;
    o.require(s.run(default_config(ExperimentKind::Pde), "pde"));
    return o;
}

Outcome zvonkin_structure(Suite& s) {
    Outcome o;
    o.require(s.run(default_config(ExperimentKind::ZvonkinFlow), "zvonkin_flow"), "structure.");
    return o;
}

Outcome flow_uniqueness(Suite& s) {
    Outcome o;
    o.require(s.run(default_config(ExperimentKind::Uniqueness), "uniqueness"));
    for (const auto& r : s.records())
        if (r.id == "zvonkin_flow") o.require(r, "moment.");
    return o;
}

Outcome bismut_formula(Suite& s) {
    Outcome o;
    auto cauchy = with_model(ExperimentKind::Bismut, subordinate_stable(1.0, 1));
    cauchy.drift = zero_drift();
    cauchy.numerics.test_function = TestFunction(Sinusoid{});
    const auto zr = s.run(cauchy, "bismut_cauchy");
    o.require(zr, "oracle_t=");
    if (!zr.find("oracle_t=1.component=0")) {
        o.pass = false;
        o.detail += " missing oracle rows";
    }
    o.require(s.run(default_config(ExperimentKind::Bismut), "bismut_drift"), "agree_t=");
    o.require(s.run(default_config(ExperimentKind::Decay), "decay"));
    return o;
}

Outcome determinism(Suite& s) {
    Outcome o;
    Suite again(s.out() / "rerun");
    std::vector<std::pair<ExperimentConfig, std::string>> reruns;
    auto neg = default_config(ExperimentKind::NegMoment);
    neg.numerics.p = 0.5;
    neg.numerics.replicas = 100000;
    reruns.emplace_back(neg, "negmoment_p05");
    reruns.emplace_back(default_config(ExperimentKind::Uniqueness), "uniqueness");
    for (const auto& [cfg, id] : reruns) {
        const auto r = again.run(cfg, id);
        for (const auto& t : r.tables) {
            const auto name = id + "_" + t.name + ".csv";
            const auto first = slurp(s.out() / name), second = slurp(again.out() / name);
            if (first.empty() || csv_body(first) != csv_body(second)) {
                o.pass = false;
                o.detail += " " + name + " differs";
            }
        }
    }
    return o;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::string out = "acceptance_out";
    unsigned threads = 0;
    app.add_option("--out", out, "directory for records, CSV tables and plots");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    CLI11_PARSE(app, argc, argv);
    set_thread_count(threads);

    fs::remove_all(out);
    Suite suite{fs::path(out)};
    const std::vector<std::pair<std::string, std::function<Outcome(Suite&)>>> criteria{
        {"sampler fidelity", sampler_fidelity},
        {"negative-moment law", negative_moments},
        {"gradient-semigroup scaling", gradient_scaling},
        {"Holder characterisation and commutator", holder_characterisation},
        {"mild PDE solver", mild_pde},
        {"Zvonkin contraction and structure", zvonkin_structure},
        {"flow moments and uniqueness proxy", flow_uniqueness},
        {"Bismut formula and gradient decay", bismut_formula},
        {"determinism", determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second(suite);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string(" error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  %zu  %-42s (%.0f s)%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    try {
        emit_report(suite.records(), out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "report: %s\n", e.what());
        return 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
