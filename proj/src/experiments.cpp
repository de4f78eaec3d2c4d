#include "levyflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "levyflow/bismut.hpp"
#include "levyflow/errors.hpp"
#include "levyflow/holder.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/pde_mild.hpp"
#include "levyflow/samplers.hpp"
#include "levyflow/semigroup.hpp"
#include "levyflow/stats.hpp"
#include "levyflow/zvonkin.hpp"

namespace levyflow {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string label(const std::string& stem, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return stem + "=" + buf;
}

json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double bound_from_json(const json& j, double if_null) { return j.is_null() ? if_null : j.get<double>(); }

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> fallback) {
    return v.empty() ? fallback : v;
}

/// The i-th starting point of numerics.x, or `fallback` repeated over the dimension.
std::vector<std::vector<double>> starting_points(const ExperimentConfig& c, double fallback) {
    const int d = c.model.dim();
    std::vector<std::vector<double>> pts;
    if (c.numerics.x.empty()) {
        pts.emplace_back(d, fallback);
        return pts;
    }
    for (std::size_t i = 0; i < c.numerics.x.size(); i += d)
        pts.emplace_back(c.numerics.x.begin() + i, c.numerics.x.begin() + i + d);
    return pts;
}

void require_admissible_drift(const LevyModel& model, const DriftSpec& b) {
    if (b.is_zero()) return;
    const auto range = admissible_beta(model);
    if (!range.contains(b.holder_exponent())) {
        std::ostringstream msg;
        msg << "drift exponent " << b.holder_exponent() << " lies outside the admissible range (" << range.lo
            << ", " << range.hi << "] of the " << model.family_name() << " model";
        throw InadmissibleModel(msg.str());
    }
}

TransformOptions transform_options(const ExperimentConfig& c) {
    TransformOptions o;
    o.grid = flow_grid(c.model.dim());
    if (c.numerics.points > 0) o.grid.points = c.numerics.points;
    o.mild.tolerance = c.numerics.tolerance;
    o.lambda = c.numerics.lambda;
    o.r0 = c.numerics.r0;
    o.seed = c.master_seed;
    return o;
}

GradientOptions gradient_options(const ExperimentConfig& c, StreamTag tag, std::uint64_t offset) {
    GradientOptions o;
    o.replicas = c.numerics.replicas;
    o.steps_per_unit = c.numerics.steps;
    o.seed = c.master_seed;
    o.tag = tag;
    o.stream_offset = offset;
    return o;
}

TestFunction test_function_or(const ExperimentConfig& c, TestFunction fallback) {
    return c.numerics.test_function ? *c.numerics.test_function : fallback;
}

double frobenius(std::span<const double> m) {
    double s = 0.0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
}

bool has_cauchy_marginal(const LevyModel& model) {
    if (model.dim() != 1 || !model.eta.empty()) return false;
    return std::abs(symbol_re(model, {1.0}) - 1.0) < 1e-12 && std::abs(symbol_re(model, {3.0}) - 3.0) < 1e-12;
}

// ---- sample ---------------------------------------------------------------

ResultRecord sample_experiment(const ExperimentConfig& c) {
    ResultRecord r;
    const int d = c.model.dim();
    const double t = c.numerics.t_grid.empty() ? 1.0 : c.numerics.t_grid.front();
    std::vector<double> xi = c.numerics.xi;
    if (xi.empty()) xi.assign(d, 0.8 / std::sqrt(static_cast<double>(d)));
    if (static_cast<int>(xi.size()) != d) throw ConfigError("numerics.xi must match the model dimension");

    const std::size_t n = c.numerics.replicas;
    RngStream rng(c.master_seed, stream_id(StreamTag::Sampler, 0));
    std::vector<double> cosines(n), first(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = sample_marginal(c.model, t, rng, 0.05);
        double dot = 0.0;
        for (int k = 0; k < d; ++k) dot += xi[k] * z[k];
        cosines[i] = std::cos(dot);
        first[i] = z[0] / t;
    }
    const auto cf = mean_se(cosines);
    const double oracle = std::exp(-t * symbol_re(c.model, xi));
    r.rows.push_back(MetricRow::within("characteristic_function", cf.value, cf.se, oracle, 3.0 * cf.se));

    double ks_stat = std::nan(""), ks_p = std::nan("");
    if (has_cauchy_marginal(c.model)) {
        const auto ks = ks_test(first, [](double x) { return 0.5 + std::atan(x) / std::numbers::pi; });
        ks_stat = ks.statistic;
        ks_p = ks.p_value;
        r.rows.push_back(MetricRow::at_least("ks_cauchy_p_value", ks.p_value, 0.01));
    }
    Table tab{"summary", {"t"}, {}};
    std::vector<double> row{t};
    for (int k = 0; k < d; ++k) {
        tab.header.push_back("xi_" + std::to_string(k + 1));
        row.push_back(xi[k]);
    }
    for (const char* h : {"cf_mc", "cf_se", "cf_oracle", "ks_statistic", "ks_p_value"}) tab.header.push_back(h);
    for (double v : {cf.value, cf.se, oracle, ks_stat, ks_p}) row.push_back(v);
    tab.rows.push_back(row);
    r.tables.push_back(tab);
    return r;
}

// ---- semigroup-scaling ----------------------------------------------------

ResultRecord scaling_experiment(const ExperimentConfig& c) {
    ResultRecord r;
    const int d = c.model.dim();
    const auto f = test_function_or(c, TestFunction(CappedPower{0.5, std::vector<double>(d, 0.0)}));
    const auto tg = or_default(c.numerics.t_grid, dyadic_grid(-12, -2));
    const auto x0 = starting_points(c, 0.0).front();
    const auto fit = fit_gradient_scaling(c.model, f, tg, x0, c.numerics.replicas, c.master_seed);
    const auto hp = hypothesis_params(c.model);
    const double expected = (hp.delta * f.holder_exponent() - 1.0) / hp.alpha;
    r.rows.push_back(MetricRow::within("gradient_slope", fit.slope, 0.0, expected, 0.1));
    r.rows.push_back(MetricRow::diagnostic("fit_residual", fit.residual));

    Table tab{"scaling", {"t", "sup_gradient", "se", "argmax"}, {}};
    Series s{"gradient_scaling", "t", "sup |grad T_t f|", {}, {}};
    for (const auto& p : fit.points) {
        tab.rows.push_back({p.t, p.sup_gradient, p.se, p.argmax});
        s.x.push_back(p.t);
        s.y.push_back(p.sup_gradient);
    }
    r.tables.push_back(tab);
    r.series.push_back(s);
    return r;
}

// ---- negmoment ------------------------------------------------------------

ResultRecord negmoment_experiment(const ExperimentConfig& c) {
    const auto* sbm = std::get_if<SubordinateBM>(&c.model.family);
    if (!sbm) throw UnsupportedModel("negative moments need a subordinated Brownian model");
    ResultRecord r;
    const double p = c.numerics.p;
    const auto tg = or_default(c.numerics.t_grid, dyadic_grid(-10, 0));
    const auto res = negative_moment(sbm->subordinator, p, tg, c.numerics.replicas, c.master_seed);
    Table tab{"negmoment", {"t", "mc", "se", "oracle"}, {}};
    Series s{"negative_moment", "t", "E S_t^-p", {}, {}};
    for (const auto& pt : res.points) {
        r.rows.push_back(MetricRow::within(label("moment_t", pt.t), pt.mc.value, pt.mc.se, pt.oracle, 3.0 * pt.mc.se));
        tab.rows.push_back({pt.t, pt.mc.value, pt.mc.se, pt.oracle});
        s.x.push_back(pt.t);
        s.y.push_back(pt.mc.value);
    }
    if (std::holds_alternative<StableSub>(sbm->subordinator) && tg.size() >= 2) {
        const double alpha = subordinator_alpha(sbm->subordinator);
        r.rows.push_back(MetricRow::within("slope", res.slope, 0.0, -2.0 * p / alpha, 0.05));
    }
    r.tables.push_back(tab);
    r.series.push_back(s);
    return r;
}

// ---- holder ---------------------------------------------------------------

ResultRecord holder_experiment(const ExperimentConfig& c) {
    ResultRecord r;
    const auto tf = test_function_or(c, TestFunction(CappedPower{0.5, {0.0}}));
    const double beta = tf.holder_exponent();
    const auto f = line_profile(tf);
    const auto g = line_profile(TestFunction(Sinusoid{{1.0}}));
    const auto thetas = or_default(c.numerics.t_grid, dyadic_grid(-16, -2));
    std::vector<double> xs;
    for (int i = 0; i < 33; ++i) xs.push_back(-4.0 + 0.25 * i);

    const auto semi = holder_seminorm_estimate(f, beta, thetas, xs);
    r.rows.push_back(MetricRow::within("seminorm_slope", semi.slope, 0.0, beta - 1.0, 0.1));
    r.rows.push_back(MetricRow::diagnostic("seminorm", semi.seminorm));
    const auto comm = commutator_scaling(f, g, thetas, xs);
    // One-sided: the commutator may decay faster than θ^{γ−1}, never slower.
    const double gamma = std::min(0.3, beta);
    r.rows.push_back(MetricRow::at_least("commutator_slope", comm.slope, gamma - 1.0 - 0.1));

    double worst = 0.0;
    for (double theta : {1e-3, 0.05, 1.0})
        for (double x : {0.0, 0.37, 1.0, -2.5}) {
            const double h = theta * 1e-4;
            const double fd = (poisson_integral(f, theta + h, x) - poisson_integral(f, theta - h, x)) / (2.0 * h);
            const double an = poisson_theta_derivative(f, theta, x);
            worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
        }
    r.rows.push_back(MetricRow::at_most("poisson_derivative_vs_fd", worst, 1e-5));

    Table tab{"holder", {"theta", "dtheta_sup", "scaled", "commutator_sup"}, {}};
    Series s1{"theta_derivative", "theta", "sup |d/dtheta P f|", {}, {}};
    Series s2{"commutator", "theta", "sup |commutator|", {}, {}};
    for (std::size_t i = 0; i < semi.points.size(); ++i) {
        const double cs = i < comm.points.size() ? comm.points[i].sup : std::nan("");
        tab.rows.push_back({semi.points[i].theta, semi.points[i].sup, semi.points[i].scaled, cs});
        s1.x.push_back(semi.points[i].theta);
        s1.y.push_back(semi.points[i].sup);
    }
    for (const auto& p : comm.points) {
        s2.x.push_back(p.theta);
        s2.y.push_back(p.sup);
    }
    r.tables.push_back(tab);
    r.series.push_back(s1);
    r.series.push_back(s2);
    return r;
}

// ---- pde ------------------------------------------------------------------

ResultRecord pde_experiment(const ExperimentConfig& c) {
    ResultRecord r;
    const int d = c.model.dim();
    require_admissible_drift(c.model, c.drift);
    MildOptions mo;
    mo.tolerance = c.numerics.tolerance;
    Table tab{"pde", {"case", "lambda", "points", "steps", "sup_u", "sup_f", "value"}, {}};

    // b ≡ 0, f = sin x₁: u_t = sin x₁ (1 − e^{−(λ+ψ)(1−t)})/(λ+ψ) with ψ = ψ(e₁).
    {
        SpaceTimeGrid g;
        g.dim = d;
        g.points = d == 1 ? 512 : 64;
        g.steps = d == 1 ? 256 : 64;
        g.half_width = 5.0 * std::numbers::pi;
        g.cutoff_width = 0.0;
        const double lambda = 1.0;
        std::vector<double> e1(d, 0.0);
        e1[0] = 1.0;
        const double psi = symbol_re(c.model, e1);
        const auto src = sinusoid_drift(1.0, 1.0, d);
        const auto sol = solve_mild(c.model, zero_drift(d), src, lambda, g, mo);
        std::size_t stride = 1;
        for (int k = 1; k < d; ++k) stride *= static_cast<std::size_t>(g.points);
        double worst = 0.0;
        for (int i : {0, g.steps / 2}) {
            const double t = g.h() * i;
            const double amp = (1.0 - std::exp(-(lambda + psi) * (1.0 - t))) / (lambda + psi);
            for (std::size_t n = 0; n < sol.nodes(); ++n) {
                const double x1 = -g.half_width + g.spacing() * static_cast<double>(n / stride);
                worst = std::max(worst, std::abs(sol.u_at(i, n, 0) - amp * std::sin(x1)));
            }
        }
        const double weak = weak_residual(sol, c.model, zero_drift(d), src).max;
        r.rows.push_back(MetricRow::at_most("closed_form_error", worst, 1e-4));
        r.rows.push_back(MetricRow::at_most("closed_form_weak_residual", weak, 1e-4));
        tab.rows.push_back({0, lambda, double(g.points), double(g.steps), sol.diagnostics.sup_u, sol.diagnostics.sup_f, worst});
    }

    if (!c.drift.is_zero()) {
        // ‖u‖∞ ≤ ‖f‖∞ (1 − e^{−λ})/λ with f = b modulated in time.
        SpaceTimeGrid g;
        g.dim = d;
        g.points = d == 1 ? 256 : 64;
        g.steps = d == 1 ? 128 : 64;
        auto f = c.drift;
        f.modulation = 0.5;
        for (double lambda : {0.0, 1.0, 8.0}) {
            const auto sol = solve_mild(c.model, c.drift, f, lambda, g, mo);
            const double factor = lambda > 0.0 ? (1.0 - std::exp(-lambda)) / lambda : 1.0;
            const double bound = sol.diagnostics.sup_f * factor;
            r.rows.push_back(MetricRow::at_most(label("max_principle_lambda", lambda), sol.diagnostics.sup_u,
                                                bound * (1.0 + 2e-6)));
            tab.rows.push_back({1, lambda, double(g.points), double(g.steps), sol.diagnostics.sup_u,
                                sol.diagnostics.sup_f, bound});
        }

        const double lambda = c.numerics.lambda > 0.0 ? c.numerics.lambda : 4.0;
        double prev = 0.0;
        Series s{"weak_residual_refinement", "points", "weak residual", {}, {}};
        for (int level = 0; level < 3; ++level) {
            SpaceTimeGrid gr;
            gr.dim = d;
            gr.points = (d == 1 ? 128 : 32) << level;
            gr.steps = 64 << level;
            const auto sol = solve_mild(c.model, c.drift, c.drift, lambda, gr, mo, c.numerics.gamma);
            const double w = weak_residual(sol, c.model, c.drift, c.drift).max;
            if (level > 0)
                r.rows.push_back(MetricRow::at_most(label("weak_residual_ratio_level", level), w / prev, 0.5));
            tab.rows.push_back({2, lambda, double(gr.points), double(gr.steps), sol.diagnostics.sup_u,
                                sol.diagnostics.sup_f, w});
            s.x.push_back(gr.points);
            s.y.push_back(w);
            prev = w;
        }
        r.series.push_back(s);
    }
    r.tables.push_back(tab);
    return r;
}

// ---- zvonkin-flow ---------------------------------------------------------

void structure_rows(ResultRecord& r, const ZvonkinTransform& tr, std::uint64_t seed) {
    const auto& dg = tr.u.diagnostics;
    r.rows.push_back(MetricRow::at_most("structure.lambda_criterion", dg.grad_sup + dg.grad_seminorm, 0.5));
    r.rows.push_back(MetricRow::diagnostic("structure.lambda", tr.lambda));
    r.rows.push_back(MetricRow::diagnostic("structure.r0", tr.r0));
    const auto chk = check_transform(tr, 10000, seed);
    r.rows.push_back(MetricRow::at_least("structure.sandwich_low", chk.sandwich_low, 0.5));
    r.rows.push_back(MetricRow::at_most("structure.sandwich_high", chk.sandwich_high, 1.5));
    r.rows.push_back(MetricRow::at_most("structure.inverse_grad", chk.inverse_grad, 2.0));
    r.rows.push_back(MetricRow::at_most("structure.round_trip", chk.round_trip, 1e-9));
    r.rows.push_back(MetricRow::at_most("structure.jump_ratio", chk.jump_ratio, 1.5));
    r.rows.push_back(MetricRow::at_most("structure.grad_jump_ratio", chk.grad_jump_ratio, 1.0));
    r.rows.push_back(MetricRow::at_most("structure.drift_ratio", chk.drift_ratio, 1.0));
    r.rows.push_back(MetricRow::at_most("structure.r0_condition", chk.r0_condition, std::nextafter(1.0, 0.0)));
}

ResultRecord zvonkin_experiment(const ExperimentConfig& c) {
    require_admissible_drift(c.model, c.drift);
    ResultRecord r;
    const auto tr = build_transform(c.model, c.drift, c.numerics.gamma, transform_options(c));
    structure_rows(r, tr, c.master_seed);

    // E sup_t ‖∇X_t‖^p over n and 2n replicas with shared noise per replica.
    std::vector<std::vector<double>> xs;
    if (c.numerics.x.empty()) {
        for (double v : {-1.0, -0.5, 0.0, 0.5, 1.0}) xs.emplace_back(c.model.dim(), v);
    } else {
        xs = starting_points(c, 0.0);
    }
    const std::size_t n = c.numerics.replicas;
    const auto sups = parallel_map(2 * n, [&](std::size_t rep) {
        RngStream rng(c.master_seed, stream_id(StreamTag::Flow, rep));
        const auto path = sample_path(c.model, TimeGrid{c.numerics.steps, 1.0}, tr.r0, rng);
        std::vector<double> out(xs.size(), std::nan(""));
        for (std::size_t k = 0; k < xs.size(); ++k) {
            try {
                const auto fs = solve_flow(tr, xs[k], path);
                double s = 0.0;
                for (int i = 0; i <= path.grid.steps; ++i) s = std::max(s, frobenius(fs.grad_x_at(i)));
                out[k] = s;
            } catch (const StateEscape&) {
            }
        }
        return out;
    });
    Table tab{"moments", {"x_index", "x1", "p", "replicas", "moment_n", "se_n", "moment_2n", "se_2n", "ratio"}, {}};
    for (std::size_t k = 0; k < xs.size(); ++k)
        for (double p : {2.0, 4.0}) {
            std::vector<double> half, full;
            for (std::size_t rep = 0; rep < 2 * n; ++rep) {
                const double s = sups[rep][k];
                if (std::isnan(s)) continue;
                (rep < n ? half : full).push_back(std::pow(s, p));
            }
            full.insert(full.end(), half.begin(), half.end());
            const auto mh = mean_se(half), mf = mean_se(full);
            const double ratio = mf.value / mh.value;
            std::ostringstream name;
            name << "moment.p=" << p << ".x=" << xs[k][0];
            r.rows.push_back(MetricRow::between(name.str(), ratio, 0.8, 1.25));
            tab.rows.push_back({double(k), xs[k][0], p, double(n), mh.value, mh.se, mf.value, mf.se, ratio});
        }
    r.tables.push_back(tab);
    return r;
}

// ---- bismut ---------------------------------------------------------------

ResultRecord bismut_experiment(const ExperimentConfig& c) {
    require_admissible_drift(c.model, c.drift);
    subordinated_blocks(c.model);
    ResultRecord r;
    const auto tr = build_transform(c.model, c.drift, c.numerics.gamma, transform_options(c));
    const auto f = test_function_or(c, TestFunction(Sinusoid{}));
    const auto x = starting_points(c, 0.3).front();
    const auto ts = or_default(c.numerics.t_grid, {0.25, 0.5, 1.0});
    const auto* sine = std::get_if<Sinusoid>(&f.kind());
    const bool oracle = c.drift.is_zero() && sine != nullptr && c.model.eta.empty();

    Table tab{"bismut", {"t", "bismut_est", "bismut_se", "fd_est", "fd_se", "agree_flag"}, {}};
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double t = ts[k];
        const std::uint64_t offset = static_cast<std::uint64_t>(k) << 32;
        const auto bis = bismut_gradient(tr, c.model, f, t, x, gradient_options(c, StreamTag::Bismut, offset));
        const auto fd = fd_gradient(c.model, c.drift, f, t, x, c.numerics.fd_step,
                                    gradient_options(c, StreamTag::Bismut, offset + (1ull << 40)));
        bool agree = true;
        for (std::size_t i = 0; i < bis.gradient.size(); ++i) {
            const auto& b = bis.gradient[i];
            const auto& g = fd.gradient[i];
            const double tol = 3.0 * std::hypot(b.se, g.se) + std::abs(fd.bias[i]);
            auto row = MetricRow::within(label("agree_t", t) + ".component=" + std::to_string(i), b.value,
                                         std::hypot(b.se, g.se), g.value, tol);
            agree = agree && row.pass;
            r.rows.push_back(row);
        }
        if (oracle) {
            // ∇E sin(ξ·(x + Z_t) + φ) = ξ e^{−tψ(ξ)} cos(ξ·x + φ).
            const int d = c.model.dim();
            std::vector<double> xi(d);
            double phase = sine->phase;
            for (int i = 0; i < d; ++i) {
                xi[i] = i < static_cast<int>(sine->frequency.size()) ? sine->frequency[i] : 0.0;
                phase += xi[i] * x[i];
            }
            const double damp = std::exp(-t * symbol_re(c.model, xi)) * std::cos(phase) * f.scale();
            for (int i = 0; i < d; ++i) {
                const auto& b = bis.gradient[i];
                r.rows.push_back(MetricRow::within(label("oracle_t", t) + ".component=" + std::to_string(i), b.value,
                                                   b.se, xi[i] * damp, 3.0 * b.se));
            }
        }
        r.rows.push_back(MetricRow::diagnostic(label("escaped_t", t), double(bis.escaped)));
        tab.rows.push_back({t, bis.gradient[0].value, bis.gradient[0].se, fd.gradient[0].value, fd.gradient[0].se,
                            agree ? 1.0 : 0.0});
    }
    r.tables.push_back(tab);
    return r;
}

// ---- decay ----------------------------------------------------------------

ResultRecord decay_experiment(const ExperimentConfig& c) {
    require_admissible_drift(c.model, c.drift);
    ResultRecord r;
    const auto tr = build_transform(c.model, c.drift, c.numerics.gamma, transform_options(c));
    const auto x = starting_points(c, 0.3).front();
    const auto f = test_function_or(c, TestFunction(IndicatorSmoothed{x[0], 0.01}));
    const auto ts = or_default(c.numerics.t_grid, dyadic_grid(-6, 0));
    const auto dc = decay_check(tr, c.model, f, ts, x, gradient_options(c, StreamTag::Decay, 0));
    r.rows.push_back(MetricRow::at_least("decay_slope", dc.slope, dc.bound));
    r.rows.push_back(MetricRow::diagnostic("fit_residual", dc.residual));
    Table tab{"decay", {"t", "gradient_norm", "se"}, {}};
    Series s{"decay", "t", "|grad E f(X_t)|", {}, {}};
    for (const auto& p : dc.points) {
        tab.rows.push_back({p.t, p.gradient_norm, p.se});
        s.x.push_back(p.t);
        s.y.push_back(p.gradient_norm);
    }
    r.tables.push_back(tab);
    r.series.push_back(s);
    return r;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

bool MetricRow::recompute() const { return value >= lower && value <= upper; }

MetricRow MetricRow::within(std::string name, double value, double se, double oracle, double tolerance) {
    MetricRow r{std::move(name), value, se, oracle, tolerance, oracle - tolerance, oracle + tolerance, false};
    r.pass = r.recompute();
    return r;
}

MetricRow MetricRow::at_most(std::string name, double value, double bound, double se) {
    MetricRow r{std::move(name), value, se, bound, 0.0, -kInf, bound, false};
    r.pass = r.recompute();
    return r;
}

MetricRow MetricRow::at_least(std::string name, double value, double bound, double se) {
    MetricRow r{std::move(name), value, se, bound, 0.0, bound, kInf, false};
    r.pass = r.recompute();
    return r;
}

MetricRow MetricRow::between(std::string name, double value, double lo, double hi, double se) {
    MetricRow r{std::move(name), value, se, 0.5 * (lo + hi), 0.5 * (hi - lo), lo, hi, false};
    r.pass = r.recompute();
    return r;
}

MetricRow MetricRow::diagnostic(std::string name, double value, double se) {
    MetricRow r{std::move(name), value, se, std::nan(""), kInf, -kInf, kInf, true};
    return r;
}

bool ResultRecord::passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const MetricRow& m) { return m.pass; });
}

const MetricRow* ResultRecord::find(const std::string& name) const {
    for (const auto& m : rows)
        if (m.name == name) return &m;
    return nullptr;
}

json record_to_json(const ResultRecord& r) {
    json rows = json::array();
    for (const auto& m : r.rows)
        rows.push_back({{"name", m.name},
                        {"value", bound_to_json(m.value)},
                        {"se", bound_to_json(m.se)},
                        {"oracle", bound_to_json(m.oracle)},
                        {"tolerance", bound_to_json(m.tolerance)},
                        {"lower", bound_to_json(m.lower)},
                        {"upper", bound_to_json(m.upper)},
                        {"pass", m.pass}});
    json series = json::array();
    for (const auto& s : r.series)
        series.push_back({{"name", s.name}, {"x_label", s.x_label}, {"y_label", s.y_label}, {"x", s.x}, {"y", s.y},
                          {"log_x", s.log_x}, {"log_y", s.log_y}});
    return json{{"id", r.id},
                {"experiment", kind_name(r.kind)},
                {"config_hash", r.config_hash},
                {"rows", rows},
                {"series", series},
                {"tables", [&] {
                     json t = json::array();
                     for (const auto& tab : r.tables) t.push_back(tab.name);
                     return t;
                 }()},
                {"wall_clock_seconds", r.wall_clock_seconds},
                {"replicas", r.replicas},
                {"passed", r.passed()}};
}

ResultRecord record_from_json(const json& j) {
    ResultRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.kind = parse_kind(j.at("experiment").get<std::string>());
        r.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& m : j.at("rows")) {
            MetricRow row;
            row.name = m.at("name").get<std::string>();
            row.value = bound_from_json(m.at("value"), std::nan(""));
            row.se = bound_from_json(m.at("se"), std::nan(""));
            row.oracle = bound_from_json(m.at("oracle"), std::nan(""));
            row.tolerance = bound_from_json(m.at("tolerance"), kInf);
            row.lower = bound_from_json(m.at("lower"), -kInf);
            row.upper = bound_from_json(m.at("upper"), kInf);
            row.pass = m.at("pass").get<bool>();
            r.rows.push_back(row);
        }
        for (const auto& s : j.value("series", json::array()))
            r.series.push_back({s.at("name"), s.at("x_label"), s.at("y_label"), s.at("x").get<std::vector<double>>(),
                                s.at("y").get<std::vector<double>>(), s.at("log_x"), s.at("log_y")});
        r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
        r.replicas = j.value("replicas", std::size_t{0});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed result record: ") + e.what());
    }
    return r;
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    auto& n = c.numerics;
    const auto holder_model = subordinate_stable(1.5, 1);
    const auto holder_drift = capped_power_drift(0.7, 1.0);
    switch (kind) {
        case ExperimentKind::Sample:
            c.model = subordinate_stable(1.0, 1);
            n.replicas = 100000;
            break;
        case ExperimentKind::SemigroupScaling:
            c.model = subordinate_stable(1.0, 1);
            n.replicas = 200000;
            n.test_function = TestFunction(CappedPower{0.5, {0.0}});
            break;
        case ExperimentKind::NegMoment:
            c.model = subordinate_stable(1.0, 1);
            n.replicas = 100000;
            n.p = 0.5;
            break;
        case ExperimentKind::Holder:
            c.model = subordinate_stable(1.0, 1);
            n.test_function = TestFunction(CappedPower{0.5, {0.0}});
            break;
        case ExperimentKind::Pde:
            c.model = isotropic_stable(1.5, 1);
            c.drift = holder_drift;
            break;
        case ExperimentKind::ZvonkinFlow:
            c.model = holder_model;
            c.drift = holder_drift;
            n.replicas = 1000;
            break;
        case ExperimentKind::Bismut:
            c.model = holder_model;
            c.drift = holder_drift;
            n.replicas = 20000;
            n.x = {0.3};
            break;
        case ExperimentKind::Uniqueness:
            c.model = holder_model;
            c.drift = holder_drift;
            n.replicas = 1000;
            n.x = {0.3};
            break;
        case ExperimentKind::Decay:
            c.model = holder_model;
            c.drift = holder_drift;
            n.replicas = 8000;
            n.x = {0.3};
            n.test_function = TestFunction(IndicatorSmoothed{0.3, 0.01});
            break;
    }
    c.drift.dim = c.model.dim();
    return c;
}

ResultRecord run_uniqueness_suite(const ExperimentConfig& c) {
    require_admissible_drift(c.model, c.drift);
    auto levels = c.numerics.levels;
    if (levels.empty()) throw ConfigError("uniqueness suite needs at least one level");
    for (int n : levels)
        if (n < 1) throw ConfigError("mollification levels must be positive");
    std::set<int> all(levels.begin(), levels.end());
    for (int n : levels) all.insert(2 * n);

    auto opts = transform_options(c);
    if (opts.lambda <= 0.0 || opts.r0 <= 0.0) {
        const auto base = build_transform(c.model, c.drift, c.numerics.gamma, opts);
        if (opts.lambda <= 0.0) opts.lambda = base.lambda;
        if (opts.r0 <= 0.0) opts.r0 = base.r0;
    }
    std::vector<int> ladder(all.begin(), all.end());
    std::vector<ZvonkinTransform> transforms;
    for (int n : ladder)
        transforms.push_back(build_transform(c.model, mollify_drift(c.drift, n), c.numerics.gamma, opts));
    const auto x = starting_points(c, 0.3).front();
    const int d = c.model.dim();

    // Per replica and ladder level: X and ∇X on the grid, or empty after an escape.
    struct Replica {
        bool ok = false;
        std::vector<std::vector<double>> x, grad;
    };
    const auto reps = parallel_map(c.numerics.replicas, [&](std::size_t rep) {
        Replica out;
        RngStream rng(c.master_seed, stream_id(StreamTag::Uniqueness, rep));
        const auto path = sample_path(c.model, TimeGrid{c.numerics.steps, 1.0}, opts.r0, rng);
        try {
            for (const auto& tr : transforms) {
                auto fs = solve_flow(tr, x, path);
                out.x.push_back(std::move(fs.x));
                out.grad.push_back(std::move(fs.grad_x));
            }
            out.ok = true;
        } catch (const StateEscape&) {
            out.x.clear();
            out.grad.clear();
        }
        return out;
    });

    auto index_of = [&](int n) { return static_cast<std::size_t>(std::find(ladder.begin(), ladder.end(), n) - ladder.begin()); };
    ResultRecord r;
    Table tab{"uniqueness", {"n", "D", "D_se", "G", "G_se", "replicas_used"}, {}};
    Series sd{"D", "n", "E sup|X^n - X^2n| ^ 1", {}, {}};
    Series sg{"G", "n", "E sup|grad X^n - grad X^2n|^2", {}, {}};
    std::vector<Estimate> dv, gv;
    for (int n : levels) {
        const std::size_t a = index_of(n), b = index_of(2 * n);
        std::vector<double> ds, gs;
        for (const auto& rep : reps) {
            if (!rep.ok) continue;
            double dmax = 0.0, gmax = 0.0;
            for (std::size_t i = 0; i < rep.x[a].size(); i += d) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) s += std::pow(rep.x[a][i + k] - rep.x[b][i + k], 2);
                dmax = std::max(dmax, std::sqrt(s));
            }
            for (std::size_t i = 0; i < rep.grad[a].size(); i += static_cast<std::size_t>(d * d)) {
                double s = 0.0;
                for (int k = 0; k < d * d; ++k) s += std::pow(rep.grad[a][i + k] - rep.grad[b][i + k], 2);
                gmax = std::max(gmax, s);
            }
            ds.push_back(std::min(dmax, 1.0));
            gs.push_back(gmax);
        }
        if (ds.size() < 2) throw StateEscape("fewer than two uniqueness replicas stayed in the resolved region");
        dv.push_back(mean_se(ds));
        gv.push_back(mean_se(gs));
        tab.rows.push_back({double(n), dv.back().value, dv.back().se, gv.back().value, gv.back().se, double(ds.size())});
        sd.x.push_back(n);
        sd.y.push_back(dv.back().value);
        sg.x.push_back(n);
        sg.y.push_back(gv.back().value);
    }

    if (c.drift.is_zero()) {
        for (std::size_t k = 0; k < levels.size(); ++k) {
            r.rows.push_back(MetricRow::within(label("D_n", levels[k]), dv[k].value, dv[k].se, 0.0, 0.0));
            r.rows.push_back(MetricRow::within(label("G_n", levels[k]), gv[k].value, gv[k].se, 0.0, 0.0));
        }
    } else {
        const double below_one = std::nextafter(1.0, 0.0);
        for (std::size_t k = 1; k < levels.size(); ++k) {
            r.rows.push_back(MetricRow::at_most(label("D_ratio_n", levels[k]), dv[k].value / dv[k - 1].value, below_one));
            r.rows.push_back(MetricRow::at_most(label("G_ratio_n", levels[k]), gv[k].value / gv[k - 1].value, below_one));
        }
        if (levels.size() >= 2)
            r.rows.push_back(MetricRow::at_most("D_last_over_first", dv.back().value / dv.front().value,
                                                std::nextafter(0.5, 0.0)));
        if (levels.size() >= 2) {
            std::vector<double> ln, ld;
            for (std::size_t k = 0; k < levels.size(); ++k) {
                ln.push_back(std::log(levels[k]));
                ld.push_back(std::log(dv[k].value));
            }
            r.rows.push_back(MetricRow::diagnostic("D_slope", least_squares(ln, ld).slope));
        }
        for (std::size_t k = 0; k < levels.size(); ++k)
            r.rows.push_back(MetricRow::diagnostic(label("D_n", levels[k]), dv[k].value, dv[k].se));
    }
    r.rows.push_back(MetricRow::diagnostic("lambda", opts.lambda));
    r.rows.push_back(MetricRow::diagnostic("r0", opts.r0));
    r.tables.push_back(tab);
    r.series.push_back(sd);
    r.series.push_back(sg);
    return r;
}

ResultRecord execute_experiment(const ExperimentConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    ResultRecord r;
    switch (c.kind) {
        case ExperimentKind::Sample: r = sample_experiment(c); break;
        case ExperimentKind::SemigroupScaling: r = scaling_experiment(c); break;
        case ExperimentKind::NegMoment: r = negmoment_experiment(c); break;
        case ExperimentKind::Holder: r = holder_experiment(c); break;
        case ExperimentKind::Pde: r = pde_experiment(c); break;
        case ExperimentKind::ZvonkinFlow: r = zvonkin_experiment(c); break;
        case ExperimentKind::Bismut: r = bismut_experiment(c); break;
        case ExperimentKind::Uniqueness: r = run_uniqueness_suite(c); break;
        case ExperimentKind::Decay: r = decay_experiment(c); break;
    }
    r.id = c.record_id();
    r.kind = c.kind;
    r.config_hash = config_hash(c);
    r.replicas = c.numerics.replicas;
    r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string render_csv(const Table& table, const std::string& id, const std::string& hash) {
    std::ostringstream os;
    os << "# id=" << id << " table=" << table.name << " config_hash=" << hash << " generated=" << timestamp() << "\n";
    for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
        os << "\n";
    }
    return os.str();
}

std::string csv_body(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    for (std::string line; std::getline(in, line);)
        if (line.empty() || line[0] != '#') out << line << "\n";
    return out.str();
}

std::vector<std::filesystem::path> write_outputs(const ResultRecord& record, const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir = config.output.directory;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<fs::path> written;
    auto write = [&](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw IoError("cannot write " + p.string());
        written.push_back(p);
    };
    if (config.output.wants("csv"))
        for (const auto& t : record.tables)
            write(dir / (record.id + "_" + t.name + ".csv"), render_csv(t, record.id, record.config_hash));
    if (config.output.wants("json")) {
        json j = record_to_json(record);
        j["config"] = config_to_json(config);
        write(dir / (record.id + ".json"), j.dump(2) + "\n");
    }
    return written;
}

ResultRecord run_experiment(const ExperimentConfig& config) {
    auto record = execute_experiment(config);
    write_outputs(record, config);
    return record;
}

} // namespace levyflow
