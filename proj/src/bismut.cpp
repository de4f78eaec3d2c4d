#include "levyflow/bismut.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/samplers.hpp"

namespace levyflow {

namespace {

PathGrid replica_path(const LevyModel& model, double t, double r0, const GradientOptions& options,
                      std::size_t replica) {
    RngStream rng(options.seed, stream_id(options.tag, options.stream_offset + replica));
    return sample_path(model, TimeGrid{flow_steps(t, options.steps_per_unit), t}, r0, rng);
}

void check_request(const LevyModel& model, double t, std::span<const double> x, const GradientOptions& options) {
    require(t > 0.0 && t <= 1.0, "gradient time must lie in (0, 1]");
    require(static_cast<int>(x.size()) == model.dim(), "point dimension does not match the model");
    require(options.replicas >= 2, "need at least two replicas");
}

/// Σ_j (1/S^j_t) Σ_i ∇X^T ΔW^j, one entry per coordinate.
std::vector<double> bismut_weight(const FlowSample& fs) {
    std::vector<double> w(fs.dim, 0.0);
    for (std::size_t j = 0; j < fs.clock.size(); ++j)
        for (int c = 0; c < fs.dim; ++c) w[c] += fs.bismut[j * fs.dim + c] / fs.clock[j];
    return w;
}

std::optional<FlowSample> try_flow(const ZvonkinTransform& tr, std::span<const double> x, const PathGrid& path) {
    try {
        return solve_flow(tr, x, path);
    } catch (const StateEscape&) {
        return std::nullopt;
    }
}

} // namespace

int flow_steps(double t, int steps_per_unit) {
    require(steps_per_unit > 0, "steps per unit time must be positive");
    return std::max(16, static_cast<int>(std::lround(t * steps_per_unit)));
}

BismutEstimate bismut_gradient(const ZvonkinTransform& tr, const LevyModel& model, const TestFunction& f,
                               double t, std::span<const double> x, const GradientOptions& options) {
    check_request(model, t, x, options);
    subordinated_blocks(model);
    const int d = model.dim();
    const double fx = f(x);

    struct Sample {
        bool used = false;
        std::vector<double> term;
        double weight_sq = 0.0;
    };
    const auto samples = parallel_map(options.replicas, [&](std::size_t r) {
        Sample s;
        const auto path = replica_path(model, t, tr.r0, options, r);
        const auto fs = try_flow(tr, x, path);
        if (!fs) return s;
        const auto w = bismut_weight(*fs);
        const double diff = f(fs->x_at(fs->grid.steps)) - fx;
        s.used = true;
        s.term.resize(d);
        for (int c = 0; c < d; ++c) {
            s.term[c] = diff * w[c];
            s.weight_sq += w[c] * w[c];
        }
        return s;
    });

    BismutEstimate out;
    std::vector<std::vector<double>> comp(d);
    std::vector<double> weight_sq;
    for (const auto& s : samples) {
        if (!s.used) {
            ++out.escaped;
            continue;
        }
        ++out.used;
        for (int c = 0; c < d; ++c) comp[c].push_back(s.term[c]);
        weight_sq.push_back(s.weight_sq);
    }
    if (out.used < 2) throw StateEscape("fewer than two replicas stayed in the resolved region");
    for (const auto& c : comp) out.gradient.push_back(mean_se(c));
    out.weight_second_moment = mean_se(weight_sq).value;
    return out;
}

FdEstimate fd_gradient(const LevyModel& model, const DriftSpec& b, const TestFunction& f, double t,
                       std::span<const double> x, double step, const GradientOptions& options) {
    check_request(model, t, x, options);
    require(step >= 1e-4 && step <= 1e-2, "finite-difference step must lie in [1e-4, 1e-2]");
    const int d = model.dim();
    require(b.dim == d, "drift dimension does not match the model");

    // Per replica and coordinate: the ε and 2ε central differences.
    const auto samples = parallel_map(options.replicas, [&](std::size_t r) {
        const auto path = replica_path(model, t, 0.5, options, r);
        const int n = path.grid.steps;
        std::vector<double> diffs(2 * d);
        std::vector<double> xs(x.begin(), x.end());
        auto end_value = [&](int c, double shift) {
            xs[c] = x[c] + shift;
            const auto traj = solve_direct(b, xs, path);
            xs[c] = x[c];
            return f(std::span<const double>(traj.data() + n * d, d));
        };
        for (int c = 0; c < d; ++c) {
            diffs[2 * c] = (end_value(c, step) - end_value(c, -step)) / (2.0 * step);
            diffs[2 * c + 1] = (end_value(c, 2.0 * step) - end_value(c, -2.0 * step)) / (4.0 * step);
        }
        return diffs;
    });

    FdEstimate out;
    std::vector<double> fine(samples.size()), gap(samples.size());
    for (int c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < samples.size(); ++r) {
            fine[r] = samples[r][2 * c];
            gap[r] = samples[r][2 * c + 1] - samples[r][2 * c];
        }
        out.gradient.push_back(mean_se(fine));
        out.bias.push_back(mean_se(gap).value / 3.0);
    }
    return out;
}

DecayResult decay_check(const ZvonkinTransform& tr, const LevyModel& model, const TestFunction& f,
                        std::span<const double> t_grid, std::span<const double> x,
                        const GradientOptions& options) {
    require_decades(t_grid, 1.5);
    DecayResult out;
    out.bound = -1.0 / hypothesis_params(model).alpha - 0.15;
    std::vector<double> lt, lg;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        GradientOptions o = options;
        o.stream_offset = options.stream_offset + (static_cast<std::uint64_t>(k) << 32);
        const auto est = bismut_gradient(tr, model, f, t_grid[k], x, o);
        double norm_sq = 0.0, var = 0.0;
        for (const auto& g : est.gradient) {
            norm_sq += g.value * g.value;
            var += g.se * g.se;
        }
        const double norm = std::sqrt(norm_sq);
        out.points.push_back({t_grid[k], norm, std::sqrt(var)});
        require(norm > 0.0, "gradient estimate vanished; the decay fit needs a t-sensitive test function");
        lt.push_back(std::log(t_grid[k]));
        lg.push_back(std::log(norm));
    }
    const auto fit = least_squares(lt, lg);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.residual = fit.residual;
    return out;
}

Estimate bismut_weight_moment(const ZvonkinTransform& tr, const LevyModel& model, double t,
                              std::span<const double> x, double p, const GradientOptions& options) {
    check_request(model, t, x, options);
    require(p > 0.0, "moment order must be positive");
    subordinated_blocks(model);
    const auto values = parallel_map(options.replicas, [&](std::size_t r) -> std::optional<double> {
        const auto path = replica_path(model, t, tr.r0, options, r);
        const auto fs = try_flow(tr, x, path);
        if (!fs) return std::nullopt;
        double sq = 0.0;
        for (double w : bismut_weight(*fs)) sq += w * w;
        return std::pow(sq, p / 2.0);
    });
    std::vector<double> kept;
    for (const auto& v : values)
        if (v) kept.push_back(*v);
    if (kept.size() < 2) throw StateEscape("fewer than two replicas stayed in the resolved region");
    return mean_se(kept);
}

double zero_drift_weight_moment(const SubordinatorSpec& sub, double t, double p) {
    const double normal_abs = std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
    return negative_moment_oracle(sub, p / 2.0, t) * normal_abs;
}

} // namespace levyflow
