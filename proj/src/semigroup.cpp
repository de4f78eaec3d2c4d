#include "levyflow/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/quadrature.hpp"
#include "levyflow/samplers.hpp"
#include "levyflow/spectral.hpp"

namespace levyflow {

namespace {

double coord(std::span<const double> v, std::size_t i) { return i < v.size() ? v[i] : 0.0; }

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

struct CappedGeometry {
    std::size_t begin;
    std::size_t end;
};

CappedGeometry capped_axes(const CappedPower& f, std::size_t dim) {
    if (f.axis_dim <= 0) return {0, dim};
    return {static_cast<std::size_t>(f.axis_offset),
            std::min(dim, static_cast<std::size_t>(f.axis_offset + f.axis_dim))};
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

double TestFunction::operator()(std::span<const double> x) const {
    const double v = std::visit(
        Overloaded{
            [&](const Sinusoid& f) {
                double phase = f.phase;
                for (std::size_t i = 0; i < x.size(); ++i) phase += coord(f.frequency, i) * x[i];
                return std::sin(phase);
            },
            [&](const CappedPower& f) {
                const auto [b, e] = capped_axes(f, x.size());
                double r2 = 0.0;
                for (std::size_t i = b; i < e; ++i) {
                    const double u = x[i] - coord(f.center, i);
                    r2 += u * u;
                }
                return r2 >= 1.0 ? 1.0 : std::pow(r2, 0.5 * f.beta);
            },
            [&](const IndicatorSmoothed& f) { return 0.5 * (1.0 + std::tanh((x[0] - f.edge) / f.width)); },
            [&](const Constant& f) { return f.value; },
            [&](const GaussianBump& f) {
                double r2 = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double u = x[i] - coord(f.center, i);
                    r2 += u * u;
                }
                return std::exp(-0.5 * r2 / (f.width * f.width));
            },
            [&](const Linear& f) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) s += coord(f.coef, i) * x[i];
                return s;
            },
        },
        kind_);
    return scale_ * v;
}

std::vector<double> TestFunction::gradient(std::span<const double> x) const {
    std::vector<double> g(x.size(), 0.0);
    std::visit(Overloaded{
                   [&](const Sinusoid& f) {
                       double phase = f.phase;
                       for (std::size_t i = 0; i < x.size(); ++i) phase += coord(f.frequency, i) * x[i];
                       const double c = std::cos(phase);
                       for (std::size_t i = 0; i < x.size(); ++i) g[i] = coord(f.frequency, i) * c;
                   },
                   [&](const CappedPower& f) {
                       const auto [b, e] = capped_axes(f, x.size());
                       double r2 = 0.0;
                       for (std::size_t i = b; i < e; ++i) {
                           const double u = x[i] - coord(f.center, i);
                           r2 += u * u;
                       }
                       if (r2 >= 1.0 || r2 == 0.0) return;
                       const double factor = f.beta * std::pow(r2, 0.5 * f.beta - 1.0);
                       for (std::size_t i = b; i < e; ++i) g[i] = factor * (x[i] - coord(f.center, i));
                   },
                   [&](const IndicatorSmoothed& f) {
                       const double th = std::tanh((x[0] - f.edge) / f.width);
                       g[0] = 0.5 * (1.0 - th * th) / f.width;
                   },
                   [&](const Constant&) {},
                   [&](const GaussianBump& f) {
                       double r2 = 0.0;
                       for (std::size_t i = 0; i < x.size(); ++i) {
                           const double u = x[i] - coord(f.center, i);
                           r2 += u * u;
                       }
                       const double w2 = f.width * f.width;
                       const double e = std::exp(-0.5 * r2 / w2);
                       for (std::size_t i = 0; i < x.size(); ++i) g[i] = -e * (x[i] - coord(f.center, i)) / w2;
                   },
                   [&](const Linear& f) {
                       for (std::size_t i = 0; i < x.size(); ++i) g[i] = coord(f.coef, i);
                   },
               },
               kind_);
    for (double& v : g) v *= scale_;
    return g;
}

double TestFunction::holder_exponent() const {
    if (const auto* f = std::get_if<CappedPower>(&kind_)) return f->beta;
    return 1.0;
}

double TestFunction::holder_constant() const {
    const double c = std::visit(Overloaded{
                                    [](const Sinusoid& f) { return norm(f.frequency); },
                                    [](const CappedPower&) { return 1.0; },
                                    [](const IndicatorSmoothed& f) { return 0.5 / f.width; },
                                    [](const Constant&) { return 0.0; },
                                    [](const GaussianBump& f) { return std::exp(-0.5) / f.width; },
                                    [](const Linear& f) { return norm(f.coef); },
                                },
                                kind_);
    return std::abs(scale_) * c;
}

double TestFunction::sup_norm() const {
    const double s = std::visit(Overloaded{
                                    [](const Constant& f) { return std::abs(f.value); },
                                    [](const Linear& f) {
                                        return norm(f.coef) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
                                    },
                                    [](const auto&) { return 1.0; },
                                },
                                kind_);
    return std::abs(scale_) * s;
}

std::vector<double> TestFunction::breakpoints() const {
    if (const auto* f = std::get_if<CappedPower>(&kind_)) {
        if (f->axis_dim > 0 && f->axis_offset > 0) return {};
        const double c = coord(f->center, 0);
        return {c - 1.0, c, c + 1.0};
    }
    return {};
}

TestFunction TestFunction::scaled(double c) const {
    TestFunction out = *this;
    out.scale_ *= c;
    return out;
}

Estimate apply_semigroup(const LevyModel& model, const TestFunction& f, double t, std::span<const double> x,
                         std::size_t n_samples, RngStream& rng) {
    require(t > 0.0 && t <= 1.0, "semigroup time must lie in (0, 1]");
    require(static_cast<int>(x.size()) == model.dim(), "point dimension does not match the model");
    if (std::holds_alternative<Constant>(f.kind())) return {f(x), 0.0};
    require(n_samples >= 2, "need at least two samples");
    std::vector<double> values(n_samples);
    std::vector<double> y(x.size());
    for (auto& v : values) {
        const auto z = sample_marginal(model, t, rng);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + z[i];
        v = f(y);
    }
    return mean_se(values);
}

namespace {

double spectral_value(const IsotropicStable& model, const TestFunction& f, double t, std::span<const double> x,
                      int points, double half_width) {
    SpectralGrid grid(model.dim, points, half_width);
    std::vector<double> field(grid.size());
    for (std::size_t n = 0; n < field.size(); ++n) field[n] = f(grid.node(n));
    std::vector<Complex> spec(grid.spectral_size());
    grid.forward(field, spec);
    const auto& k2 = grid.wavenumber_sq();
    for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= std::exp(-t * std::pow(k2[s], 0.5 * model.alpha));
    return grid.fourier_eval(spec, x);
}

} // namespace

SpectralValue spectral_semigroup(const IsotropicStable& model, const TestFunction& f, double t,
                                 std::span<const double> x, const SpectralOptions& opts) {
    require(t > 0.0 && t <= 1.0, "semigroup time must lie in (0, 1]");
    require(static_cast<int>(x.size()) == model.dim, "point dimension does not match the model");
    require(std::isfinite(f.sup_norm()), "spectral semigroup needs a bounded test function");
    double reach = 0.0;
    for (double v : x) reach = std::max(reach, std::abs(v));
    const double margin = opts.half_width - reach;
    require(margin > 0.0, "evaluation point lies outside the periodic box");

    SpectralValue out;
    out.value = spectral_value(model, f, t, x, opts.points, opts.half_width);
    // The periodic extension differs from f only beyond distance `margin`;
    // P(|Z_t| > R) is bounded by the big-jump mass plus a Chebyshev bound on
    // the small jumps.
    const double a = model.alpha;
    const double mass = stable_density_constant(model.dim, a) * sphere_area(model.dim);
    const double tail = t * mass * std::pow(margin, -a) * (1.0 / a + 1.0 / (2.0 - a));
    // Grid halving measures the sampling error of a non-smooth f.
    const double coarse = spectral_value(model, f, t, x, opts.points / 2, opts.half_width);
    out.aliasing_bound = 2.0 * f.sup_norm() * std::min(1.0, tail) + std::abs(out.value - coarse);
    return out;
}

std::vector<Estimate> gradient_semigroup(const LevyModel& model, const TestFunction& f, double t,
                                         std::span<const double> x, std::size_t n_samples, RngStream& rng) {
    require(t > 0.0, "gradient time must be positive");
    require(n_samples >= 2, "need at least two samples");
    const int d = model.dim();
    require(static_cast<int>(x.size()) == d, "point dimension does not match the model");
    const auto blocks = subordinated_blocks(model);
    const double fx = f(x);

    std::vector<std::vector<double>> comp(d, std::vector<double>(n_samples));
    std::vector<double> y(d);
    for (std::size_t n = 0; n < n_samples; ++n) {
        const auto draw = sample_subordinated(model, t, rng);
        for (int i = 0; i < d; ++i) y[i] = x[i] + draw.z[i];
        const double diff = f(y) - fx;
        int offset = 0;
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            const double inv_clock = 1.0 / draw.clock[j];
            for (int k = offset; k < offset + blocks[j].dim; ++k) {
                const double w = draw.z[k] - model.eta_component(k) * t;
                comp[k][n] = diff * w * inv_clock;
            }
            offset += blocks[j].dim;
        }
    }
    std::vector<Estimate> out;
    out.reserve(d);
    for (const auto& c : comp) out.push_back(mean_se(c));
    return out;
}

void require_decades(std::span<const double> grid, double decades) {
    require(!grid.empty(), "empty grid");
    const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
    require(*lo > 0.0, "grid values must be positive");
    if (std::log10(*hi / *lo) < decades - 1e-12)
        throw InsufficientDecades("grid spans " + std::to_string(std::log10(*hi / *lo)) + " decades, need " +
                                  std::to_string(decades));
}

namespace {

// Unit-time draws for every block, rescaled to time t on demand.
struct UnitDraws {
    std::vector<double> clock; ///< n × blocks
    std::vector<double> w;     ///< n × dim
};

UnitDraws draw_unit(const LevyModel& model, const std::vector<BlockSpec>& blocks, double t, std::size_t n,
                    RngStream& rng) {
    UnitDraws u;
    u.clock.resize(n * blocks.size());
    u.w.resize(n * model.dim());
    const int d = model.dim();
    for (std::size_t s = 0; s < n; ++s) {
        int offset = 0;
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            const double c = sample_subordinator(blocks[j].sub, t, rng);
            u.clock[s * blocks.size() + j] = c;
            const double sd = std::sqrt(c);
            for (int k = 0; k < blocks[j].dim; ++k) u.w[s * d + offset + k] = sd * rng.normal();
            offset += blocks[j].dim;
        }
    }
    return u;
}

} // namespace

ScalingFit fit_gradient_scaling(const LevyModel& model, const TestFunction& f, std::span<const double> t_grid,
                                std::span<const double> x0, std::size_t n_samples, std::uint64_t seed) {
    require_decades(t_grid, 3.0);
    require(n_samples >= 2, "need at least two samples");
    for (double t : t_grid) require(t > 0.0 && t < 1.0, "scaling times must lie in (0, 1)");
    const int d = model.dim();
    require(static_cast<int>(x0.size()) == d, "point dimension does not match the model");
    const auto blocks = subordinated_blocks(model);

    std::vector<double> block_alpha(d);
    std::vector<int> block_of(d);
    bool self_similar = true;
    {
        int offset = 0;
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            const double a = subordinator_alpha(blocks[j].sub);
            if (!std::holds_alternative<StableSub>(blocks[j].sub)) self_similar = false;
            for (int k = 0; k < blocks[j].dim; ++k) {
                block_alpha[offset + k] = a;
                block_of[offset + k] = static_cast<int>(j);
            }
            offset += blocks[j].dim;
        }
    }

    UnitDraws unit;
    if (self_similar) {
        RngStream rng(seed, stream_id(StreamTag::GradientScaling, 0));
        unit = draw_unit(model, blocks, 1.0, n_samples, rng);
    }

    constexpr int kAxisPoints = 33;
    const auto points = parallel_map(t_grid.size(), [&](std::size_t ti) {
        const double t = t_grid[ti];
        UnitDraws local;
        if (!self_similar) {
            RngStream rng(seed, stream_id(StreamTag::GradientScaling, ti + 1));
            local = draw_unit(model, blocks, t, n_samples, rng);
        }
        const UnitDraws& draws = self_similar ? unit : local;
        const std::size_t nb = blocks.size();

        // Per-coordinate factors turning unit draws into time-t draws.
        std::vector<double> z_scale(d, 1.0), w_scale(d, 1.0);
        if (self_similar)
            for (int k = 0; k < d; ++k) {
                z_scale[k] = std::pow(t, 1.0 / block_alpha[k]);
                w_scale[k] = 1.0 / z_scale[k];
            }

        std::vector<std::vector<double>> xs;
        for (int axis = 0; axis < d; ++axis)
            for (double stretch : {1.0, std::pow(t, 1.0 / block_alpha[axis])})
                for (int i = 0; i < kAxisPoints; ++i) {
                    std::vector<double> x(x0.begin(), x0.end());
                    x[axis] += stretch * (-4.0 + 8.0 * i / (kAxisPoints - 1));
                    xs.push_back(std::move(x));
                }

        ScalingPoint best{t, 0.0, 0.0, 0.0};
        std::vector<std::vector<double>> comp(d, std::vector<double>(n_samples));
        std::vector<double> y(d);
        for (const auto& x : xs) {
            const double fx = f(x);
            for (std::size_t s = 0; s < n_samples; ++s) {
                for (int k = 0; k < d; ++k)
                    y[k] = x[k] + z_scale[k] * draws.w[s * d + k] + model.eta_component(k) * t;
                const double diff = f(y) - fx;
                for (int k = 0; k < d; ++k)
                    comp[k][s] = diff * w_scale[k] * draws.w[s * d + k] / draws.clock[s * nb + block_of[k]];
            }
            double g2 = 0.0, se2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const Estimate e = mean_se(comp[k]);
                g2 += e.value * e.value;
                se2 += e.se * e.se;
            }
            const double g = std::sqrt(g2);
            if (g > best.sup_gradient) {
                best.sup_gradient = g;
                best.se = std::sqrt(se2);
                double offset2 = 0.0;
                for (int k = 0; k < d; ++k) offset2 += (x[k] - x0[k]) * (x[k] - x0[k]);
                best.argmax = std::sqrt(offset2);
            }
        }
        return best;
    });

    std::vector<double> lt, lg;
    for (const auto& p : points) {
        if (!(p.sup_gradient > 0.0)) throw NoConvergence("gradient estimate vanished at t = " + std::to_string(p.t));
        lt.push_back(std::log(p.t));
        lg.push_back(std::log(p.sup_gradient));
    }
    const LinearFit fit = least_squares(lt, lg);
    return {fit.slope, fit.intercept, fit.residual, points};
}

double negative_moment_oracle(const SubordinatorSpec& sub, double p, double t) {
    require(p > 0.0, "negative moment order must be positive");
    require(t > 0.0, "time must be positive");
    // Substituting λ = u^{1/p} removes the λ^{p−1} singularity.
    const auto integrand = [&](double u) { return std::exp(-t * laplace_exponent(sub, std::pow(u, 1.0 / p))); };
    const double integral = integrate_to_infinity(integrand, 0.0, 1e-13);
    return integral / (p * std::tgamma(p));
}

NegativeMomentResult negative_moment(const SubordinatorSpec& sub, double p, std::span<const double> t_grid,
                                     std::size_t n_samples, std::uint64_t seed) {
    require(p > 0.0 && p < 1.0, "negative moment order must lie in (0, 1)");
    require(n_samples >= 2, "need at least two samples");
    NegativeMomentResult out;
    out.points = parallel_map(t_grid.size(), [&](std::size_t ti) {
        const double t = t_grid[ti];
        RngStream rng(seed, stream_id(StreamTag::NegativeMoment, ti));
        std::vector<double> v(n_samples);
        for (auto& x : v) x = std::pow(sample_subordinator(sub, t, rng), -p);
        return NegativeMomentPoint{t, mean_se(v), negative_moment_oracle(sub, p, t)};
    });
    if (t_grid.size() >= 2) {
        std::vector<double> lt, lm;
        for (const auto& pt : out.points) {
            lt.push_back(std::log(pt.t));
            lm.push_back(std::log(pt.mc.value));
        }
        const LinearFit fit = least_squares(lt, lm);
        out.slope = fit.slope;
        out.intercept = fit.intercept;
    }
    return out;
}

} // namespace levyflow
