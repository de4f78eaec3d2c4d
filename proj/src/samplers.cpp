#include "levyflow/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "levyflow/errors.hpp"

namespace levyflow {

std::vector<BlockSpec> subordinated_blocks(const LevyModel& model) {
    if (const auto* m = std::get_if<IsotropicStable>(&model.family))
        return {{StableSub{0.5 * m->alpha, 2.0}, m->dim}};
    if (const auto* m = std::get_if<SubordinateBM>(&model.family)) return {{m->subordinator, m->dim}};
    if (const auto* m = std::get_if<RelativisticStable>(&model.family))
        return {{RelativisticSub{m->alpha, m->mass}, m->dim}};
    if (const auto* m = std::get_if<CylindricalStable>(&model.family)) {
        std::vector<BlockSpec> out;
        for (const auto& b : m->blocks) out.push_back({StableSub{0.5 * b.alpha, 2.0}, b.dim});
        return out;
    }
    throw UnsupportedModel("model " + model.family_name() + " is not subordinated");
}

namespace {

// Powers ∫_a^b r^{k−1−α} dr for a power piece clipped to [a, b].
double clipped_power_integral(double a, double b, double exponent) {
    if (b <= a) return 0.0;
    if (exponent == 0.0) return std::log(b / a);
    const double hi = std::isinf(b) ? 0.0 : std::pow(b, exponent);
    const double lo = a == 0.0 ? 0.0 : std::pow(a, exponent);
    return (hi - lo) / exponent;
}

void uniform_direction(int dim, RngStream& rng, std::vector<double>& out) {
    out.assign(dim, 0.0);
    if (dim == 1) {
        out[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
        return;
    }
    double n2 = 0.0;
    for (auto& v : out) {
        v = rng.normal();
        n2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& v : out) v *= inv;
}

PathGrid subordinated_path(const LevyModel& model, const TimeGrid& grid, double r0, RngStream& rng) {
    require(grid.steps >= 1, "time grid needs at least one step");
    require(r0 > 0.0, "jump threshold r0 must be positive");
    const auto specs = subordinated_blocks(model);
    const int n = grid.steps;
    const double h = grid.h();

    PathGrid path;
    path.grid = grid;
    path.dim = model.dim();
    path.r0 = r0;
    path.master_seed = rng.master_seed();
    path.stream_id = rng.stream_id();
    path.eta_r0.assign(path.dim, 0.0);
    for (int i = 0; i < path.dim; ++i) path.eta_r0[i] = model.eta_component(i);

    int offset = 0;
    for (const auto& s : specs) {
        SubordinatedBlock b;
        b.offset = offset;
        b.dim = s.dim;
        b.clock.assign(n + 1, 0.0);
        b.bm.assign(static_cast<std::size_t>(n + 1) * s.dim, 0.0);
        path.blocks.push_back(std::move(b));
        offset += s.dim;
    }

    const int d = path.dim;
    std::vector<double> w(d);
    path.z_incr.assign(static_cast<std::size_t>(n) * d, 0.0);
    path.small.assign(static_cast<std::size_t>(n) * d, 0.0);
    for (int i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < specs.size(); ++j) {
            auto& b = path.blocks[j];
            const double ds = sample_subordinator(specs[j].sub, h, rng);
            b.clock[i + 1] = b.clock[i] + ds;
            const double sd = std::sqrt(ds);
            for (int k = 0; k < b.dim; ++k) {
                w[b.offset + k] = sd * rng.normal();
                b.bm[(i + 1) * b.dim + k] = b.bm[i * b.dim + k] + w[b.offset + k];
            }
        }
        double n2 = 0.0;
        for (double v : w) n2 += v * v;
        const bool big = std::sqrt(n2) > r0;
        if (big) path.big_jumps.push_back({i, grid.t(i + 1), w});
        for (int k = 0; k < d; ++k) {
            const double small = big ? 0.0 : w[k];
            const double bigpart = big ? w[k] : 0.0;
            path.small[i * d + k] = small;
            path.z_incr[i * d + k] = small + bigpart + path.eta_r0[k] * h;
        }
    }
    return path;
}

} // namespace

double sample_stable_subordinator(double rho, double h, RngStream& rng) {
    require(rho > 0.0 && rho < 1.0, "stable subordinator index must lie in (0,1)");
    require(h > 0.0, "time step must be positive");
    const double u = std::numbers::pi * rng.uniform();
    const double e = rng.exponential();
    const double a = std::pow(std::pow(std::sin(rho * u), rho) * std::pow(std::sin((1.0 - rho) * u), 1.0 - rho) /
                                  std::sin(u),
                              1.0 / (1.0 - rho));
    const double s1 = std::pow(a / e, (1.0 - rho) / rho);
    return std::pow(h, 1.0 / rho) * s1;
}

double sample_subordinator(const SubordinatorSpec& sub, double h, RngStream& rng) {
    if (const auto* s = std::get_if<StableSub>(&sub)) return s->scale * sample_stable_subordinator(s->rho, h, rng);
    if (const auto* r = std::get_if<RelativisticSub>(&sub)) {
        const double rho = 0.5 * r->alpha;
        const double tilt = std::pow(r->mass, 1.0 / rho);
        for (;;) {
            const double s = sample_stable_subordinator(rho, h, rng);
            if (rng.uniform() <= std::exp(-tilt * s)) return s;
        }
    }
    return h;
}

std::vector<double> PathGrid::value_at(int i) const {
    std::vector<double> z(dim, 0.0);
    for (int s = 0; s < i; ++s)
        for (int k = 0; k < dim; ++k) z[k] += z_incr[s * dim + k];
    return z;
}

PathGrid sample_subordinate_bm_path(const LevyModel& model, const TimeGrid& grid, double r0,
                                    RngStream& rng) {
    if (std::holds_alternative<CylindricalStable>(model.family) ||
        std::holds_alternative<StableTypeDensity>(model.family) ||
        std::holds_alternative<TruncatedStable>(model.family))
        throw UnsupportedModel("sample_subordinate_bm_path needs a single subordinated block");
    return subordinated_path(model, grid, r0, rng);
}

PathGrid sample_cylindrical_path(const LevyModel& model, const TimeGrid& grid, double r0,
                                 RngStream& rng) {
    if (!std::holds_alternative<CylindricalStable>(model.family))
        throw UnsupportedModel("sample_cylindrical_path needs a cylindrical model");
    return subordinated_path(model, grid, r0, rng);
}

RadialDensity sampling_density(const LevyModel& model) {
    if (const auto* m = std::get_if<StableTypeDensity>(&model.family)) return m->kappa;
    if (const auto* m = std::get_if<TruncatedStable>(&model.family))
        return {{PowerPiece{stable_density_constant(m->dim, m->alpha), m->alpha, 0.0, 1.0}}, m->dim};
    throw UnsupportedModel("model " + model.family_name() + " has no piecewise-power density");
}

double small_jump_variance(const RadialDensity& kappa, double r0) {
    const int d = kappa.dim;
    double v = 0.0;
    for (const auto& p : kappa.pieces)
        v += p.coef * sphere_area(d) * clipped_power_integral(p.r_lo, std::min(p.r_hi, r0), 2.0 - p.alpha);
    return v / d;
}

double tail_mass(const RadialDensity& kappa, double r0) {
    double m = 0.0;
    for (const auto& p : kappa.pieces)
        m += p.coef * sphere_area(kappa.dim) * clipped_power_integral(std::max(p.r_lo, r0), p.r_hi, -p.alpha);
    return m;
}

PathGrid sample_stable_type_path(const LevyModel& model, double r0, const TimeGrid& grid,
                                 RngStream& rng) {
    require(r0 > 0.0 && r0 <= 1.0, "jump threshold r0 must lie in (0,1]");
    require(grid.steps >= 1, "time grid needs at least one step");
    const RadialDensity kappa = sampling_density(model);
    const int d = kappa.dim;
    const int n = grid.steps;
    const double h = grid.h();

    // Envelope: positive pieces restricted to r > r0, each sampled by inverse CDF.
    struct EnvPiece {
        double coef, alpha, a, b, mass;
    };
    std::vector<EnvPiece> env;
    double env_rate = 0.0;
    for (const auto& p : kappa.pieces) {
        const double a = std::max(p.r_lo, r0);
        if (p.coef <= 0.0 || a >= p.r_hi) continue;
        const double mass = p.coef * sphere_area(d) * clipped_power_integral(a, p.r_hi, -p.alpha);
        env.push_back({p.coef, p.alpha, a, p.r_hi, mass});
        env_rate += mass;
    }
    auto envelope = [&](double r) {
        double v = 0.0;
        for (const auto& e : env)
            if (r >= e.a && r < e.b) v += e.coef * std::pow(r, -d - e.alpha);
        return v;
    };

    PathGrid path;
    path.grid = grid;
    path.dim = d;
    path.r0 = r0;
    path.master_seed = rng.master_seed();
    path.stream_id = rng.stream_id();
    path.small_variance = small_jump_variance(kappa, r0);
    for (const auto& p : kappa.pieces)
        path.truncation_bias +=
            p.coef * sphere_area(d) * clipped_power_integral(p.r_lo, std::min(p.r_hi, r0), 3.0 - p.alpha);
    path.eta_r0.assign(d, 0.0);
    for (int i = 0; i < d; ++i) path.eta_r0[i] = model.eta_component(i);

    path.z_incr.assign(static_cast<std::size_t>(n) * d, 0.0);
    path.small.assign(static_cast<std::size_t>(n) * d, 0.0);
    const double small_sd = std::sqrt(path.small_variance * h);
    std::uint64_t proposed = 0, accepted = 0;
    std::vector<double> dir, bigsum(d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) path.small[i * d + k] = small_sd * rng.normal();
        std::fill(bigsum.begin(), bigsum.end(), 0.0);
        const std::uint64_t count = rng.poisson(env_rate * h);
        std::vector<BigJump> step_jumps;
        for (std::uint64_t c = 0; c < count; ++c) {
            double pick = rng.uniform() * env_rate;
            std::size_t e = 0;
            while (e + 1 < env.size() && pick > env[e].mass) pick -= env[e++].mass;
            const auto& ep = env[e];
            const double top = std::pow(ep.a, -ep.alpha);
            const double bottom = std::isinf(ep.b) ? 0.0 : std::pow(ep.b, -ep.alpha);
            const double r = std::pow(top - rng.uniform() * (top - bottom), -1.0 / ep.alpha);
            const double time = grid.t(i) + rng.uniform() * h;
            uniform_direction(d, rng, dir);
            ++proposed;
            if (rng.uniform() * envelope(r) > kappa(r)) continue;
            ++accepted;
            BigJump j{i, time, std::vector<double>(d)};
            for (int k = 0; k < d; ++k) j.z[k] = r * dir[k];
            step_jumps.push_back(std::move(j));
        }
        std::sort(step_jumps.begin(), step_jumps.end(),
                  [](const BigJump& a, const BigJump& b) { return a.time < b.time; });
        for (auto& j : step_jumps) {
            for (int k = 0; k < d; ++k) bigsum[k] += j.z[k];
            path.big_jumps.push_back(std::move(j));
        }
        for (int k = 0; k < d; ++k)
            path.z_incr[i * d + k] = path.small[i * d + k] + bigsum[k] + path.eta_r0[k] * h;
    }
    if (proposed > 0) {
        path.envelope_acceptance = static_cast<double>(accepted) / static_cast<double>(proposed);
        if (proposed >= 100 && path.envelope_acceptance < 1e-3) {
            std::ostringstream msg;
            msg << "thinning acceptance " << path.envelope_acceptance << " below 1e-3";
            throw EnvelopeFailure(msg.str());
        }
    }
    return path;
}

PathGrid sample_path(const LevyModel& model, const TimeGrid& grid, double r0, RngStream& rng) {
    if (std::holds_alternative<StableTypeDensity>(model.family) ||
        std::holds_alternative<TruncatedStable>(model.family))
        return sample_stable_type_path(model, std::min(r0, 1.0), grid, rng);
    return subordinated_path(model, grid, r0, rng);
}

SubordinatedDraw sample_subordinated(const LevyModel& model, double t, RngStream& rng) {
    const auto specs = subordinated_blocks(model);
    SubordinatedDraw out;
    out.z.reserve(model.dim());
    for (const auto& s : specs) {
        const double clock = sample_subordinator(s.sub, t, rng);
        out.clock.push_back(clock);
        const double sd = std::sqrt(clock);
        for (int k = 0; k < s.dim; ++k) out.z.push_back(sd * rng.normal());
    }
    for (int k = 0; k < model.dim(); ++k) out.z[k] += model.eta_component(k) * t;
    return out;
}

std::vector<double> sample_marginal(const LevyModel& model, double t, RngStream& rng, double r0) {
    if (std::holds_alternative<StableTypeDensity>(model.family) ||
        std::holds_alternative<TruncatedStable>(model.family)) {
        const PathGrid p = sample_stable_type_path(model, r0, TimeGrid{1, t}, rng);
        return p.z_incr;
    }
    return sample_subordinated(model, t, rng).z;
}

PathGrid coarsen(const PathGrid& path, int factor) {
    require(factor >= 1 && path.grid.steps % factor == 0, "coarsening factor must divide the step count");
    PathGrid out = path;
    const int n = path.grid.steps / factor;
    const int d = path.dim;
    out.grid.steps = n;
    out.z_incr.assign(static_cast<std::size_t>(n) * d, 0.0);
    out.small.assign(static_cast<std::size_t>(n) * d, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            double sm = 0.0, inc = 0.0;
            for (int j = i * factor; j < (i + 1) * factor; ++j) {
                sm += path.small[j * d + k];
                inc += path.z_incr[j * d + k];
            }
            out.small[i * d + k] = sm;
            out.z_incr[i * d + k] = inc;
        }
    for (auto& jump : out.big_jumps) jump.step /= factor;
    for (auto& b : out.blocks) {
        std::vector<double> clock(n + 1), bm(static_cast<std::size_t>(n + 1) * b.dim);
        for (int i = 0; i <= n; ++i) {
            clock[i] = b.clock[i * factor];
            for (int k = 0; k < b.dim; ++k) bm[i * b.dim + k] = b.bm[i * factor * b.dim + k];
        }
        b.clock = std::move(clock);
        b.bm = std::move(bm);
    }
    return out;
}

void write_path_dump(const PathGrid& path, std::ostream& os) {
    os << "# master_seed=" << path.master_seed << " stream_id=" << path.stream_id << " r0=" << path.r0
       << " dim=" << path.dim << " steps=" << path.grid.steps << "\n";
    os << "t";
    for (int k = 0; k < path.dim; ++k) os << ",Z" << k + 1;
    for (std::size_t j = 0; j < path.blocks.size(); ++j) {
        os << ",S" << j + 1;
        for (int k = 0; k < path.blocks[j].dim; ++k) os << ",W" << j + 1 << "_" << k + 1;
    }
    os << "\n" << std::setprecision(17);
    std::vector<double> z(path.dim, 0.0);
    for (int i = 0; i <= path.grid.steps; ++i) {
        if (i > 0)
            for (int k = 0; k < path.dim; ++k) z[k] += path.z_incr[(i - 1) * path.dim + k];
        os << path.grid.t(i);
        for (double v : z) os << "," << v;
        for (const auto& b : path.blocks) {
            os << "," << b.clock[i];
            for (int k = 0; k < b.dim; ++k) os << "," << b.bm[i * b.dim + k];
        }
        os << "\n";
    }
}

} // namespace levyflow
