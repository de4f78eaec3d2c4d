#include "levyflow/pde_mild.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/spectral.hpp"
#include "levyflow/stats.hpp"

namespace levyflow {

namespace {

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

std::size_t node_count(const SpaceTimeGrid& g) {
    std::size_t n = 1;
    for (int i = 0; i < g.dim; ++i) n *= static_cast<std::size_t>(g.points);
    return n;
}

std::vector<double> node_coords(const SpaceTimeGrid& g, std::size_t flat) {
    std::vector<double> x(g.dim);
    for (int axis = g.dim - 1; axis >= 0; --axis) {
        x[axis] = -g.half_width + g.spacing() * static_cast<double>(flat % g.points);
        flat /= g.points;
    }
    return x;
}

void validate_grid(const SpaceTimeGrid& g) {
    require(g.dim >= 1 && g.dim <= 3, "grid dimension must be 1, 2 or 3");
    require(g.points >= 8 && g.points % 2 == 0, "grid needs an even number of points");
    require(g.steps >= 2, "time grid needs at least two steps");
    require(g.cutoff_width >= 0.0 && g.cutoff_width < g.half_width, "cutoff collar must fit inside the torus");
}

// χ·profile at every node, for a drift-like field (nodes × d).
std::vector<double> torus_profile(const DriftSpec& spec, const SpaceTimeGrid& g) {
    require(spec.dim == g.dim, "field dimension does not match the grid");
    const std::size_t n = node_count(g);
    const int d = g.dim;
    std::vector<double> out(n * d, 0.0);
    if (spec.is_zero()) return out;
    const auto rows = parallel_map(n, [&](std::size_t i) {
        const auto x = node_coords(g, i);
        auto v = spec.profile(x);
        const double chi = torus_cutoff(g, x);
        for (double& c : v) c *= chi;
        return v;
    });
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) out[i * d + k] = rows[i][k];
    return out;
}

// ψ(k) − iη·k for every spectral coefficient, so that T_t acts as e^{−t·rate}.
std::vector<Complex> symbol_rates(const LevyModel& model, const SpectralGrid& sg) {
    std::vector<Complex> rate(sg.spectral_size());
    std::vector<double> k(sg.dim());
    for (std::size_t s = 0; s < rate.size(); ++s) {
        double drift = 0.0;
        for (int a = 0; a < sg.dim(); ++a) {
            k[a] = sg.wavenumber_full(a)[s];
            drift += model.eta_component(a) * sg.wavenumber(a)[s];
        }
        rate[s] = Complex(symbol_re(model, k), -drift);
    }
    return rate;
}

// Weights of ∫_0^h e^{−cr}[g0(1 − r/h) + g1 r/h] dr = w0·g0 + w1·g1.
struct StepWeights {
    Complex decay, w0, w1;
};

StepWeights step_weights(Complex c, double h) {
    const Complex z = c * h;
    StepWeights w;
    w.decay = std::exp(-z);
    Complex q, r;
    if (std::abs(z) < 1e-3) {
        q = h * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
        r = h * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0);
    } else {
        q = (1.0 - w.decay) / c;
        r = (1.0 - w.decay * (1.0 + z)) / (c * z);
    }
    w.w0 = q - r;
    w.w1 = r;
    return w;
}

// Contiguous slice ranges, one per worker, each with its own FFT plans.
template <class Fn>
void for_each_slice(const SpaceTimeGrid& g, int n_slices, Fn&& fn) {
    const int chunks = std::max(1, std::min<int>(n_slices, static_cast<int>(thread_count())));
    parallel_map(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        SpectralGrid sg(g.dim, g.points, g.half_width);
        const int lo = static_cast<int>(c) * n_slices / chunks;
        const int hi = (static_cast<int>(c) + 1) * n_slices / chunks;
        for (int i = lo; i < hi; ++i) fn(sg, i);
        return 0;
    });
}

struct Fields {
    std::vector<double> b, f; ///< nodes × d profiles after cutoff
};

// Source b_t·∇u_t + f_t of component j at one slice.
void source_slice(const Fields& fields, const DriftSpec& b, const DriftSpec& f, const double* grad, double t,
                  std::size_t nodes, int d, int j, std::vector<double>& out) {
    const double bt = b.time_factor(t), ft = f.time_factor(t);
    for (std::size_t n = 0; n < nodes; ++n) {
        double v = ft * fields.f[n * d + j];
        for (int k = 0; k < d; ++k) v += bt * fields.b[n * d + k] * grad[(n * d + j) * d + k];
        out[n] = v;
    }
}

struct NodeWeight {
    std::size_t node;
    double weight;
};

std::vector<NodeWeight> interpolation_weights(const SpaceTimeGrid& g, std::span<const double> x) {
    const double dx = g.spacing();
    int base[3];
    double frac[3];
    for (int a = 0; a < g.dim; ++a) {
        double u = (x[a] + g.half_width) / dx;
        u -= std::floor(u / g.points) * g.points;
        const double fl = std::floor(u);
        base[a] = static_cast<int>(fl) % g.points;
        frac[a] = u - fl;
    }
    std::vector<NodeWeight> out;
    for (int corner = 0; corner < (1 << g.dim); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < g.dim; ++a) {
            const int bit = (corner >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            flat = flat * g.points + static_cast<std::size_t>((base[a] + bit) % g.points);
        }
        if (w != 0.0) out.push_back({flat, w});
    }
    return out;
}

double simpson(const std::vector<double>& v, int i0, int i1, double h) {
    if (i1 <= i0) return 0.0;
    const int n = i1 - i0;
    const int even_end = (n % 2 == 0) ? i1 : i1 - 1;
    double s = 0.0;
    for (int i = i0; i + 2 <= even_end; i += 2) s += h / 3.0 * (v[i] + 4.0 * v[i + 1] + v[i + 2]);
    if (even_end != i1) s += 0.5 * h * (v[i1 - 1] + v[i1]);
    return s;
}

} // namespace

double torus_cutoff(const SpaceTimeGrid& grid, std::span<const double> x) {
    if (grid.cutoff_width == 0.0) return 1.0;
    double chi = 1.0;
    for (double v : x) chi *= smooth_step((grid.half_width - std::abs(v)) / grid.cutoff_width);
    return chi;
}

std::size_t MildSolution::nodes() const { return node_count(grid); }

double MildSolution::u_at(int step, std::size_t node, int comp) const {
    return u[(static_cast<std::size_t>(step) * nodes() + node) * grid.dim + comp];
}

std::vector<double> MildSolution::value(double t, std::span<const double> x) const {
    const int d = grid.dim;
    const double s = std::clamp(t, 0.0, 1.0) * grid.steps;
    const int i0 = std::min(static_cast<int>(std::floor(s)), grid.steps - 1);
    const double a = s - i0;
    const auto ws = interpolation_weights(grid, x);
    const std::size_t n = nodes();
    std::vector<double> out(d, 0.0);
    for (const auto& w : ws)
        for (int j = 0; j < d; ++j) {
            const double lo = u[(static_cast<std::size_t>(i0) * n + w.node) * d + j];
            const double hi = u[(static_cast<std::size_t>(i0 + 1) * n + w.node) * d + j];
            out[j] += w.weight * ((1.0 - a) * lo + a * hi);
        }
    return out;
}

std::vector<double> MildSolution::gradient(double t, std::span<const double> x) const {
    const int d = grid.dim;
    const int dd = d * d;
    const double s = std::clamp(t, 0.0, 1.0) * grid.steps;
    const int i0 = std::min(static_cast<int>(std::floor(s)), grid.steps - 1);
    const double a = s - i0;
    const auto ws = interpolation_weights(grid, x);
    const std::size_t n = nodes();
    std::vector<double> out(dd, 0.0);
    for (const auto& w : ws)
        for (int e = 0; e < dd; ++e) {
            const double lo = grad[(static_cast<std::size_t>(i0) * n + w.node) * dd + e];
            const double hi = grad[(static_cast<std::size_t>(i0 + 1) * n + w.node) * dd + e];
            out[e] += w.weight * ((1.0 - a) * lo + a * hi);
        }
    return out;
}

namespace {

// Frobenius seminorm of a field with `comps` entries per node.
double holder_seminorm_multi(std::span<const double> field, const SpaceTimeGrid& g, double gamma, int comps) {
    const std::size_t n = node_count(g);
    double best = 0.0;
    for (int axis = 0; axis < g.dim; ++axis) {
        std::size_t stride = 1;
        for (int a = g.dim - 1; a > axis; --a) stride *= static_cast<std::size_t>(g.points);
        for (int m = 1; m <= g.points / 2; m *= 2) {
            const double denom = std::pow(m * g.spacing(), gamma);
            for (std::size_t node = 0; node < n; ++node) {
                const int i = static_cast<int>((node / stride) % g.points);
                const std::size_t other = node + (static_cast<std::size_t>((i + m) % g.points) - i) * stride;
                double diff2 = 0.0;
                for (int c = 0; c < comps; ++c) {
                    const double dv = field[other * comps + c] - field[node * comps + c];
                    diff2 += dv * dv;
                }
                best = std::max(best, std::sqrt(diff2) / denom);
            }
        }
    }
    return best;
}

} // namespace

double grid_holder_seminorm(std::span<const double> field, const SpaceTimeGrid& grid, double gamma) {
    return holder_seminorm_multi(field, grid, gamma, 1);
}

MildSolution solve_mild(const LevyModel& model, const DriftSpec& b, const DriftSpec& f, double lambda,
                        const SpaceTimeGrid& grid, const MildOptions& options, double gamma) {
    validate_grid(grid);
    require(model.dim() == grid.dim, "model dimension does not match the grid");
    require(lambda >= 0.0, "λ must be nonnegative");
    const int d = grid.dim;
    const int dd = d * d;
    const int slices = grid.steps + 1;
    const std::size_t nodes = node_count(grid);
    const double h = grid.h();

    Fields fields{torus_profile(b, grid), torus_profile(f, grid)};

    MildSolution sol;
    sol.grid = grid;
    sol.lambda = lambda;
    sol.gamma = gamma;
    sol.u.assign(static_cast<std::size_t>(slices) * nodes * d, 0.0);
    sol.grad.assign(static_cast<std::size_t>(slices) * nodes * dd, 0.0);

    std::vector<Complex> rates;
    {
        SpectralGrid sg(d, grid.points, grid.half_width);
        rates = symbol_rates(model, sg);
    }
    const std::size_t spec_n = rates.size();
    std::vector<StepWeights> weights(spec_n);
    for (std::size_t s = 0; s < spec_n; ++s) weights[s] = step_weights(lambda + rates[s], h);

    std::vector<Complex> g_hat(static_cast<std::size_t>(slices) * d * spec_n);
    std::vector<Complex> u_hat(static_cast<std::size_t>(slices) * d * spec_n);
    std::vector<double> next_u(sol.u.size());

    auto& diag = sol.diagnostics;
    const bool drift_free = b.is_zero();
    for (int iter = 1;; ++iter) {
        // Source spectra at every slice from the current iterate.
        for_each_slice(grid, slices, [&](SpectralGrid& sg, int i) {
            std::vector<double> src(nodes);
            const double* grad_i = sol.grad.data() + static_cast<std::size_t>(i) * nodes * dd;
            for (int j = 0; j < d; ++j) {
                source_slice(fields, b, f, grad_i, i * h, nodes, d, j, src);
                sg.forward(src, std::span<Complex>(g_hat.data() + (static_cast<std::size_t>(i) * d + j) * spec_n, spec_n));
            }
        });
        // Backward sweep in Fourier space.
        for (int j = 0; j < d; ++j) {
            Complex* last = u_hat.data() + (static_cast<std::size_t>(grid.steps) * d + j) * spec_n;
            std::fill(last, last + spec_n, Complex(0.0));
            for (int i = grid.steps - 1; i >= 0; --i) {
                Complex* cur = u_hat.data() + (static_cast<std::size_t>(i) * d + j) * spec_n;
                const Complex* nxt = u_hat.data() + (static_cast<std::size_t>(i + 1) * d + j) * spec_n;
                const Complex* g0 = g_hat.data() + (static_cast<std::size_t>(i) * d + j) * spec_n;
                const Complex* g1 = g_hat.data() + (static_cast<std::size_t>(i + 1) * d + j) * spec_n;
                for (std::size_t s = 0; s < spec_n; ++s)
                    cur[s] = weights[s].decay * nxt[s] + weights[s].w0 * g0[s] + weights[s].w1 * g1[s];
            }
        }
        // Back to physical space, with spectral gradients.
        for_each_slice(grid, slices, [&](SpectralGrid& sg, int i) {
            std::vector<double> field(nodes);
            std::vector<Complex> tmp(spec_n);
            for (int j = 0; j < d; ++j) {
                const Complex* uh = u_hat.data() + (static_cast<std::size_t>(i) * d + j) * spec_n;
                sg.backward(std::span<const Complex>(uh, spec_n), field);
                for (std::size_t n = 0; n < nodes; ++n) next_u[(static_cast<std::size_t>(i) * nodes + n) * d + j] = field[n];
                for (int k = 0; k < d; ++k) {
                    const auto& wk = sg.wavenumber(k);
                    for (std::size_t s = 0; s < spec_n; ++s) tmp[s] = uh[s] * Complex(0.0, wk[s]);
                    sg.backward(tmp, field);
                    for (std::size_t n = 0; n < nodes; ++n)
                        sol.grad[((static_cast<std::size_t>(i) * nodes + n) * d + j) * d + k] = field[n];
                }
            }
        });
        double diff = 0.0;
        for (std::size_t q = 0; q < next_u.size(); ++q) diff = std::max(diff, std::abs(next_u[q] - sol.u[q]));
        sol.u.swap(next_u);
        diag.differences.push_back(diff);
        diag.iterations = iter;
        diag.last_difference = diff;
        // Without drift the source does not depend on u, so one sweep is exact.
        if (diff < options.tolerance || drift_free) break;
        if (iter >= options.max_iterations) {
            std::ostringstream msg;
            msg << "Picard iteration did not reach " << options.tolerance << " in " << iter
                << " iterations; last differences:";
            const std::size_t from = diag.differences.size() > 5 ? diag.differences.size() - 5 : 0;
            for (std::size_t q = from; q < diag.differences.size(); ++q) msg << ' ' << diag.differences[q];
            throw NoConvergence(msg.str());
        }
    }

    for (double v : sol.u) diag.sup_u = std::max(diag.sup_u, std::abs(v));
    double f_sup = 0.0;
    for (double v : fields.f) f_sup = std::max(f_sup, std::abs(v));
    double f_time = 0.0;
    for (int i = 0; i < slices; ++i) f_time = std::max(f_time, std::abs(f.time_factor(i * h)));
    diag.sup_f = f_sup * f_time;
    for (std::size_t n = 0; n < sol.grad.size() / dd; ++n) {
        double s = 0.0;
        for (int e = 0; e < dd; ++e) s += sol.grad[n * dd + e] * sol.grad[n * dd + e];
        diag.grad_sup = std::max(diag.grad_sup, std::sqrt(s));
    }
    const int stride = std::max(1, grid.steps / 16);
    for (int i = 0; i < slices; i += stride) {
        const std::span<const double> slice(sol.grad.data() + static_cast<std::size_t>(i) * nodes * dd, nodes * dd);
        diag.grad_seminorm = std::max(diag.grad_seminorm, holder_seminorm_multi(slice, grid, gamma, dd));
    }
    return sol;
}

LambdaChoice choose_lambda(const LevyModel& model, const DriftSpec& b, const DriftSpec& f, double gamma,
                           const SpaceTimeGrid& grid, const MildOptions& options, double target) {
    LambdaChoice out;
    bool found = false;
    for (int e = 0; e <= 20; ++e) {
        const double lambda = std::ldexp(1.0, e);
        MildSolution sol = solve_mild(model, b, f, lambda, grid, options, gamma);
        const double crit = sol.diagnostics.grad_sup + sol.diagnostics.grad_seminorm;
        out.lambdas.push_back(lambda);
        out.grad_sups.push_back(sol.diagnostics.grad_sup);
        out.criterion.push_back(crit);
        if (!found && crit <= target) {
            found = true;
            out.lambda = lambda;
            out.solution = std::move(sol);
        }
        if (found && out.lambdas.size() >= 3) break;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "no λ ≤ 2^20 gives ‖∇u‖∞ + [∇u]_γ ≤ " << target << " (last value " << out.criterion.back() << ")";
        throw LambdaSearchFailure(msg.str());
    }
    std::vector<double> ll, lg;
    for (std::size_t i = 0; i < out.lambdas.size(); ++i)
        if (out.grad_sups[i] > 0.0) {
            ll.push_back(std::log(out.lambdas[i]));
            lg.push_back(std::log(out.grad_sups[i]));
        }
    if (ll.size() >= 2) out.solution.diagnostics.theta0_fit = -least_squares(ll, lg).slope;
    return out;
}

double WeakTestFunction::operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = x[i] - (i < center.size() ? center[i] : 0.0);
        r2 += u * u;
    }
    const double q = r2 / (radius * radius);
    return q >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - q));
}

WeakResidual weak_residual(const MildSolution& sol, const LevyModel& model, const DriftSpec& b, const DriftSpec& f,
                           const WeakTestFunction& phi) {
    const SpaceTimeGrid& grid = sol.grid;
    const int d = grid.dim;
    const int dd = d * d;
    const std::size_t nodes = node_count(grid);
    const double h = grid.h();
    const double cell = std::pow(grid.spacing(), d);

    SpectralGrid sg(d, grid.points, grid.half_width);
    std::vector<double> phi_v(nodes), adj(nodes);
    for (std::size_t n = 0; n < nodes; ++n) phi_v[n] = phi(node_coords(grid, n));
    std::vector<Complex> spec(sg.spectral_size());
    sg.forward(phi_v, spec);
    const auto rates = symbol_rates(model, sg);
    for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= -std::conj(rates[s]) - sol.lambda;
    sg.backward(spec, adj);

    const Fields fields{torus_profile(b, grid), torus_profile(f, grid)};
    const int slices = grid.steps + 1;
    // integrand[j][i] and pairing[j][i] = ⟨u_i, φ⟩.
    std::vector<std::vector<double>> integrand(d, std::vector<double>(slices)), pairing(d, std::vector<double>(slices));
    std::vector<double> src(nodes);
    for (int i = 0; i < slices; ++i) {
        const double* grad_i = sol.grad.data() + static_cast<std::size_t>(i) * nodes * dd;
        for (int j = 0; j < d; ++j) {
            source_slice(fields, b, f, grad_i, i * h, nodes, d, j, src);
            std::vector<double> a(nodes), c(nodes);
            for (std::size_t n = 0; n < nodes; ++n) {
                const double u = sol.u_at(i, n, j);
                a[n] = u * adj[n] + src[n] * phi_v[n];
                c[n] = u * phi_v[n];
            }
            integrand[j][i] = pairwise_sum(a) * cell;
            pairing[j][i] = pairwise_sum(c) * cell;
        }
    }
    WeakResidual out;
    for (double t : {0.0, 0.25, 0.5, 0.75}) {
        const int i0 = static_cast<int>(std::lround(t * grid.steps));
        double worst = 0.0;
        for (int j = 0; j < d; ++j)
            worst = std::max(worst, std::abs(pairing[j][i0] - simpson(integrand[j], i0, grid.steps, h)));
        out.checkpoints.push_back(static_cast<double>(i0) * h);
        out.defects.push_back(worst);
        out.max = std::max(out.max, worst);
    }
    return out;
}

double strong_defect(const MildSolution& sol, const LevyModel& model, const DriftSpec& b, const DriftSpec& f) {
    const SpaceTimeGrid& grid = sol.grid;
    const int d = grid.dim;
    const int dd = d * d;
    const std::size_t nodes = node_count(grid);
    const double h = grid.h();
    SpectralGrid sg(d, grid.points, grid.half_width);
    const auto rates = symbol_rates(model, sg);
    const Fields fields{torus_profile(b, grid), torus_profile(f, grid)};

    std::vector<bool> inside(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        const auto x = node_coords(grid, n);
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        inside[n] = m <= grid.interior() - 1.0;
    }

    double worst = 0.0;
    std::vector<double> field(nodes), gen(nodes), src(nodes);
    std::vector<Complex> spec(sg.spectral_size());
    for (int i = 2; i + 2 <= grid.steps; ++i) {
        const double* grad_i = sol.grad.data() + static_cast<std::size_t>(i) * nodes * dd;
        for (int j = 0; j < d; ++j) {
            for (std::size_t n = 0; n < nodes; ++n) field[n] = sol.u_at(i, n, j);
            sg.forward(field, spec);
            for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= -rates[s] - sol.lambda;
            sg.backward(spec, gen);
            source_slice(fields, b, f, grad_i, i * h, nodes, d, j, src);
            for (std::size_t n = 0; n < nodes; ++n) {
                if (!inside[n]) continue;
                const double dt = (8.0 * (sol.u_at(i + 1, n, j) - sol.u_at(i - 1, n, j)) - sol.u_at(i + 2, n, j) +
                                   sol.u_at(i - 2, n, j)) / (12.0 * h);
                worst = std::max(worst, std::abs(dt + gen[n] + src[n]));
            }
        }
    }
    return worst;
}

} // namespace levyflow
