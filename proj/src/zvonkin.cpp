#include "levyflow/zvonkin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/quadrature.hpp"
#include "levyflow/rng.hpp"
#include "levyflow/spectral.hpp"

namespace levyflow {

namespace {

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

constexpr double kFdStep = 1.0 / 1024.0;

Vec to_vec(std::span<const double> x) {
    Vec v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
    return v;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> to_std(const Mat& m) {
    std::vector<double> out(static_cast<std::size_t>(m.rows() * m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    return out;
}

double op_norm(const Mat& m) {
    if (m.rows() == 1) return std::abs(m(0, 0));
    return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

// Time interpolation between two stored slices.
struct Frame {
    int lo = 0;
    double w = 0.0; ///< weight of slice lo + 1
};

// Interpolation of the transform's grid fields, allocation-free.
class FieldView {
public:
    explicit FieldView(const ZvonkinTransform& tr)
        : tr_(tr), g_(tr.u.grid), d_(g_.dim), nodes_(tr.u.nodes()) {}

    Frame frame(double t) const {
        const double s = std::clamp(t, 0.0, 1.0) * g_.steps;
        const int lo = std::min(static_cast<int>(std::floor(s)), g_.steps - 1);
        return {lo, s - lo};
    }

    int dim() const { return d_; }

    Vec u(const Frame& f, const Vec& x) const {
        Vec out = Vec::Zero(d_);
        interpolate(tr_.u.u, d_, f, x, out.data());
        return out;
    }
    Vec tail(const Frame& f, const Vec& x) const {
        Vec out = Vec::Zero(d_);
        if (!tr_.tail.empty()) interpolate(tr_.tail, d_, f, x, out.data());
        return out;
    }
    Mat grad_phi(const Frame& f, const Vec& x) const {
        double buf[9] = {};
        interpolate(tr_.u.grad, d_ * d_, f, x, buf);
        Mat m(d_, d_);
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) m(j, k) = (j == k ? 1.0 : 0.0) + buf[j * d_ + k];
        return m;
    }
    Vec phi(const Frame& f, const Vec& x) const { return x + u(f, x); }

    Vec inverse(const Frame& f, const Vec& y, const Vec& start) const {
        Vec x = start;
        for (int it = 0; it < 60; ++it) {
            const Vec next = y - u(f, x);
            const double step = (next - x).cwiseAbs().maxCoeff();
            x = next;
            if (step < 1e-10) return x;
        }
        std::ostringstream msg;
        msg << "fixed point x = y − u(x) did not settle within 60 iterations at y = " << y.transpose();
        throw InverseNoConvergence(msg.str());
    }

    // a at the preimage x of y.
    Vec drift_a(const Frame& f, const Vec& x) const {
        Vec out = tr_.lambda * u(f, x) - tail(f, x);
        for (int k = 0; k < d_; ++k) out[k] += tr_.eta_r0[k];
        return out;
    }

private:
    void interpolate(const std::vector<double>& field, int comps, const Frame& f, const Vec& x, double* out) const {
        const double dx = g_.spacing();
        int base[3];
        double frac[3];
        for (int a = 0; a < d_; ++a) {
            double s = (x[a] + g_.half_width) / dx;
            s -= std::floor(s / g_.points) * g_.points;
            const double fl = std::floor(s);
            base[a] = static_cast<int>(fl) % g_.points;
            frac[a] = s - fl;
        }
        for (int c = 0; c < comps; ++c) out[c] = 0.0;
        const std::size_t lo = static_cast<std::size_t>(f.lo) * nodes_ * comps;
        const std::size_t hi = lo + nodes_ * comps;
        for (int corner = 0; corner < (1 << d_); ++corner) {
            double w = 1.0;
            std::size_t flat = 0;
            for (int a = 0; a < d_; ++a) {
                const int bit = (corner >> a) & 1;
                w *= bit ? frac[a] : 1.0 - frac[a];
                flat = flat * g_.points + static_cast<std::size_t>((base[a] + bit) % g_.points);
            }
            if (w == 0.0) continue;
            for (int c = 0; c < comps; ++c)
                out[c] += w * ((1.0 - f.w) * field[lo + flat * comps + c] + f.w * field[hi + flat * comps + c]);
        }
    }

    const ZvonkinTransform& tr_;
    const SpaceTimeGrid& g_;
    int d_;
    std::size_t nodes_;
};

// 1 − E cos(ρ r·ω) for ω uniform on the sphere of R^d.
double one_minus_character(int d, double x) {
    if (d == 1) {
        const double s = std::sin(0.5 * x);
        return 2.0 * s * s;
    }
    if (std::abs(x) < 1e-3) {
        const double x2 = x * x;
        return d == 2 ? x2 / 4.0 - x2 * x2 / 64.0 : x2 / 6.0 - x2 * x2 / 120.0;
    }
    if (d == 2) return 1.0 - std::cyl_bessel_j(0.0, x);
    return 1.0 - std::sin(x) / x;
}

// A radial piece of the Lévy measure acting on a block of coordinates.
struct RadialPart {
    int offset = 0;
    int dim = 1;
    std::function<double(double)> density; ///< radial Lévy density
    std::function<double(double)> symbol;  ///< ψ as a function of |k|
};

std::vector<RadialPart> radial_parts(const LevyModel& model) {
    std::vector<RadialPart> parts;
    if (const auto* cyl = std::get_if<CylindricalStable>(&model.family)) {
        int offset = 0;
        for (const auto& b : cyl->blocks) {
            const double c = stable_density_constant(b.dim, b.alpha);
            const double alpha = b.alpha;
            const int dim = b.dim;
            parts.push_back({offset, dim, [c, alpha, dim](double r) { return c * std::pow(r, -dim - alpha); },
                             [alpha](double k) { return std::pow(k, alpha); }});
            offset += b.dim;
        }
        return parts;
    }
    const int d = model.dim();
    parts.push_back({0, d, [model](double r) { return levy_density(model, r); },
                     [model, d](double k) {
                         std::vector<double> xi(d, 0.0);
                         xi[0] = k;
                         return symbol_re(model, xi);
                     }});
    return parts;
}

// ∫_{|z|≥r0}(cos(ρ e·z) − 1)ν_part(dz) = ∫_{|z|<r0}(1 − cos)ν − ψ(ρ).
double part_multiplier(const RadialPart& p, double r0, double rho) {
    if (rho == 0.0) return 0.0;
    const double area = sphere_area(p.dim);
    const double small = integrate_cusped(
        [&](double r) {
            if (r < 1e-100) return 0.0;
            return area * one_minus_character(p.dim, rho * r) * p.density(r) * std::pow(r, p.dim - 1);
        },
        0.0, r0, {}, 1e-13, 1e-11);
    return small - p.symbol(rho);
}

struct Sampler {
    RngStream rng;
    int d;
    double box;

    Vec point() {
        Vec x(d);
        for (int k = 0; k < d; ++k) x[k] = box * (2.0 * rng.uniform() - 1.0);
        return x;
    }
    // Log-uniform length in [2^-12, 8] with a uniform direction.
    Vec offset() {
        const double len = std::exp2(-12.0 + 15.0 * rng.uniform());
        Vec dir(d);
        double n = 0.0;
        do {
            for (int k = 0; k < d; ++k) dir[k] = rng.normal();
            n = dir.norm();
        } while (n == 0.0);
        return dir * (len / n);
    }
};

Mat grad_g(const FieldView& fv, const Frame& f, const Vec& x, const Vec& z) {
    const int d = fv.dim();
    return fv.grad_phi(f, x + z) * fv.grad_phi(f, x).inverse() - Mat::Identity(d, d);
}

// Centred-difference Jacobian of the preimage drift a, with preimages of y ± δe_k.
template <class Fn>
Mat fd_jacobian(const FieldView& fv, const Frame& f, const Vec& y, const Vec& x, Fn&& fn) {
    const int d = fv.dim();
    Mat m(d, d);
    for (int k = 0; k < d; ++k) {
        Vec yp = y, ym = y;
        yp[k] += kFdStep;
        ym[k] -= kFdStep;
        const Vec xp = fv.inverse(f, yp, x), xm = fv.inverse(f, ym, x);
        m.col(k) = (fn(yp, xp) - fn(ym, xm)) / (2.0 * kFdStep);
    }
    return m;
}

} // namespace

SpaceTimeGrid flow_grid(int dim) {
    SpaceTimeGrid g;
    g.dim = dim;
    g.half_width = 32.0;
    g.cutoff_width = 2.0;
    g.points = dim == 1 ? 1024 : 128;
    g.steps = dim == 1 ? 256 : 64;
    return g;
}

double select_r0(double c0, double gamma) {
    require(c0 >= 0.0 && gamma > 0.0 && gamma <= 1.0, "select_r0 needs C0 ≥ 0 and γ in (0, 1]");
    for (int k = 1; k <= 60; ++k) {
        const double r = std::ldexp(1.0, -k);
        if (c0 * std::pow(r, gamma) + 1.5 * r < 1.0) return r;
    }
    std::ostringstream msg;
    msg << "no dyadic r0 satisfies C0·r0^γ + 3r0/2 < 1 for C0 = " << c0 << ", γ = " << gamma;
    throw R0SearchFailure(msg.str());
}

double tail_multiplier(const LevyModel& model, double r0, std::span<const double> k) {
    require(r0 > 0.0, "jump threshold must be positive");
    require(static_cast<int>(k.size()) == model.dim(), "wavevector dimension mismatch");
    double m = 0.0;
    for (const auto& p : radial_parts(model)) {
        double rho2 = 0.0;
        for (int i = 0; i < p.dim; ++i) rho2 += k[p.offset + i] * k[p.offset + i];
        m += part_multiplier(p, r0, std::sqrt(rho2));
    }
    return m;
}

ZvonkinTransform make_transform(const LevyModel& model, MildSolution u, double drift_sup,
                                const TransformOptions& options) {
    const int d = u.grid.dim;
    require(model.dim() == d, "model dimension does not match the solution grid");
    ZvonkinTransform tr;
    tr.model = model;
    tr.u = std::move(u);
    tr.lambda = tr.u.lambda;
    tr.gamma = tr.u.gamma;
    tr.drift_sup = drift_sup;
    tr.eta_r0.assign(d, 0.0);
    for (int k = 0; k < d; ++k) tr.eta_r0[k] = model.eta_component(k);

    const double box = std::min(4.0, tr.escape_radius());
    const int n_fit = std::max(1, options.fit_samples);

    // C0 from ‖∇g(·,z)‖ / (1 ∧ |z|^γ) over sampled (t, y, z).
    {
        const FieldView fv(tr);
        Sampler s{RngStream(options.seed, stream_id(StreamTag::Zvonkin, 0)), d, box};
        double worst = 0.0;
        for (int i = 0; i < n_fit; ++i) {
            const Frame f = fv.frame(s.rng.uniform());
            const Vec x = s.point(), z = s.offset();
            worst = std::max(worst, op_norm(grad_g(fv, f, x, z)) / std::min(1.0, std::pow(z.norm(), tr.gamma)));
        }
        tr.C0 = options.fit_margin * worst;
    }
    tr.r0 = options.r0 > 0.0 ? options.r0 : select_r0(tr.C0, tr.gamma);

    // Big-jump integral of u on the grid through its Fourier multiplier.
    {
        const auto& g = tr.u.grid;
        SpectralGrid sg(d, g.points, g.half_width);
        const auto parts = radial_parts(model);
        const double dk = std::numbers::pi / g.half_width;
        std::vector<std::map<long long, double>> cache(parts.size());
        std::vector<double> mult(sg.spectral_size(), 0.0);
        for (std::size_t s = 0; s < mult.size(); ++s) {
            for (std::size_t p = 0; p < parts.size(); ++p) {
                double rho2 = 0.0;
                for (int i = 0; i < parts[p].dim; ++i) {
                    const double ki = sg.wavenumber_full(parts[p].offset + i)[s];
                    rho2 += ki * ki;
                }
                const long long key = std::llround(rho2 / (dk * dk));
                auto it = cache[p].find(key);
                if (it == cache[p].end()) it = cache[p].emplace(key, part_multiplier(parts[p], tr.r0, std::sqrt(rho2))).first;
                mult[s] += it->second;
            }
        }
        const std::size_t nodes = tr.u.nodes();
        const int slices = g.steps + 1;
        tr.tail.assign(tr.u.u.size(), 0.0);
        const auto chunks = parallel_map(static_cast<std::size_t>(slices), [&](std::size_t i) {
            SpectralGrid local(d, g.points, g.half_width);
            std::vector<double> field(nodes), out(nodes * d);
            std::vector<Complex> spec(local.spectral_size());
            for (int j = 0; j < d; ++j) {
                for (std::size_t n = 0; n < nodes; ++n) field[n] = tr.u.u[(i * nodes + n) * d + j];
                local.forward(field, spec);
                for (std::size_t q = 0; q < spec.size(); ++q) spec[q] *= mult[q];
                local.backward(spec, field);
                for (std::size_t n = 0; n < nodes; ++n) out[n * d + j] = field[n];
            }
            return out;
        });
        for (int i = 0; i < slices; ++i)
            std::copy(chunks[i].begin(), chunks[i].end(), tr.tail.begin() + static_cast<std::ptrdiff_t>(i * nodes * d));
    }

    // C1 and C2 on a second sample set.
    {
        const FieldView fv(tr);
        Sampler s{RngStream(options.seed, stream_id(StreamTag::Zvonkin, 1)), d, box};
        double c1 = 0.0, grad_a = 0.0, a_sup = 0.0;
        for (int i = 0; i < n_fit; ++i) {
            const Frame f = fv.frame(s.rng.uniform());
            const Vec x = s.point(), z = s.offset();
            c1 = std::max(c1, op_norm(grad_g(fv, f, x, z)));
            const Vec y = fv.phi(f, x);
            const Mat ja = fd_jacobian(fv, f, y, x, [&](const Vec&, const Vec& xx) { return fv.drift_a(f, xx); });
            grad_a = std::max(grad_a, op_norm(ja));
            a_sup = std::max(a_sup, fv.drift_a(f, x).norm());
        }
        tr.C1 = options.fit_margin * c1;
        tr.C2 = options.fit_margin * std::max(grad_a, a_sup / (1.0 + drift_sup));
    }
    return tr;
}

ZvonkinTransform build_transform(const LevyModel& model, const DriftSpec& b, double gamma,
                                 const TransformOptions& options) {
    MildSolution u;
    if (options.lambda > 0.0) {
        u = solve_mild(model, b, b, options.lambda, options.grid, options.mild, gamma);
    } else {
        u = choose_lambda(model, b, b, gamma, options.grid, options.mild).solution;
    }
    return make_transform(model, std::move(u), b.sup_norm(), options);
}

std::vector<double> phi(const ZvonkinTransform& tr, double t, std::span<const double> x) {
    const FieldView fv(tr);
    return to_std(fv.phi(fv.frame(t), to_vec(x)));
}

std::vector<double> phi_inverse(const ZvonkinTransform& tr, double t, std::span<const double> y) {
    const FieldView fv(tr);
    const Vec yy = to_vec(y);
    return to_std(fv.inverse(fv.frame(t), yy, yy));
}

std::vector<double> grad_phi(const ZvonkinTransform& tr, double t, std::span<const double> x) {
    const FieldView fv(tr);
    return to_std(fv.grad_phi(fv.frame(t), to_vec(x)));
}

std::vector<double> transformed_jump_g(const ZvonkinTransform& tr, double s, std::span<const double> y,
                                       std::span<const double> z) {
    const FieldView fv(tr);
    const Frame f = fv.frame(s);
    const Vec yy = to_vec(y);
    const Vec x = fv.inverse(f, yy, yy);
    return to_std(Vec(fv.phi(f, x + to_vec(z)) - yy));
}

std::vector<double> grad_jump_g(const ZvonkinTransform& tr, double s, std::span<const double> y,
                                std::span<const double> z) {
    const FieldView fv(tr);
    const Frame f = fv.frame(s);
    const Vec yy = to_vec(y);
    return to_std(grad_g(fv, f, fv.inverse(f, yy, yy), to_vec(z)));
}

std::vector<double> transformed_drift_a(const ZvonkinTransform& tr, double s, std::span<const double> y) {
    const FieldView fv(tr);
    const Frame f = fv.frame(s);
    const Vec yy = to_vec(y);
    return to_std(fv.drift_a(f, fv.inverse(f, yy, yy)));
}

bool TransformCheck::passed() const {
    return sandwich_low >= 0.5 && sandwich_high <= 1.5 && inverse_grad <= 2.0 && round_trip <= 1e-9 &&
           jump_ratio <= 1.5 && grad_jump_ratio <= 1.0 && drift_ratio <= 1.0 && r0_condition < 1.0;
}

TransformCheck check_transform(const ZvonkinTransform& tr, int pairs, std::uint64_t seed) {
    const FieldView fv(tr);
    const int d = tr.dim();
    Sampler s{RngStream(seed, stream_id(StreamTag::Zvonkin, 2)), d, std::min(4.0, tr.escape_radius())};
    TransformCheck c;
    c.pairs = pairs;
    c.sandwich_low = std::numeric_limits<double>::infinity();
    c.r0_condition = tr.C0 * std::pow(tr.r0, tr.gamma) + 1.5 * tr.r0;
    for (int i = 0; i < pairs; ++i) {
        const Frame f = fv.frame(s.rng.uniform());
        const Vec x = s.point(), dx = s.offset();
        const double ratio = (fv.phi(f, x + dx) - fv.phi(f, x)).norm() / dx.norm();
        c.sandwich_low = std::min(c.sandwich_low, ratio);
        c.sandwich_high = std::max(c.sandwich_high, ratio);

        const Vec y = s.point();
        const Vec xi = fv.inverse(f, y, y);
        c.round_trip = std::max(c.round_trip, (fv.phi(f, xi) - y).cwiseAbs().maxCoeff());
        c.inverse_grad = std::max(c.inverse_grad, op_norm(fv.grad_phi(f, xi).inverse()));

        const Vec z = s.offset();
        const Vec g = fv.phi(f, xi + z) - y;
        c.jump_ratio = std::max(c.jump_ratio, g.norm() / z.norm());
        if (tr.C0 > 0.0) {
            const double bound = tr.C0 * std::min(1.0, std::pow(z.norm(), tr.gamma));
            c.grad_jump_ratio = std::max(c.grad_jump_ratio, op_norm(grad_g(fv, f, xi, z)) / bound);
        } else {
            c.grad_jump_ratio = std::max(c.grad_jump_ratio, op_norm(grad_g(fv, f, xi, z)) > 0.0 ? 2.0 : 0.0);
        }
        const double a = fv.drift_a(f, xi).norm();
        if (tr.C2 > 0.0) {
            c.drift_ratio = std::max(c.drift_ratio, a / (tr.C2 * (1.0 + tr.drift_sup)));
        } else if (a > 0.0) {
            c.drift_ratio = 2.0;
        }
    }
    return c;
}

namespace {

FlowSample run_flow(const ZvonkinTransform& tr, const Vec& y0, const Mat& j0, const PathGrid& path) {
    const FieldView fv(tr);
    const int d = tr.dim();
    require(path.dim == d, "path dimension does not match the transform");
    require(path.grid.horizon <= 1.0 + 1e-12, "flows are defined on [0, 1]");
    const int n = path.grid.steps;
    const double h = path.grid.h();
    const double escape = tr.escape_radius();

    FlowSample out;
    out.grid = path.grid;
    out.dim = d;
    out.stream_id = path.stream_id;
    out.y.resize(static_cast<std::size_t>(n + 1) * d);
    out.x.resize(out.y.size());
    out.grad_y.resize(static_cast<std::size_t>(n + 1) * d * d);
    out.grad_x.resize(out.grad_y.size());
    out.bismut.assign(path.blocks.size() * d, 0.0);
    for (const auto& b : path.blocks) out.clock.push_back(b.clock.back());

    Vec y = y0;
    Mat jac = j0;
    Vec guess = y0;
    Mat prev_jx;
    std::size_t next_jump = 0;
    const Mat eye = Mat::Identity(d, d);
    for (int i = 0;; ++i) {
        const Frame f = fv.frame(path.grid.t(i));
        const Vec x = fv.inverse(f, y, guess);
        guess = x;
        const Mat gp = fv.grad_phi(f, x);
        const Mat jx = gp.inverse() * jac;
        for (int k = 0; k < d; ++k) {
            out.y[i * d + k] = y[k];
            out.x[i * d + k] = x[k];
            for (int c = 0; c < d; ++c) {
                out.grad_y[(i * d + k) * d + c] = jac(k, c);
                out.grad_x[(i * d + k) * d + c] = jx(k, c);
            }
        }
        if (x.cwiseAbs().maxCoeff() > escape) {
            std::ostringstream msg;
            msg << "flow left |x| ≤ " << escape << " at t = " << path.grid.t(i);
            throw StateEscape(msg.str());
        }
        if (i > 0) out.max_grad_jump = std::max(out.max_grad_jump, op_norm(jx - prev_jx));
        prev_jx = jx;
        if (i == n) break;

        for (std::size_t bi = 0; bi < path.blocks.size(); ++bi) {
            const auto& blk = path.blocks[bi];
            for (int c = 0; c < d; ++c) {
                double acc = 0.0;
                for (int r = 0; r < blk.dim; ++r) {
                    const double dw = blk.bm[(i + 1) * blk.dim + r] - blk.bm[i * blk.dim + r];
                    acc += jx(blk.offset + r, c) * dw;
                }
                out.bismut[bi * d + c] += acc;
            }
        }

        const Vec small = to_vec(path.small_at(i));
        const Mat step_jac = fd_jacobian(fv, f, y, x, [&](const Vec&, const Vec& xx) -> Vec {
            return fv.drift_a(f, xx) * h + fv.grad_phi(f, xx) * small;
        });
        y = y + fv.drift_a(f, x) * h + gp * small;
        jac = (eye + step_jac) * jac;

        for (; next_jump < path.big_jumps.size() && path.big_jumps[next_jump].step == i; ++next_jump) {
            const auto& jump = path.big_jumps[next_jump];
            const Frame fj = fv.frame(jump.time);
            const Vec z = to_vec(jump.z);
            const Vec xj = fv.inverse(fj, y, x);
            const Mat gj = fd_jacobian(fv, fj, y, xj, [&](const Vec& yy, const Vec& xx) -> Vec {
                return fv.phi(fj, xx + z) - yy;
            });
            y = fv.phi(fj, xj + z);
            jac = (eye + gj) * jac;
        }
    }
    return out;
}

} // namespace

FlowSample solve_transformed_sde(const ZvonkinTransform& tr, std::span<const double> y0, const PathGrid& path) {
    const Vec y = to_vec(y0);
    auto out = run_flow(tr, y, Mat::Identity(tr.dim(), tr.dim()), path);
    out.x0 = std::vector<double>(out.x.begin(), out.x.begin() + tr.dim());
    return out;
}

FlowSample solve_flow(const ZvonkinTransform& tr, std::span<const double> x, const PathGrid& path) {
    const FieldView fv(tr);
    const Frame f0 = fv.frame(0.0);
    const Vec xx = to_vec(x);
    auto out = run_flow(tr, fv.phi(f0, xx), fv.grad_phi(f0, xx), path);
    out.x0.assign(x.begin(), x.end());
    return out;
}

std::vector<double> solve_direct(const DriftSpec& b, std::span<const double> x, const PathGrid& path) {
    const int d = path.dim;
    require(static_cast<int>(x.size()) == d && b.dim == d, "dimension mismatch in the direct scheme");
    const int n = path.grid.steps;
    const double h = path.grid.h();
    std::vector<double> out(static_cast<std::size_t>(n + 1) * d);
    std::vector<double> cur(x.begin(), x.end());
    for (int i = 0;; ++i) {
        std::copy(cur.begin(), cur.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
        if (i == n) break;
        const auto drift = b(path.grid.t(i), cur);
        const auto inc = path.incr(i);
        for (int k = 0; k < d; ++k) cur[k] += drift[k] * h + inc[k];
    }
    return out;
}

} // namespace levyflow
