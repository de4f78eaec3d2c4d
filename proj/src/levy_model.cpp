#include "levyflow/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "levyflow/errors.hpp"
#include "levyflow/quadrature.hpp"

namespace levyflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Spherical average of cos(s·σ_1) over the unit sphere in R^d.
double sphere_cos_average(int d, double s) {
    if (s == 0.0) return 1.0;
    switch (d) {
        case 1: return std::cos(s);
        case 2: return std::cyl_bessel_j(0.0, s);
        case 3: return std::sin(s) / s;
        default: {
            const double nu = 0.5 * d - 1.0;
            return std::tgamma(0.5 * d) * std::pow(2.0 / s, nu) * std::cyl_bessel_j(nu, s);
        }
    }
}

// ∫_0^R (1 − Ω_d(s)) s^{−1−α} ds for finite R.
double oscillatory_primitive(int d, double alpha, double R) {
    if (R <= 0.0) return 0.0;
    const double s0 = std::min(R, 1.0);
    // Series of 1 − Ω_d integrated termwise against s^{−1−α} on [0, s0].
    double series = 0.0;
    const double g = std::tgamma(0.5 * d);
    for (int k = 1; k <= 30; ++k) {
        const double coef = g / (std::pow(4.0, k) * std::tgamma(k + 1.0) * std::tgamma(k + 0.5 * d));
        const double term = coef * std::pow(s0, 2.0 * k - alpha) / (2.0 * k - alpha);
        series += (k % 2 == 1 ? term : -term);
        if (std::abs(term) < 1e-18) break;
    }
    if (R <= s0) return series;

    const double total = 1.0 / (stable_density_constant(d, alpha) * sphere_area(d));
    if (R > 1e4) return total - std::pow(R, -alpha) / alpha;

    auto integrand = [&](double s) { return (1.0 - sphere_cos_average(d, s)) * std::pow(s, -1.0 - alpha); };
    double rest = 0.0;
    for (double a = s0; a < R; a += 2.0) rest += gauss_legendre(integrand, a, std::min(a + 2.0, R));
    return series + rest;
}

double piece_value(const PowerPiece& p, int dim, double r) {
    if (r < p.r_lo || r >= p.r_hi) return 0.0;
    return p.coef * std::pow(r, -dim - p.alpha);
}

void check_index(double alpha, const char* what) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        std::ostringstream msg;
        msg << what << " must lie in (0,2), got " << alpha;
        throw InvalidParameter(msg.str());
    }
}

} // namespace

double laplace_exponent(const SubordinatorSpec& sub, double lambda) {
    return std::visit(Overloaded{
                          [&](const StableSub& s) { return std::pow(s.scale * lambda, s.rho); },
                          [&](const RelativisticSub& s) {
                              const double a = std::pow(s.mass, 2.0 / s.alpha);
                              return std::pow(lambda + a, 0.5 * s.alpha) - s.mass;
                          },
                          [&](const IdentitySub&) { return lambda; },
                      },
                      sub);
}

double subordinator_alpha(const SubordinatorSpec& sub) {
    return std::visit(Overloaded{
                          [](const StableSub& s) { return 2.0 * s.rho; },
                          [](const RelativisticSub& s) { return s.alpha; },
                          [](const IdentitySub&) { return 2.0; },
                      },
                      sub);
}

double RadialDensity::operator()(double r) const {
    double v = 0.0;
    for (const auto& p : pieces) v += piece_value(p, dim, r);
    return v;
}

int LevyModel::dim() const {
    return std::visit(Overloaded{
                          [](const CylindricalStable& m) {
                              int d = 0;
                              for (const auto& b : m.blocks) d += b.dim;
                              return d;
                          },
                          [](const auto& m) { return m.dim; },
                      },
                      family);
}

std::string LevyModel::family_name() const {
    return std::visit(Overloaded{
                          [](const IsotropicStable&) { return std::string("isotropic_stable"); },
                          [](const SubordinateBM&) { return std::string("subordinate_bm"); },
                          [](const CylindricalStable&) { return std::string("cylindrical_stable"); },
                          [](const StableTypeDensity&) { return std::string("stable_type"); },
                          [](const RelativisticStable&) { return std::string("relativistic_stable"); },
                          [](const TruncatedStable&) { return std::string("truncated_stable"); },
                      },
                      family);
}

void validate(const LevyModel& model) {
    const int d = model.dim();
    require(d >= 1, "model dimension must be positive");
    require(model.eta.empty() || static_cast<int>(model.eta.size()) == d,
            "drift vector eta must match the model dimension");
    std::visit(Overloaded{
                   [](const IsotropicStable& m) { check_index(m.alpha, "alpha"); },
                   [](const SubordinateBM& m) {
                       if (const auto* s = std::get_if<StableSub>(&m.subordinator)) {
                           require(s->rho > 0.0 && s->rho < 1.0, "stable subordinator rho must lie in (0,1)");
                           require(s->scale > 0.0, "stable subordinator scale must be positive");
                       } else if (const auto* r = std::get_if<RelativisticSub>(&m.subordinator)) {
                           check_index(r->alpha, "relativistic alpha");
                           require(r->mass > 0.0, "relativistic mass must be positive");
                       }
                   },
                   [](const CylindricalStable& m) {
                       require(!m.blocks.empty(), "cylindrical model needs at least one block");
                       for (const auto& b : m.blocks) {
                           check_index(b.alpha, "block alpha");
                           require(b.dim >= 1, "block dimension must be positive");
                       }
                   },
                   [](const StableTypeDensity& m) {
                       check_index(m.alpha1, "alpha1");
                       check_index(m.alpha2, "alpha2");
                       require(m.alpha1 <= m.alpha2, "stable-type model needs alpha1 <= alpha2");
                       require(m.c1 > 0.0 && m.c1 <= m.c2, "stable-type model needs 0 < c1 <= c2");
                       require(m.kappa.dim == m.dim, "density dimension must match the model");
                       for (int k = 0; k <= 400; ++k) {
                           const double r = std::pow(2.0, -k / 10.0);
                           const double v = m.kappa(r);
                           const double lo = m.c1 * std::pow(r, -m.dim - m.alpha1);
                           const double hi = m.c2 * std::pow(r, -m.dim - m.alpha2);
                           if (v < lo * (1.0 - 1e-12) || v > hi * (1.0 + 1e-12)) {
                               std::ostringstream msg;
                               msg << "density leaves the stable-type envelope at r=" << r;
                               throw InvalidParameter(msg.str());
                           }
                       }
                   },
                   [](const RelativisticStable& m) {
                       check_index(m.alpha, "alpha");
                       require(m.mass > 0.0, "relativistic mass must be positive");
                   },
                   [](const TruncatedStable& m) { check_index(m.alpha, "alpha"); },
               },
               model.family);
}

LevyModel isotropic_stable(double alpha, int dim) { return {IsotropicStable{alpha, dim}, {}}; }

LevyModel subordinate_stable(double alpha, int dim) {
    return {SubordinateBM{StableSub{0.5 * alpha, 2.0}, dim}, {}};
}

LevyModel subordinate_relativistic(double alpha, double mass, int dim) {
    return {SubordinateBM{RelativisticSub{alpha, mass}, dim}, {}};
}

LevyModel cylindrical_stable(std::vector<CylindricalBlock> blocks) {
    return {CylindricalStable{std::move(blocks)}, {}};
}

LevyModel stable_type_power(double alpha, double c, int dim) {
    StableTypeDensity m;
    m.kappa = RadialDensity{{PowerPiece{c, alpha, 0.0, kInf}}, dim};
    m.alpha1 = m.alpha2 = alpha;
    m.c1 = m.c2 = c;
    m.dim = dim;
    return {m, {}};
}

double sphere_area(int dim) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double stable_density_constant(int dim, double alpha) {
    return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (dim + alpha)) /
           (std::pow(std::numbers::pi, 0.5 * dim) * std::tgamma(1.0 - 0.5 * alpha));
}

double subordinated_density(const SubordinatorSpec& sub, int dim, double r) {
    const double half_d = 0.5 * dim;
    const double gauss = std::pow(2.0 * std::numbers::pi, -half_d);
    return std::visit(
        Overloaded{
            [&](const StableSub& s) {
                const double rho = s.rho;
                return rho * std::pow(s.scale, rho) / std::tgamma(1.0 - rho) * gauss *
                       std::tgamma(half_d + rho) * std::pow(0.5 * r * r, -half_d - rho);
            },
            [&](const RelativisticSub& s) {
                const double rho = 0.5 * s.alpha;
                const double a = std::pow(s.mass, 1.0 / rho);
                const double nu = half_d + rho;
                return rho / std::tgamma(1.0 - rho) * gauss * 2.0 *
                       std::pow(r * r / (2.0 * a), -0.5 * nu) *
                       std::cyl_bessel_k(nu, r * std::sqrt(2.0 * a));
            },
            [&](const IdentitySub&) -> double {
                throw UnsupportedModel("Brownian motion has no Levy density");
            },
        },
        sub);
}

double levy_density(const LevyModel& model, double r) {
    return std::visit(
        Overloaded{
            [&](const IsotropicStable& m) {
                return stable_density_constant(m.dim, m.alpha) * std::pow(r, -m.dim - m.alpha);
            },
            [&](const SubordinateBM& m) { return subordinated_density(m.subordinator, m.dim, r); },
            [&](const CylindricalStable&) -> double {
                throw UnsupportedModel("cylindrical Levy measure has no radial density");
            },
            [&](const StableTypeDensity& m) { return m.kappa(r); },
            [&](const RelativisticStable& m) {
                return subordinated_density(RelativisticSub{m.alpha, m.mass}, m.dim, r);
            },
            [&](const TruncatedStable& m) {
                return r <= 1.0 ? stable_density_constant(m.dim, m.alpha) * std::pow(r, -m.dim - m.alpha)
                                : 0.0;
            },
        },
        model.family);
}

double power_piece_symbol(const PowerPiece& piece, int dim, double k) {
    if (k == 0.0) return 0.0;
    const double total = 1.0 / (stable_density_constant(dim, piece.alpha) * sphere_area(dim));
    const double upper =
        std::isinf(piece.r_hi) ? total : oscillatory_primitive(dim, piece.alpha, k * piece.r_hi);
    const double lower = oscillatory_primitive(dim, piece.alpha, k * piece.r_lo);
    return piece.coef * sphere_area(dim) * std::pow(k, piece.alpha) * (upper - lower);
}

double symbol_re(const LevyModel& model, const std::vector<double>& xi) {
    const double k = norm(xi);
    return std::visit(
        Overloaded{
            [&](const IsotropicStable& m) { return std::pow(k, m.alpha); },
            [&](const SubordinateBM& m) { return laplace_exponent(m.subordinator, 0.5 * k * k); },
            [&](const CylindricalStable& m) {
                double sum = 0.0;
                std::size_t off = 0;
                for (const auto& b : m.blocks) {
                    double s = 0.0;
                    for (int i = 0; i < b.dim; ++i) s += xi[off + i] * xi[off + i];
                    off += b.dim;
                    sum += std::pow(s, 0.5 * b.alpha);
                }
                return sum;
            },
            [&](const StableTypeDensity& m) {
                double sum = 0.0;
                for (const auto& p : m.kappa.pieces) sum += power_piece_symbol(p, m.dim, k);
                return sum;
            },
            [&](const RelativisticStable& m) {
                return laplace_exponent(RelativisticSub{m.alpha, m.mass}, 0.5 * k * k);
            },
            [&](const TruncatedStable& m) {
                return power_piece_symbol(
                    PowerPiece{stable_density_constant(m.dim, m.alpha), m.alpha, 0.0, 1.0}, m.dim, k);
            },
        },
        model.family);
}

MeasureDecomposition decompose(const StableTypeDensity& model) {
    MeasureDecomposition out;
    const int d = model.dim;
    out.nu0 = RadialDensity{{PowerPiece{-model.c1, model.alpha1, 1.0, kInf}}, d};
    out.nu1 = RadialDensity{{PowerPiece{model.c1, model.alpha1, 0.0, kInf}}, d};
    out.nu2 = model.kappa;
    out.nu2.pieces.push_back(PowerPiece{-model.c1, model.alpha1, 0.0, 1.0});
    out.total_variation_nu0 = model.c1 * sphere_area(d) / model.alpha1;
    return out;
}

std::optional<double> small_jump_moment(const LevyModel& model, double gamma) {
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0,1]");
    if (const auto* cyl = std::get_if<CylindricalStable>(&model.family)) {
        double sum = 0.0;
        for (const auto& b : cyl->blocks) {
            if (2.0 * gamma <= b.alpha) return std::nullopt;
            sum += stable_density_constant(b.dim, b.alpha) * sphere_area(b.dim) / (2.0 * gamma - b.alpha);
        }
        return sum;
    }

    const int d = model.dim();
    const double area = sphere_area(d);
    std::vector<double> breaks;
    if (const auto* st = std::get_if<StableTypeDensity>(&model.family))
        for (const auto& p : st->kappa.pieces) breaks.insert(breaks.end(), {p.r_lo, p.r_hi});
    auto radial = [&](double r) { return area * std::pow(r, 2.0 * gamma + d - 1) * levy_density(model, r); };

    double sum = 0.0;
    double prev = 0.0, prev_ratio = -1.0;
    int stalled = 0;
    for (int k = 0; k < 400; ++k) {
        const double hi = std::ldexp(1.0, -k);
        const double shell = integrate_split(radial, 0.5 * hi, hi, breaks, 1e-14, 1e-11);
        sum += shell;
        if (k > 0 && prev > 0.0) {
            const double ratio = shell / prev;
            stalled = ratio >= 1.0 - 1e-9 ? stalled + 1 : 0;
            if (stalled >= 8) return std::nullopt;
            if (ratio < 1.0 - 1e-9 && k >= 4 && std::abs(ratio - prev_ratio) < 1e-8 * ratio)
                return sum + shell * ratio / (1.0 - ratio);
            prev_ratio = ratio;
        }
        if (shell == 0.0 && k > 8) return sum;
        prev = shell;
    }
    // Slowly stabilising ratio; the last ratio bounds the geometric tail.
    return sum + prev * prev_ratio / (1.0 - prev_ratio);
}

HypothesisParams hypothesis_params(const LevyModel& model) {
    HypothesisParams hp;
    std::visit(Overloaded{
                   [&](const IsotropicStable& m) { hp.alpha = hp.alpha_eff = m.alpha; },
                   [&](const SubordinateBM& m) {
                       if (std::holds_alternative<IdentitySub>(m.subordinator))
                           throw UnsupportedModel("Brownian motion is not a pure-jump model");
                       hp.alpha = hp.alpha_eff = subordinator_alpha(m.subordinator);
                   },
                   [&](const CylindricalStable& m) {
                       double lo = 2.0, hi = 0.0;
                       for (const auto& b : m.blocks) {
                           lo = std::min(lo, b.alpha);
                           hi = std::max(hi, b.alpha);
                       }
                       hp.alpha = lo;
                       hp.alpha_eff = hi;
                       if (lo <= 1.0) {
                           hp.alpha_bar = lo;
                           hp.delta = lo / hi;
                       }
                   },
                   [&](const StableTypeDensity& m) {
                       hp.alpha = m.alpha1;
                       hp.alpha_eff = m.alpha2;
                   },
                   [&](const RelativisticStable& m) { hp.alpha = hp.alpha_eff = m.alpha; },
                   [&](const TruncatedStable& m) { hp.alpha = hp.alpha_eff = m.alpha; },
               },
               model.family);
    hp.subcritical = hp.alpha > 1.0;
    hp.gamma_floor = 0.5 * hp.alpha_eff;
    return hp;
}

double beta_floor(const HypothesisParams& hp, double gamma) {
    if (hp.alpha <= 1.0) return gamma + (1.0 - hp.alpha) / hp.delta;
    return std::max(gamma + 1.0 - hp.alpha, 0.0);
}

BetaInterval admissible_beta(const LevyModel& model) {
    const HypothesisParams hp = hypothesis_params(model);
    const double lo = beta_floor(hp, hp.gamma_floor);
    const double ceiling = hp.subcritical ? 1.0 : hp.alpha_bar;
    if (lo >= ceiling) {
        std::ostringstream msg;
        msg << "no admissible Holder exponent: lower bound " << lo << " >= " << ceiling;
        throw InadmissibleModel(msg.str());
    }
    return {lo, 1.0};
}

} // namespace levyflow
