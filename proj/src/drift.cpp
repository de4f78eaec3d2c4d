#include "levyflow/drift.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "levyflow/errors.hpp"
#include "levyflow/quadrature.hpp"

namespace levyflow {

namespace {

double at(const std::vector<double>& v, std::size_t i, double fallback) { return i < v.size() ? v[i] : fallback; }

std::vector<double> unmollified(const DriftSpec& b, std::span<const double> x) {
    const std::size_t d = x.size();
    std::vector<double> out(d, 0.0);
    auto along_direction = [&](double s) {
        for (std::size_t i = 0; i < d; ++i) out[i] = s * at(b.direction, i, i == 0 ? 1.0 : 0.0);
    };
    switch (b.shape) {
    case DriftShape::Zero:
        break;
    case DriftShape::CappedPower:
    case DriftShape::Restoring: {
        double r2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double u = x[i] - at(b.center, i, 0.0);
            r2 += u * u;
        }
        const double r = std::sqrt(r2);
        const double mag = r >= 1.0 ? 1.0 : std::pow(r, b.beta);
        if (b.shape == DriftShape::CappedPower) {
            along_direction(b.amplitude * mag);
        } else if (r > 0.0) {
            for (std::size_t i = 0; i < d; ++i) out[i] = -b.amplitude * mag * (x[i] - at(b.center, i, 0.0)) / r;
        }
        break;
    }
    case DriftShape::Sinusoid: {
        double phase = b.phase;
        for (std::size_t i = 0; i < d; ++i) phase += at(b.frequency, i, i == 0 ? 1.0 : 0.0) * x[i];
        along_direction(b.amplitude * std::sin(phase));
        break;
    }
    case DriftShape::Linear:
        for (std::size_t i = 0; i < d; ++i) out[i] = b.amplitude * (x[i] - at(b.center, i, 0.0));
        break;
    }
    return out;
}

// Points where the unmollified profile is not smooth along the first axis.
std::vector<double> kinks(const DriftSpec& b) {
    if (b.shape != DriftShape::CappedPower && b.shape != DriftShape::Restoring) return {};
    const double c = at(b.center, 0, 0.0);
    return {c - 1.0, c, c + 1.0};
}

} // namespace

double mollifier_constant(int dim) {
    if (dim == 1) return 35.0 / 32.0;
    if (dim == 2) return 4.0 / std::numbers::pi;
    throw InvalidParameter("mollifier is available in dimensions 1 and 2");
}

double mollifier(int dim, double r) {
    if (r >= 1.0) return 0.0;
    const double q = 1.0 - r * r;
    return mollifier_constant(dim) * q * q * q;
}

double DriftSpec::time_factor(double t) const {
    return modulation == 0.0 ? 1.0 : 1.0 + modulation * std::sin(2.0 * std::numbers::pi * t);
}

std::vector<double> DriftSpec::profile(std::span<const double> x) const {
    require(static_cast<int>(x.size()) == dim, "drift point dimension mismatch");
    if (mollification <= 0 || is_zero()) return unmollified(*this, x);
    const double n = mollification;
    if (dim == 1) {
        // ∫ ϱ(y) b(x − y/n) dy over [−1, 1], split where x − y/n hits a kink.
        std::vector<double> breaks;
        for (double k : kinks(*this)) breaks.push_back(n * (x[0] - k));
        const double v = integrate_cusped(
            [&](double y) {
                const double p = x[0] - y / n;
                return mollifier(1, y) * unmollified(*this, std::span<const double>(&p, 1))[0];
            },
            -1.0, 1.0, breaks, 1e-13, 1e-12);
        return {v};
    }
    // Plane: polar Gauss-Legendre, 20 radial panels of width 1/20 times 64 angles.
    std::vector<double> out(dim, 0.0), p(dim);
    constexpr int kAngles = 64;
    for (int a = 0; a < kAngles; ++a) {
        const double phi = 2.0 * std::numbers::pi * (a + 0.5) / kAngles;
        const double c = std::cos(phi), s = std::sin(phi);
        for (int panel = 0; panel < 20; ++panel) {
            for (int comp = 0; comp < dim; ++comp) {
                out[comp] += gauss_legendre(
                                 [&](double r) {
                                     p[0] = x[0] - r * c / n;
                                     p[1] = x[1] - r * s / n;
                                     return r * mollifier(2, r) * unmollified(*this, p)[comp];
                                 },
                                 panel / 20.0, (panel + 1) / 20.0) *
                             2.0 * std::numbers::pi / kAngles;
            }
        }
    }
    return out;
}

std::vector<double> DriftSpec::operator()(double t, std::span<const double> x) const {
    auto v = profile(x);
    const double m = time_factor(t);
    if (m != 1.0)
        for (double& c : v) c *= m;
    return v;
}

double DriftSpec::sup_norm() const {
    const double m = 1.0 + std::abs(modulation);
    switch (shape) {
    case DriftShape::Zero: return 0.0;
    case DriftShape::Linear: return amplitude == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    default: return std::abs(amplitude) * m;
    }
}

double DriftSpec::holder_exponent() const {
    return shape == DriftShape::CappedPower || shape == DriftShape::Restoring ? beta : 1.0;
}

double DriftSpec::holder_constant() const {
    const double m = 1.0 + std::abs(modulation);
    const double a = std::abs(amplitude);
    switch (shape) {
    case DriftShape::Zero: return 0.0;
    case DriftShape::CappedPower: return a * m;
    // Opposite sides of the centre: |x|^β + |y|^β ≤ 2^{1−β}|x − y|^β.
    case DriftShape::Restoring: return a * std::pow(2.0, 1.0 - beta) * m;
    case DriftShape::Sinusoid: {
        double k2 = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) {
            const double k = at(frequency, i, i == 0 ? 1.0 : 0.0);
            k2 += k * k;
        }
        return a * std::sqrt(k2) * m;
    }
    case DriftShape::Linear: return a;
    }
    return 0.0;
}

DriftSpec mollify_drift(const DriftSpec& b, int n) {
    require(n > 0, "mollification level must be positive");
    require(b.mollification == 0, "drift is already mollified");
    DriftSpec out = b;
    out.mollification = n;
    return out;
}

DriftSpec zero_drift(int dim) {
    DriftSpec b;
    b.dim = dim;
    return b;
}

DriftSpec capped_power_drift(double beta, double amplitude, int dim) {
    DriftSpec b;
    b.shape = DriftShape::CappedPower;
    b.beta = beta;
    b.amplitude = amplitude;
    b.dim = dim;
    return b;
}

DriftSpec restoring_drift(double beta, double amplitude, int dim) {
    DriftSpec b = capped_power_drift(beta, amplitude, dim);
    b.shape = DriftShape::Restoring;
    return b;
}

DriftSpec sinusoid_drift(double amplitude, double frequency, int dim) {
    DriftSpec b;
    b.shape = DriftShape::Sinusoid;
    b.amplitude = amplitude;
    b.frequency = {frequency};
    b.dim = dim;
    return b;
}

} // namespace levyflow
