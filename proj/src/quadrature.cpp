#include "levyflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levyflow/errors.hpp"

namespace levyflow {

double integrate(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol,
                 unsigned max_depth) {
    if (a == b) return 0.0;
    double err = 0.0;
    const double tol = std::max(rel_tol, 1e-15);
    // Boost's error heuristic degrades on very short intervals, so work on [0, 1].
    const double width = b - a;
    auto unit = [&](double u) { return f(a + width * u) * width; };
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        unit, 0.0, 1.0, max_depth, tol, &err);
    if (!std::isfinite(v) || err > std::max(abs_tol, rel_tol * std::abs(v))) {
        std::ostringstream msg;
        msg << "adaptive quadrature on [" << a << ", " << b << "] reached error " << err;
        throw QuadratureFailure(msg.str());
    }
    return v;
}

double integrate_split(const ScalarFn& f, double a, double b, std::span<const double> breaks,
                       double abs_tol, double rel_tol) {
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const double per_piece = abs_tol / static_cast<double>(pts.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        sum += integrate(f, pts[i], pts[i + 1], per_piece, rel_tol);
    return sum;
}

double integrate_to_infinity(const ScalarFn& f, double a, double abs_tol) {
    boost::math::quadrature::exp_sinh<double> rule;
    double err = 0.0, l1 = 0.0;
    const double v = rule.integrate([&](double x) { return f(x + a); }, 1e-12, &err, &l1);
    if (!std::isfinite(v) || err > std::max(abs_tol, 1e-9 * std::abs(v)))
        throw QuadratureFailure("exp-sinh quadrature did not converge");
    return v;
}

double integrate_cusped(const ScalarFn& f, double a, double b, std::span<const double> breaks,
                        double abs_tol, double rel_tol) {
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    // The rule's abscissae tables are costly to build; one per thread.
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    double sum = 0.0, err_sum = 0.0, l1_sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = pts[i], width = pts[i + 1] - pts[i];
        double err = 0.0, l1 = 0.0;
        // Map to [0, 1] so that abscissae near both ends are resolved relative to the width.
        sum += rule.integrate([&](double u) { return f(lo + width * u) * width; }, 0.0, 1.0,
                              std::max(rel_tol / 16.0, 1e-15), &err, &l1);
        err_sum += err;
        l1_sum += l1;
    }
    if (!std::isfinite(sum) || err_sum > std::max(abs_tol, rel_tol * l1_sum)) {
        std::ostringstream msg;
        msg << "tanh-sinh quadrature on [" << a << ", " << b << "] reached error " << err_sum;
        throw QuadratureFailure(msg.str());
    }
    return sum;
}

double fourier_integral(const ScalarFn& f, double omega, bool sine) {
    require(omega > 0.0, "Fourier integral needs a positive frequency");
    thread_local boost::math::quadrature::ooura_fourier_sin<double> sin_rule(1e-13, 8);
    thread_local boost::math::quadrature::ooura_fourier_cos<double> cos_rule(1e-13, 8);
    const auto [value, rel_err] = sine ? sin_rule.integrate(f, omega) : cos_rule.integrate(f, omega);
    if (!std::isfinite(value) || (rel_err > 1e-9 && rel_err * std::abs(value) > 1e-14))
        throw QuadratureFailure("Fourier integral reached relative error " + std::to_string(rel_err));
    return value;
}

double gauss_legendre(const ScalarFn& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

} // namespace levyflow
