#include "levyflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "levyflow/errors.hpp"

namespace levyflow {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
}

} // namespace

struct SpectralGrid::Plans {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
};

SpectralGrid::SpectralGrid(int dim, int points, double half_width)
    : dim_(dim), n_(points), half_width_(half_width), plans_(std::make_unique<Plans>()) {
    require(dim >= 1 && dim <= 3, "spectral grid supports dimensions 1 to 3");
    require(points >= 4 && points % 2 == 0, "spectral grid needs an even number of points");
    require(half_width > 0.0, "spectral grid half width must be positive");

    size_ = 1;
    for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(n_);
    const int last = n_ / 2 + 1;
    spectral_size_ = size_ / n_ * last;

    const double base = std::numbers::pi / half_width_;
    auto wave = [&](int i) { return base * (i <= n_ / 2 ? i : i - n_); };
    k_.assign(dim, std::vector<double>(spectral_size_));
    k_full_.assign(dim, std::vector<double>(spectral_size_));
    k2_.assign(spectral_size_, 0.0);
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        std::size_t rest = s;
        for (int axis = dim - 1; axis >= 0; --axis) {
            const int extent = axis == dim - 1 ? last : n_;
            const int i = static_cast<int>(rest % extent);
            rest /= extent;
            const double k = wave(i);
            k_full_[axis][s] = k;
            k_[axis][s] = (i == n_ / 2) ? 0.0 : k;
            k2_[s] += k * k;
        }
    }

    std::vector<int> dims(dim, n_);
    std::lock_guard lock(planner_mutex());
    plans_->real = fftw_alloc_real(size_);
    plans_->spec = fftw_alloc_complex(spectral_size_);
    plans_->fwd = fftw_plan_dft_r2c(dim, dims.data(), plans_->real, plans_->spec, FFTW_ESTIMATE);
    plans_->bwd = fftw_plan_dft_c2r(dim, dims.data(), plans_->spec, plans_->real, FFTW_ESTIMATE);
}

SpectralGrid::~SpectralGrid() = default;

std::vector<double> SpectralGrid::node(std::size_t flat) const {
    std::vector<double> x(dim_);
    for (int axis = dim_ - 1; axis >= 0; --axis) {
        x[axis] = coordinate(static_cast<int>(flat % n_));
        flat /= n_;
    }
    return x;
}

void SpectralGrid::forward(std::span<const double> in, std::span<Complex> out) {
    std::copy(in.begin(), in.end(), plans_->real);
    fftw_execute(plans_->fwd);
    const auto* src = reinterpret_cast<const Complex*>(plans_->spec);
    std::copy(src, src + spectral_size_, out.begin());
}

void SpectralGrid::backward(std::span<const Complex> in, std::span<double> out) {
    auto* dst = reinterpret_cast<Complex*>(plans_->spec);
    std::copy(in.begin(), in.end(), dst);
    fftw_execute(plans_->bwd);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = plans_->real[i] * scale;
}

void SpectralGrid::apply_symbol(std::span<double> field, const std::function<double(double)>& m) {
    std::vector<Complex> spec(spectral_size_);
    forward(field, spec);
    for (std::size_t s = 0; s < spectral_size_; ++s) spec[s] *= m(std::sqrt(k2_[s]));
    backward(spec, field);
}

std::vector<double> SpectralGrid::derivative(std::span<const double> field, int axis) {
    std::vector<Complex> spec(spectral_size_);
    forward(field, spec);
    for (std::size_t s = 0; s < spectral_size_; ++s) spec[s] *= Complex(0.0, k_[axis][s]);
    std::vector<double> out(size_);
    backward(spec, out);
    return out;
}

double SpectralGrid::fourier_eval(std::span<const Complex> spectrum, std::span<const double> x) const {
    const int last = n_ / 2 + 1;
    double sum = 0.0;
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        double phase = 0.0;
        for (int axis = 0; axis < dim_; ++axis) phase += k_full_[axis][s] * (x[axis] + half_width_);
        // The half spectrum stores each conjugate pair once, except the last
        // axis's zero and Nyquist planes.
        const int i_last = static_cast<int>(s % last);
        const double weight = (i_last == 0 || i_last == n_ / 2) ? 1.0 : 2.0;
        const Complex c = spectrum[s];
        // Nyquist modes contribute their real cosine interpolant only.
        const double term = i_last == n_ / 2 ? c.real() * std::cos(phase)
                                             : c.real() * std::cos(phase) - c.imag() * std::sin(phase);
        sum += weight * term;
    }
    return sum / static_cast<double>(size_);
}

double SpectralGrid::interpolate(std::span<const double> field, std::span<const double> x) const {
    const double dx = spacing();
    int base[3];
    double frac[3];
    for (int axis = 0; axis < dim_; ++axis) {
        double u = (x[axis] + half_width_) / dx;
        u -= std::floor(u / n_) * n_;
        const double fl = std::floor(u);
        base[axis] = static_cast<int>(fl) % n_;
        frac[axis] = u - fl;
    }
    double sum = 0.0;
    for (int corner = 0; corner < (1 << dim_); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int axis = 0; axis < dim_; ++axis) {
            const int bit = (corner >> axis) & 1;
            w *= bit ? frac[axis] : 1.0 - frac[axis];
            flat = flat * n_ + static_cast<std::size_t>((base[axis] + bit) % n_);
        }
        if (w != 0.0) sum += w * field[flat];
    }
    return sum;
}

} // namespace levyflow
