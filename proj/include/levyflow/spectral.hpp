#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace levyflow {

using Complex = std::complex<double>;

/// Uniform periodic grid on the torus [−L, L)^d with FFTW real-to-complex
/// transforms. An instance owns its plans and scratch buffers, so it must not
/// be used from two threads at once; create one per worker.
class SpectralGrid {
public:
    SpectralGrid(int dim, int points, double half_width);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    int dim() const { return dim_; }
    int points() const { return n_; }
    double half_width() const { return half_width_; }
    double spacing() const { return 2.0 * half_width_ / n_; }
    std::size_t size() const { return size_; }
    std::size_t spectral_size() const { return spectral_size_; }

    double coordinate(int i) const { return -half_width_ + spacing() * i; }
    /// Coordinates of the flat (row-major) node index.
    std::vector<double> node(std::size_t flat) const;

    /// |k|² for every spectral coefficient.
    const std::vector<double>& wavenumber_sq() const { return k2_; }
    /// Component `axis` of the wavevector for every spectral coefficient;
    /// Nyquist entries are zero so that derivatives stay real.
    const std::vector<double>& wavenumber(int axis) const { return k_[axis]; }
    /// As wavenumber() but keeping the Nyquist entries, for even symbols.
    const std::vector<double>& wavenumber_full(int axis) const { return k_full_[axis]; }

    void forward(std::span<const double> in, std::span<Complex> out);
    /// Inverse transform including the 1/N normalisation.
    void backward(std::span<const Complex> in, std::span<double> out);

    /// Multiplies the field's spectrum by m(|k|) in place.
    void apply_symbol(std::span<double> field, const std::function<double(double)>& m);

    /// ∂_axis of a field by spectral differentiation.
    std::vector<double> derivative(std::span<const double> field, int axis);

    /// Sums of the Fourier series at an arbitrary point (exact trigonometric
    /// interpolation of the grid data).
    double fourier_eval(std::span<const Complex> spectrum, std::span<const double> x) const;

    /// Periodic multilinear interpolation of grid data.
    double interpolate(std::span<const double> field, std::span<const double> x) const;

private:
    int dim_;
    int n_;
    double half_width_;
    std::size_t size_;
    std::size_t spectral_size_;
    std::vector<double> k2_;
    std::vector<std::vector<double>> k_;
    std::vector<std::vector<double>> k_full_; ///< wavevector including Nyquist, for evaluation
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

} // namespace levyflow
