#include "gkdv/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace gkdv {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

Fft::Fft(std::size_t n) : n_(n) {
    if (n < 2) throw std::invalid_argument("Fft: size must be at least 2");
    real_ = fftw_alloc_real(n);
    cplx_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_,
                                static_cast<fftw_complex*>(cplx_), FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), static_cast<fftw_complex*>(cplx_),
                                real_, FFTW_ESTIMATE);
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(real_);
    fftw_free(cplx_);
}

void Fft::forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) {
    if (in.size() != n_) throw std::invalid_argument("Fft::forward: size mismatch");
    std::memcpy(real_, in.data(), n_ * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    out.resize(modes());
    std::memcpy(out.data(), cplx_, modes() * sizeof(fftw_complex));
}

void Fft::backward(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
    if (in.size() != modes()) throw std::invalid_argument("Fft::backward: size mismatch");
    std::memcpy(cplx_, in.data(), modes() * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(bwd_));
    out.resize(n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

std::vector<double> spectral_derivative(Fft& fft, const std::vector<double>& f, double h,
                                        int order) {
    const std::size_t n = fft.size();
    if (f.size() != n) throw std::invalid_argument("spectral_derivative: size mismatch");
    std::vector<std::complex<double>> spec;
    fft.forward(f, spec);
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * h);
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const std::complex<double> ik(0.0, dk * static_cast<double>(j));
        std::complex<double> mult(1.0, 0.0);
        for (int m = 0; m < order; ++m) mult *= ik;
        spec[j] *= mult;
    }
    if (order % 2 == 1 && n % 2 == 0) spec.back() = 0.0;
    std::vector<double> out;
    fft.backward(spec, out);
    return out;
}

std::vector<double> spectral_derivative(const std::vector<double>& f, double h, int order) {
    Fft fft(f.size());
    return spectral_derivative(fft, f, h, order);
}

} // namespace gkdv
