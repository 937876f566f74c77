#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace gkdv {

// Real-to-halfcomplex FFT pair of fixed size, FFTW-backed. Plan creation is
// serialized on a global mutex (the FFTW planner is not thread-safe).
// Execution runs on per-instance buffers: distinct instances are safe on
// different threads, a single instance is not.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return n_; }
    std::size_t modes() const { return n_ / 2 + 1; }

    // Unnormalized forward transform; out is resized to modes().
    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out);
    // Inverse transform including the 1/n factor; out is resized to size().
    void backward(const std::vector<std::complex<double>>& in, std::vector<double>& out);

private:
    std::size_t n_ = 0;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
    double* real_ = nullptr;
    void* cplx_ = nullptr;
};

// order-th derivative of f seen as one period of length f.size()*h; the
// Nyquist mode is zeroed for odd orders.
std::vector<double> spectral_derivative(Fft& fft, const std::vector<double>& f, double h,
                                        int order);
std::vector<double> spectral_derivative(const std::vector<double>& f, double h, int order);

} // namespace gkdv
