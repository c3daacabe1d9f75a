#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace chromacs::detail {

/// Real <-> half-spectrum 2D DFT of an ny x nx row-major plane (FFTW backend).
/// Plans are created once; execution is reentrant, so one instance may be
/// shared by concurrent callers.
class RealFft2d {
public:
    RealFft2d(std::size_t ny, std::size_t nx);
    ~RealFft2d();
    RealFft2d(const RealFft2d&) = delete;
    RealFft2d& operator=(const RealFft2d&) = delete;

    std::size_t ny() const noexcept { return ny_; }
    std::size_t nx() const noexcept { return nx_; }
    /// ny * (nx/2 + 1)
    std::size_t spectrum_size() const noexcept { return ny_ * (nx_ / 2 + 1); }

    void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
    /// Unnormalized inverse scaled by 1/(ny*nx). `scratch` is overwritten.
    void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> scratch,
                 std::span<double> out) const;

private:
    std::size_t ny_;
    std::size_t nx_;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

} // namespace chromacs::detail
