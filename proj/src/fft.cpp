#include "chromacs/detail/fft.hpp"

#include <algorithm>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "chromacs/errors.hpp"

namespace chromacs::detail {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

RealFft2d::RealFft2d(std::size_t ny, std::size_t nx) : ny_(ny), nx_(nx) {
    require(ny >= 1 && nx >= 1, Errc::BadDimensions, "FFT dimensions must be >= 1");
    std::vector<double> real(ny * nx);
    std::vector<std::complex<double>> spec(spectrum_size());
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    forward_plan_ = fftw_plan_dft_r2c_2d(static_cast<int>(ny), static_cast<int>(nx), real.data(), c, flags);
    inverse_plan_ = fftw_plan_dft_c2r_2d(static_cast<int>(ny), static_cast<int>(nx), c, real.data(), flags);
    require(forward_plan_ && inverse_plan_, Errc::InvalidArgument, "FFTW planning failed");
}

RealFft2d::~RealFft2d() {
    std::lock_guard lock(planner_mutex());
    if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft2d::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    require(in.size() == ny_ * nx_ && out.size() == spectrum_size(), Errc::DimensionMismatch,
            "FFT buffer size mismatch");
    // r2c leaves its input untouched
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft2d::inverse(std::span<const std::complex<double>> in,
                        std::span<std::complex<double>> scratch, std::span<double> out) const {
    require(in.size() == spectrum_size() && scratch.size() == spectrum_size() &&
                out.size() == ny_ * nx_,
            Errc::DimensionMismatch, "FFT buffer size mismatch");
    std::copy(in.begin(), in.end(), scratch.begin());
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                         reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
    const double scale = 1.0 / static_cast<double>(ny_ * nx_);
    for (double& v : out) v *= scale;
}

} // namespace chromacs::detail
