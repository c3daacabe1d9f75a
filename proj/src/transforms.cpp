#include "chromacs/transforms.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "chromacs/errors.hpp"

namespace chromacs {

namespace {

constexpr std::array<double, 2> kHaar = {0.70710678118654752440, 0.70710678118654752440};

// Daubechies, 4 vanishing moments (8 taps).
constexpr std::array<double, 8> kDb4 = {
    0.23037781330889650086,  0.71484657055291564709,  0.63088076792985890788,  -0.027983769416859854211,
    -0.18703481171909308408, 0.030841381835560763627, 0.032883011666885199735, -0.010597401785069032105};

// One periodic analysis stage over `len` samples spaced `stride` apart.
// First half of the output holds the lowpass band, second half the highpass.
void analyze_1d(double* data, std::size_t len, std::size_t stride, std::span<const double> h,
                std::vector<double>& buf) {
    const std::size_t half = len / 2;
    const std::size_t taps = h.size();
    buf.assign(len, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t j = 0; j < taps; ++j) {
            const double v = data[((2 * i + j) % len) * stride];
            const double g = (j % 2 == 0 ? 1.0 : -1.0) * h[taps - 1 - j];
            lo += h[j] * v;
            hi += g * v;
        }
        buf[i] = lo;
        buf[half + i] = hi;
    }
    for (std::size_t i = 0; i < len; ++i) data[i * stride] = buf[i];
}

// Exact transpose of analyze_1d.
void synthesize_1d(double* data, std::size_t len, std::size_t stride, std::span<const double> h,
                   std::vector<double>& buf) {
    const std::size_t half = len / 2;
    const std::size_t taps = h.size();
    buf.assign(len, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        const double lo = data[i * stride];
        const double hi = data[(half + i) * stride];
        for (std::size_t j = 0; j < taps; ++j) {
            const double g = (j % 2 == 0 ? 1.0 : -1.0) * h[taps - 1 - j];
            buf[(2 * i + j) % len] += h[j] * lo + g * hi;
        }
    }
    for (std::size_t i = 0; i < len; ++i) data[i * stride] = buf[i];
}

} // namespace

Wavelet parse_wavelet(const std::string& name) {
    if (name == "haar") return Wavelet::haar;
    if (name == "db4") return Wavelet::db4;
    fail(Errc::ConfigError, "unknown wavelet '" + name + "'");
}

std::string to_string(Wavelet w) { return w == Wavelet::haar ? "haar" : "db4"; }

std::span<const double> wavelet_filter(Wavelet w) {
    if (w == Wavelet::haar) return kHaar;
    return kDb4;
}

void TransformSpec::validate(std::size_t ny, std::size_t nx) const {
    require(levels >= 1 && levels < 63, Errc::BadDimensions, "wavelet levels must be >= 1");
    const std::size_t block = std::size_t{1} << levels;
    require(ny % block == 0 && nx % block == 0, Errc::BadDimensions,
            std::to_string(ny) + "x" + std::to_string(nx) + " is not divisible by 2^" +
                std::to_string(levels));
}

std::size_t default_levels(std::size_t ny, std::size_t nx) {
    std::size_t levels = 0;
    while (levels < 4 && ny % (std::size_t{2} << levels) == 0 && nx % (std::size_t{2} << levels) == 0) {
        ++levels;
    }
    return std::max<std::size_t>(levels, 1);
}

void dwt2_analysis(std::span<const double> plane, std::span<double> coeffs, std::size_t ny,
                   std::size_t nx, const TransformSpec& spec) {
    spec.validate(ny, nx);
    require(plane.size() == ny * nx && coeffs.size() == ny * nx, Errc::DimensionMismatch,
            "plane size mismatch");
    std::copy(plane.begin(), plane.end(), coeffs.begin());
    const auto h = wavelet_filter(spec.wavelet);
    std::vector<double> buf;
    std::size_t rows = ny;
    std::size_t cols = nx;
    for (std::size_t level = 0; level < spec.levels; ++level) {
        for (std::size_t m = 0; m < rows; ++m) analyze_1d(coeffs.data() + m * nx, cols, 1, h, buf);
        for (std::size_t n = 0; n < cols; ++n) analyze_1d(coeffs.data() + n, rows, nx, h, buf);
        rows /= 2;
        cols /= 2;
    }
}

void dwt2_synthesis(std::span<const double> coeffs, std::span<double> plane, std::size_t ny,
                    std::size_t nx, const TransformSpec& spec) {
    spec.validate(ny, nx);
    require(plane.size() == ny * nx && coeffs.size() == ny * nx, Errc::DimensionMismatch,
            "plane size mismatch");
    std::copy(coeffs.begin(), coeffs.end(), plane.begin());
    const auto h = wavelet_filter(spec.wavelet);
    std::vector<double> buf;
    for (std::size_t level = spec.levels; level-- > 0;) {
        const std::size_t rows = ny >> level;
        const std::size_t cols = nx >> level;
        for (std::size_t n = 0; n < cols; ++n) synthesize_1d(plane.data() + n, rows, nx, h, buf);
        for (std::size_t m = 0; m < rows; ++m) synthesize_1d(plane.data() + m * nx, cols, 1, h, buf);
    }
}

std::vector<double> dwt2_analysis(std::span<const double> plane, std::size_t ny, std::size_t nx,
                                  const TransformSpec& spec) {
    std::vector<double> out(ny * nx);
    dwt2_analysis(plane, out, ny, nx, spec);
    return out;
}

std::vector<double> dwt2_synthesis(std::span<const double> coeffs, std::size_t ny, std::size_t nx,
                                   const TransformSpec& spec) {
    std::vector<double> out(ny * nx);
    dwt2_synthesis(coeffs, out, ny, nx, spec);
    return out;
}

namespace {

std::vector<double> dct_matrix(std::size_t S) {
    std::vector<double> d(S * S);
    for (std::size_t k = 0; k < S; ++k) {
        const double w = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(S));
        for (std::size_t n = 0; n < S; ++n) {
            d[k * S + n] = w * std::cos(std::numbers::pi * (static_cast<double>(n) + 0.5) *
                                        static_cast<double>(k) / static_cast<double>(S));
        }
    }
    return d;
}

} // namespace

std::vector<double> dct1_analysis(std::span<const double> v) {
    const auto d = dct_matrix(v.size());
    const std::size_t S = v.size();
    std::vector<double> c(S, 0.0);
    for (std::size_t k = 0; k < S; ++k) {
        for (std::size_t n = 0; n < S; ++n) c[k] += d[k * S + n] * v[n];
    }
    return c;
}

std::vector<double> dct1_synthesis(std::span<const double> c) {
    const auto d = dct_matrix(c.size());
    const std::size_t S = c.size();
    std::vector<double> v(S, 0.0);
    for (std::size_t k = 0; k < S; ++k) {
        for (std::size_t n = 0; n < S; ++n) v[n] += d[k * S + n] * c[k];
    }
    return v;
}

SparsifyingTransform::SparsifyingTransform(CubeGeometry geometry, TransformSpec spec)
    : geometry_(std::move(geometry)), spec_(spec) {
    geometry_.validate();
    spec_.validate(geometry_.ny, geometry_.nx);
    dct_ = dct_matrix(geometry_.bands);
}

void SparsifyingTransform::apply(std::span<const double> alpha, std::span<double> x) const {
    require(alpha.size() == rows() && x.size() == rows(), Errc::DimensionMismatch,
            "coefficient/cube size mismatch");
    const std::size_t S = geometry_.bands;
    const std::size_t N = geometry_.pixels();
    // spectral: x_s = sum_k D[k][s] alpha_k, still in the wavelet domain
    std::vector<double> mixed(S * N, 0.0);
    for (std::size_t k = 0; k < S; ++k) {
        const double* a = alpha.data() + k * N;
        for (std::size_t s = 0; s < S; ++s) {
            const double w = dct_[k * S + s];
            double* out = mixed.data() + s * N;
            for (std::size_t i = 0; i < N; ++i) out[i] += w * a[i];
        }
    }
    for (std::size_t s = 0; s < S; ++s) {
        dwt2_synthesis(std::span<const double>(mixed).subspan(s * N, N), x.subspan(s * N, N),
                       geometry_.ny, geometry_.nx, spec_);
    }
}

void SparsifyingTransform::apply_adjoint(std::span<const double> x, std::span<double> alpha) const {
    require(alpha.size() == rows() && x.size() == rows(), Errc::DimensionMismatch,
            "coefficient/cube size mismatch");
    const std::size_t S = geometry_.bands;
    const std::size_t N = geometry_.pixels();
    std::vector<double> wav(S * N);
    for (std::size_t s = 0; s < S; ++s) {
        dwt2_analysis(x.subspan(s * N, N), std::span<double>(wav).subspan(s * N, N), geometry_.ny,
                      geometry_.nx, spec_);
    }
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t k = 0; k < S; ++k) {
        double* out = alpha.data() + k * N;
        for (std::size_t s = 0; s < S; ++s) {
            const double w = dct_[k * S + s];
            const double* in = wav.data() + s * N;
            for (std::size_t i = 0; i < N; ++i) out[i] += w * in[i];
        }
    }
}

SpectralCube SparsifyingTransform::synthesis(const SparseCoeffs& alpha) const {
    require(alpha.ny == geometry_.ny && alpha.nx == geometry_.nx && alpha.bands == geometry_.bands &&
                alpha.spec.wavelet == spec_.wavelet && alpha.spec.levels == spec_.levels,
            Errc::DimensionMismatch, "coefficient descriptor does not match the transform");
    std::vector<double> x(rows());
    apply(alpha.values, x);
    return make_cube(geometry_, std::move(x));
}

SparseCoeffs SparsifyingTransform::analysis(const SpectralCube& cube) const {
    const auto& g = cube.geometry();
    require(g.nx == geometry_.nx && g.ny == geometry_.ny && g.bands == geometry_.bands,
            Errc::DimensionMismatch, "cube geometry does not match the transform");
    SparseCoeffs a{g.ny, g.nx, g.bands, spec_, std::vector<double>(rows())};
    apply_adjoint(cube.data(), a.values);
    return a;
}

} // namespace chromacs
