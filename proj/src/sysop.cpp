#include "chromacs/sysop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "chromacs/detail/envelope.hpp"
#include "chromacs/detail/parallel.hpp"
#include "chromacs/errors.hpp"

namespace chromacs {

using cplx = std::complex<double>;

std::span<const double> MeasurementSet::plane(std::size_t k) const {
    require(k < K, Errc::OutOfBounds, "measurement index out of range");
    return std::span<const double>(data).subspan(k * ny * nx, ny * nx);
}

std::vector<double> center_to_origin(std::span<const double> kernel, std::size_t ny, std::size_t nx) {
    require(kernel.size() == ny * nx, Errc::DimensionMismatch, "kernel shape mismatch");
    const std::size_t cm = ny / 2;
    const std::size_t cn = nx / 2;
    std::vector<double> out(ny * nx);
    for (std::size_t m = 0; m < ny; ++m) {
        const std::size_t mo = (m + ny - cm) % ny;
        for (std::size_t n = 0; n < nx; ++n) {
            out[mo * nx + (n + nx - cn) % nx] = kernel[m * nx + n];
        }
    }
    return out;
}

namespace {

std::vector<double> filter_periodic(std::span<const double> img, std::span<const double> kernel,
                                    std::size_t ny, std::size_t nx, bool correlate) {
    require(img.size() == ny * nx && kernel.size() == ny * nx, Errc::DimensionMismatch,
            "image and kernel shapes differ");
    detail::RealFft2d fft(ny, nx);
    std::vector<cplx> a(fft.spectrum_size());
    std::vector<cplx> b(fft.spectrum_size());
    fft.forward(img, a);
    fft.forward(center_to_origin(kernel, ny, nx), b);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= correlate ? std::conj(b[i]) : b[i];
    std::vector<double> out(ny * nx);
    fft.inverse(a, b, out);
    return out;
}

} // namespace

std::vector<double> conv2_periodic(std::span<const double> img, std::span<const double> kernel,
                                   std::size_t ny, std::size_t nx) {
    return filter_periodic(img, kernel, ny, nx, false);
}

std::vector<double> corr2_periodic(std::span<const double> img, std::span<const double> kernel,
                                   std::size_t ny, std::size_t nx) {
    return filter_periodic(img, kernel, ny, nx, true);
}

SystemOperator::SystemOperator(MaskSet masks, PsfStack psfs, SystemOptions options)
    : masks_(std::move(masks)), psfs_(std::move(psfs)), options_(options) {
    require(masks_.K == psfs_.K, Errc::DimensionMismatch,
            "mask count " + std::to_string(masks_.K) + " != PSF measurement count " +
                std::to_string(psfs_.K));
    require(masks_.ny == psfs_.geometry.ny && masks_.nx == psfs_.geometry.nx, Errc::DimensionMismatch,
            "mask shape does not match PSF shape");
    require(psfs_.S == psfs_.geometry.bands, Errc::DimensionMismatch, "PSF band count mismatch");
    require(masks_.masks.size() == masks_.K * masks_.ny * masks_.nx &&
                psfs_.kernels.size() == psfs_.K * psfs_.S * psfs_.geometry.pixels(),
            Errc::DimensionMismatch, "inconsistent storage sizes");
    K_ = masks_.K;
    S_ = psfs_.S;
    N_ = psfs_.geometry.pixels();
    fft_ = std::make_unique<detail::RealFft2d>(psfs_.geometry.ny, psfs_.geometry.nx);
    const std::size_t F = fft_->spectrum_size();
    spectra_.resize(K_ * S_ * F);
    for (std::size_t k = 0; k < K_; ++k) {
        for (std::size_t s = 0; s < S_; ++s) {
            const auto shifted = center_to_origin(psfs_.kernel(k, s), psfs_.geometry.ny, psfs_.geometry.nx);
            fft_->forward(shifted, std::span<cplx>(spectra_).subspan((k * S_ + s) * F, F));
        }
    }
}

std::span<const cplx> SystemOperator::kernel_spectrum(std::size_t k, std::size_t s) const {
    require(k < K_ && s < S_, Errc::OutOfBounds, "kernel index out of range");
    const std::size_t F = fft_->spectrum_size();
    return std::span<const cplx>(spectra_).subspan((k * S_ + s) * F, F);
}

void SystemOperator::apply(std::span<const double> x, std::span<double> y) const {
    require(x.size() == cols() && y.size() == rows(), Errc::DimensionMismatch,
            "forward operand sizes do not match the system");
    const std::size_t F = fft_->spectrum_size();
    detail::parallel_for(K_, options_.threads, [&](std::size_t k) {
        std::vector<double> coded(N_);
        std::vector<cplx> spec(F), acc(F, cplx{}), scratch(F);
        const auto mask = masks_.mask(k);
        for (std::size_t s = 0; s < S_; ++s) {
            const double* xs = x.data() + s * N_;
            for (std::size_t i = 0; i < N_; ++i) coded[i] = mask[i] ? xs[i] : 0.0;
            fft_->forward(coded, spec);
            const auto h = kernel_spectrum(k, s);
            for (std::size_t f = 0; f < F; ++f) acc[f] += spec[f] * h[f];
        }
        fft_->inverse(acc, scratch, y.subspan(k * N_, N_));
    });
}

void SystemOperator::apply_adjoint(std::span<const double> y, std::span<double> x) const {
    require(y.size() == rows() && x.size() == cols(), Errc::DimensionMismatch,
            "adjoint operand sizes do not match the system");
    const std::size_t F = fft_->spectrum_size();
    std::vector<cplx> yspec(K_ * F);
    for (std::size_t k = 0; k < K_; ++k) {
        fft_->forward(y.subspan(k * N_, N_), std::span<cplx>(yspec).subspan(k * F, F));
    }
    detail::parallel_for(S_, options_.threads, [&](std::size_t s) {
        std::vector<cplx> prod(F), scratch(F);
        std::vector<double> back(N_);
        auto xs = x.subspan(s * N_, N_);
        std::fill(xs.begin(), xs.end(), 0.0);
        for (std::size_t k = 0; k < K_; ++k) {
            const auto h = kernel_spectrum(k, s);
            const cplx* yk = yspec.data() + k * F;
            if (options_.corrupt_adjoint) {
                for (std::size_t f = 0; f < F; ++f) prod[f] = yk[f] * h[f];
            } else {
                for (std::size_t f = 0; f < F; ++f) prod[f] = yk[f] * std::conj(h[f]);
            }
            fft_->inverse(prod, scratch, back);
            const auto mask = masks_.mask(k);
            for (std::size_t i = 0; i < N_; ++i) {
                if (mask[i]) xs[i] += back[i];
            }
        }
    });
}

MeasurementSet SystemOperator::forward_apply(const SpectralCube& cube) const {
    const auto& g = cube.geometry();
    require(g.nx == geometry().nx && g.ny == geometry().ny && g.bands == S_, Errc::DimensionMismatch,
            "cube geometry does not match the system");
    MeasurementSet y;
    y.K = K_;
    y.ny = g.ny;
    y.nx = g.nx;
    y.data.resize(rows());
    apply(cube.data(), y.data);
    return y;
}

SpectralCube SystemOperator::adjoint_apply(const MeasurementSet& y) const {
    require(y.K == K_ && y.ny == geometry().ny && y.nx == geometry().nx, Errc::DimensionMismatch,
            "measurement shape does not match the system");
    std::vector<double> v(cols());
    apply_adjoint(y.data, v);
    return make_cube(geometry(), std::move(v));
}

NormalPreconditioner::NormalPreconditioner(const SystemOperator& op, double regularization)
    : K_(op.K()), N_(op.N()) {
    require(regularization > 0, Errc::InvalidArgument, "preconditioner regularization must be > 0");
    const auto& g = op.geometry();
    fft_ = std::make_unique<detail::RealFft2d>(g.ny, g.nx);
    const std::size_t F = fft_->spectrum_size();
    const std::size_t K = K_;

    Eigen::MatrixXd rho(K, K);
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = 0; b < K; ++b) {
            const auto ma = op.masks().mask(a);
            const auto mb = op.masks().mask(b);
            std::size_t both = 0;
            for (std::size_t i = 0; i < N_; ++i) both += (ma[i] & mb[i]);
            rho(a, b) = static_cast<double>(both) / static_cast<double>(N_);
        }
    }

    std::vector<Eigen::MatrixXcd> blocks(F, Eigen::MatrixXcd::Zero(K, K));
    double peak = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
        auto& M = blocks[f];
        for (std::size_t s = 0; s < op.S(); ++s) {
            for (std::size_t a = 0; a < K; ++a) {
                const cplx ha = op.kernel_spectrum(a, s)[f];
                for (std::size_t b = 0; b < K; ++b) {
                    M(a, b) += rho(a, b) * ha * std::conj(op.kernel_spectrum(b, s)[f]);
                }
            }
        }
        peak = std::max(peak, M.trace().real() / static_cast<double>(K));
    }
    const double tau = regularization * (peak > 0 ? peak : 1.0);
    inverses_.resize(F * K * K);
    for (std::size_t f = 0; f < F; ++f) {
        Eigen::MatrixXcd M = blocks[f] + tau * Eigen::MatrixXcd::Identity(K, K);
        Eigen::MatrixXcd inv = M.ldlt().solve(Eigen::MatrixXcd::Identity(K, K));
        for (std::size_t a = 0; a < K; ++a) {
            for (std::size_t b = 0; b < K; ++b) inverses_[(f * K + a) * K + b] = inv(a, b);
        }
    }
}

void NormalPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    require(r.size() == rows() && z.size() == rows(), Errc::DimensionMismatch,
            "preconditioner operand sizes do not match");
    const std::size_t F = fft_->spectrum_size();
    const std::size_t K = K_;
    std::vector<cplx> in(K * F), out(K * F, cplx{}), scratch(F);
    for (std::size_t k = 0; k < K; ++k) {
        fft_->forward(r.subspan(k * N_, N_), std::span<cplx>(in).subspan(k * F, F));
    }
    for (std::size_t f = 0; f < F; ++f) {
        const cplx* inv = inverses_.data() + f * K * K;
        for (std::size_t a = 0; a < K; ++a) {
            cplx acc{};
            for (std::size_t b = 0; b < K; ++b) acc += inv[a * K + b] * in[b * F + f];
            out[a * F + f] = acc;
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        fft_->inverse(std::span<const cplx>(out).subspan(k * F, F), scratch, z.subspan(k * N_, N_));
    }
}

DenseOperator build_dense(const SystemOperator& op) {
    require(op.N() * op.S() <= 4096, Errc::TooLarge,
            "N*S = " + std::to_string(op.N() * op.S()) + " exceeds 4096");
    return to_dense(op);
}

std::shared_ptr<LinearOperator> compose_with_synthesis(std::shared_ptr<const LinearOperator> op,
                                                       std::shared_ptr<const LinearOperator> synthesis) {
    return std::make_shared<ComposedOperator>(std::move(op), std::move(synthesis));
}

void add_gaussian_noise(MeasurementSet& y, double sigma, std::uint64_t seed) {
    require(sigma >= 0 && std::isfinite(sigma), Errc::InvalidArgument, "noise sigma must be >= 0");
    if (sigma == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : y.data) v += noise(rng);
}

std::size_t write_measurements(const MeasurementSet& y, std::ostream& out,
                               const nlohmann::json& extra_provenance) {
    nlohmann::json prov = {{"mask_id", y.provenance.mask_id},
                           {"psf_id", y.provenance.psf_id},
                           {"seed", y.provenance.seed}};
    if (extra_provenance.is_object()) prov.update(extra_provenance);
    nlohmann::json h = {{"K", y.K}, {"nx", y.nx}, {"ny", y.ny}, {"provenance", prov}};
    std::size_t bytes = detail::write_envelope_header(out, "MEA1", h);
    bytes += detail::write_f32(out, y.data);
    return bytes;
}

MeasurementSet read_measurements(std::istream& in) {
    const auto h = detail::read_envelope_header(in, "MEA1");
    MeasurementSet y;
    y.K = detail::header_size(h, "K");
    y.nx = detail::header_size(h, "nx");
    y.ny = detail::header_size(h, "ny");
    require(y.K >= 1 && y.nx >= 1 && y.ny >= 1, Errc::HeaderError, "measurement dimensions must be >= 1");
    if (auto it = h.find("provenance"); it != h.end() && it->is_object()) {
        y.provenance.mask_id = it->value("mask_id", "");
        y.provenance.psf_id = it->value("psf_id", "");
        y.provenance.seed = it->value("seed", std::uint64_t{0});
    }
    y.data = detail::read_f32(in, y.K * y.ny * y.nx);
    for (double v : y.data) require(std::isfinite(v), Errc::NonFinite, "measurement contains NaN/Inf");
    return y;
}

void save_measurements(const MeasurementSet& y, const std::string& path,
                       const nlohmann::json& extra_provenance) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), Errc::FormatError, "cannot open '" + path + "' for writing");
    write_measurements(y, out, extra_provenance);
}

MeasurementSet load_measurements(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), Errc::FormatError, "cannot open '" + path + "'");
    return read_measurements(in);
}

} // namespace chromacs
