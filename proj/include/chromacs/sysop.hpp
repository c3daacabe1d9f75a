#pragma once

// Matrix-free coded, chromatically blurred snapshot model
//   y_k = sum_s conv(x_s .* c_k, h_{s,k}),   k = 0..K-1
// with periodic boundaries, its exact adjoint, and a dense oracle.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chromacs/coding.hpp"
#include "chromacs/cube.hpp"
#include "chromacs/detail/fft.hpp"
#include "chromacs/linear_operator.hpp"
#include "chromacs/optics.hpp"

namespace chromacs {

struct MeasurementProvenance {
    std::string mask_id;
    std::string psf_id;
    std::uint64_t seed = 0;

    bool operator==(const MeasurementProvenance&) const = default;
};

struct MeasurementSet {
    std::size_t K = 0;
    std::size_t ny = 0;
    std::size_t nx = 0;
    std::vector<double> data;  // K*ny*nx
    MeasurementProvenance provenance;

    std::span<const double> plane(std::size_t k) const;
};

/// Periodic convolution of `img` with a kernel centred at (ny/2, nx/2).
std::vector<double> conv2_periodic(std::span<const double> img, std::span<const double> kernel,
                                   std::size_t ny, std::size_t nx);

/// Periodic correlation, i.e. convolution with the spatially reversed kernel.
std::vector<double> corr2_periodic(std::span<const double> img, std::span<const double> kernel,
                                   std::size_t ny, std::size_t nx);

/// Moves the kernel centre (ny/2, nx/2) to index (0,0).
std::vector<double> center_to_origin(std::span<const double> kernel, std::size_t ny, std::size_t nx);

struct SystemOptions {
    std::size_t threads = 1;  // 0 = hardware concurrency
    /// Debug mutation: the adjoint uses the unreversed kernels. Breaks the adjoint on purpose.
    bool corrupt_adjoint = false;
};

/// H*C as a linear map from S*N cube vectors (band-major) to K*N measurement vectors.
class SystemOperator final : public LinearOperator {
public:
    SystemOperator(MaskSet masks, PsfStack psfs, SystemOptions options = {});

    std::size_t rows() const override { return K_ * N_; }
    std::size_t cols() const override { return S_ * N_; }

    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override;
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

    MeasurementSet forward_apply(const SpectralCube& cube) const;
    /// Returns the adjoint volume as a cube on the PSF geometry.
    SpectralCube adjoint_apply(const MeasurementSet& y) const;

    const MaskSet& masks() const noexcept { return masks_; }
    const PsfStack& psfs() const noexcept { return psfs_; }
    const CubeGeometry& geometry() const noexcept { return psfs_.geometry; }
    std::size_t K() const noexcept { return K_; }
    std::size_t S() const noexcept { return S_; }
    std::size_t N() const noexcept { return N_; }

    /// DFT of the origin-centred kernel (k,s).
    std::span<const std::complex<double>> kernel_spectrum(std::size_t k, std::size_t s) const;

private:
    MaskSet masks_;
    PsfStack psfs_;
    SystemOptions options_;
    std::size_t K_;
    std::size_t S_;
    std::size_t N_;
    std::unique_ptr<detail::RealFft2d> fft_;
    std::vector<std::complex<double>> spectra_;  // (k,s)-major
};

/// Approximate inverse of H C C^T H^T for preconditioning the projection solves.
/// C C^T is replaced by its pixel average rho_kk' = mean(c_k c_k'), which makes the
/// approximation block-diagonal in frequency: one regularized K x K inverse per
/// frequency. Symmetric positive definite for `regularization` > 0.
class NormalPreconditioner final : public LinearOperator {
public:
    explicit NormalPreconditioner(const SystemOperator& op, double regularization = 1e-3);

    std::size_t rows() const override { return K_ * N_; }
    std::size_t cols() const override { return K_ * N_; }
    void apply(std::span<const double> r, std::span<double> z) const override;
    void apply_adjoint(std::span<const double> r, std::span<double> z) const override { apply(r, z); }
    using LinearOperator::apply;

private:
    std::size_t K_;
    std::size_t N_;
    std::unique_ptr<detail::RealFft2d> fft_;
    std::vector<std::complex<double>> inverses_;  // per frequency, K x K row-major
};

/// Explicit KN x SN matrix of H*C; TooLarge unless N*S <= 4096.
DenseOperator build_dense(const SystemOperator& op);

/// A = H*C*Psi with Psi given as a synthesis operator.
std::shared_ptr<LinearOperator> compose_with_synthesis(std::shared_ptr<const LinearOperator> op,
                                                       std::shared_ptr<const LinearOperator> synthesis);

/// Additive white Gaussian noise; sigma = 0 leaves y untouched.
void add_gaussian_noise(MeasurementSet& y, double sigma, std::uint64_t seed);

std::size_t write_measurements(const MeasurementSet& y, std::ostream& out,
                               const nlohmann::json& extra_provenance = nullptr);
MeasurementSet read_measurements(std::istream& in);
void save_measurements(const MeasurementSet& y, const std::string& path,
                       const nlohmann::json& extra_provenance = nullptr);
MeasurementSet load_measurements(const std::string& path);

} // namespace chromacs
