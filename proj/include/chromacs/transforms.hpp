#pragma once

// Orthonormal sparsifying basis: periodic 2D wavelet in space, DCT-II across bands.
// Convention: x = Psi(alpha); analysis is Psi^T = Psi^-1.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chromacs/cube.hpp"
#include "chromacs/linear_operator.hpp"

namespace chromacs {

enum class Wavelet { haar, db4 };

Wavelet parse_wavelet(const std::string& name);
std::string to_string(Wavelet w);

/// Lowpass reconstruction filter taps of the orthonormal wavelet.
std::span<const double> wavelet_filter(Wavelet w);

struct TransformSpec {
    Wavelet wavelet = Wavelet::haar;
    std::size_t levels = 1;

    /// BadDimensions unless levels >= 1 and 2^levels divides nx and ny.
    void validate(std::size_t ny, std::size_t nx) const;
};

/// min(4, log2 of the largest power of two dividing both nx and ny), at least 1.
std::size_t default_levels(std::size_t ny, std::size_t nx);

void dwt2_analysis(std::span<const double> plane, std::span<double> coeffs, std::size_t ny,
                   std::size_t nx, const TransformSpec& spec);
void dwt2_synthesis(std::span<const double> coeffs, std::span<double> plane, std::size_t ny,
                    std::size_t nx, const TransformSpec& spec);

std::vector<double> dwt2_analysis(std::span<const double> plane, std::size_t ny, std::size_t nx,
                                  const TransformSpec& spec);
std::vector<double> dwt2_synthesis(std::span<const double> coeffs, std::size_t ny, std::size_t nx,
                                   const TransformSpec& spec);

/// Orthonormal DCT-II and its transpose (DCT-III).
std::vector<double> dct1_analysis(std::span<const double> v);
std::vector<double> dct1_synthesis(std::span<const double> c);

/// Coefficient planes: plane j holds spectral frequency j, each in the Mallat wavelet layout.
struct SparseCoeffs {
    std::size_t ny = 0;
    std::size_t nx = 0;
    std::size_t bands = 0;
    TransformSpec spec;
    std::vector<double> values;  // bands*ny*nx
};

/// Psi as a linear operator: apply = synthesis, apply_adjoint = analysis.
class SparsifyingTransform final : public LinearOperator {
public:
    SparsifyingTransform(CubeGeometry geometry, TransformSpec spec);

    std::size_t rows() const override { return geometry_.size(); }
    std::size_t cols() const override { return geometry_.size(); }
    void apply(std::span<const double> alpha, std::span<double> x) const override;
    void apply_adjoint(std::span<const double> x, std::span<double> alpha) const override;
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

    SpectralCube synthesis(const SparseCoeffs& alpha) const;
    SparseCoeffs analysis(const SpectralCube& cube) const;

    const CubeGeometry& geometry() const noexcept { return geometry_; }
    const TransformSpec& spec() const noexcept { return spec_; }

private:
    CubeGeometry geometry_;
    TransformSpec spec_;
    std::vector<double> dct_;  // bands x bands, row k = basis vector k
};

} // namespace chromacs
