#pragma once

// Thin-lens chromatic defocus model producing the per-band, per-detector-position
// blur kernels, plus the PSF1 container for externally computed kernels.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chromacs/cube.hpp"

namespace chromacs {

enum class PsfModel { disc, gaussian };

PsfModel parse_psf_model(const std::string& name);
std::string to_string(PsfModel model);

struct OpticalPrescription {
    double f_ref_mm = 50.0;
    double lambda_ref_nm = 550.0;
    double cauchy_A = 1.5046;
    double cauchy_B_um2 = 0.00420;
    double aperture_diameter_mm = 10.0;
    double object_distance_mm = std::numeric_limits<double>::infinity();
    std::vector<double> detector_offsets_mm{-0.25, 0.0, 0.25};
    double pixel_pitch_um = 10.0;
    PsfModel psf_model = PsfModel::disc;
    std::size_t kernel_halfwidth = 15;

    std::size_t measurements() const noexcept { return detector_offsets_mm.size(); }
    void validate() const;
};

/// Cauchy dispersion n = A + B / lambda_um^2.
double refractive_index(double lambda_nm, double cauchy_A, double cauchy_B_um2);

/// Lensmaker scaling calibrated so that f(lambda_ref) = f_ref.
double focal_length_mm(double lambda_nm, const OpticalPrescription& p);

/// Thin-lens image distance; VirtualImage when the object sits inside the focal length.
double image_distance_mm(double lambda_nm, const OpticalPrescription& p);

/// Geometric defocus blur radius in pixels on detector position k.
double blur_radius_px(double lambda_nm, std::size_t k, const OpticalPrescription& p);

/// Normalized ny x nx kernel centred at (ny/2, nx/2).
std::vector<double> synth_kernel(double radius_px, PsfModel model, std::size_t ny, std::size_t nx,
                                 std::size_t kernel_halfwidth);

struct PsfStack {
    std::size_t K = 0;
    std::size_t S = 0;
    CubeGeometry geometry;
    std::vector<double> detector_offsets_mm;
    std::vector<double> kernels;  // (k,s)-major, each ny*nx

    std::span<const double> kernel(std::size_t k, std::size_t s) const;
    std::span<double> kernel(std::size_t k, std::size_t s);
};

PsfStack build_psf_stack(const OpticalPrescription& p, const CubeGeometry& geometry);

std::size_t write_psf_stack(const PsfStack& stack, std::ostream& out,
                            const nlohmann::json& provenance = nullptr);

struct PsfReadResult {
    PsfStack stack;
    std::vector<std::string> warnings;
};

/// Kernels whose sum deviates from 1 by more than 1e-6 are renormalized (with a warning);
/// entries below -1e-6 or kernels summing to <= 0 raise NormalizationError.
PsfReadResult read_psf_stack(std::istream& in);

void save_psf_stack(const PsfStack& stack, const std::string& path,
                    const nlohmann::json& provenance = nullptr);
PsfReadResult load_psf_stack(const std::string& path);

} // namespace chromacs
