#include "chromacs/optics.hpp"

#include <cmath>
#include <fstream>

#include "chromacs/detail/envelope.hpp"
#include "chromacs/errors.hpp"

namespace chromacs {

PsfModel parse_psf_model(const std::string& name) {
    if (name == "disc") return PsfModel::disc;
    if (name == "gaussian") return PsfModel::gaussian;
    fail(Errc::ConfigError, "unknown psf model '" + name + "'");
}

std::string to_string(PsfModel model) { return model == PsfModel::disc ? "disc" : "gaussian"; }

void OpticalPrescription::validate() const {
    require(f_ref_mm > 0, Errc::InvalidArgument, "f_ref_mm must be > 0");
    require(lambda_ref_nm > 0, Errc::NonPositiveWavelength, "lambda_ref_nm must be > 0");
    require(aperture_diameter_mm > 0, Errc::InvalidArgument, "aperture_diameter_mm must be > 0");
    require(cauchy_A > 1, Errc::InvalidArgument, "cauchy_A must be > 1");
    require(cauchy_B_um2 >= 0, Errc::InvalidArgument, "cauchy_B_um2 must be >= 0");
    require(!detector_offsets_mm.empty(), Errc::InvalidArgument, "need at least one detector offset");
    require(pixel_pitch_um > 0, Errc::InvalidArgument, "pixel_pitch_um must be > 0");
    require(object_distance_mm > 0, Errc::InvalidArgument, "object_distance_mm must be > 0");
    for (double d : detector_offsets_mm) {
        require(std::isfinite(d), Errc::NonFinite, "non-finite detector offset");
    }
}

double refractive_index(double lambda_nm, double cauchy_A, double cauchy_B_um2) {
    require(lambda_nm > 0, Errc::NonPositiveWavelength, "wavelength must be > 0");
    const double lambda_um = lambda_nm * 1e-3;
    return cauchy_A + cauchy_B_um2 / (lambda_um * lambda_um);
}

double focal_length_mm(double lambda_nm, const OpticalPrescription& p) {
    const double n_ref = refractive_index(p.lambda_ref_nm, p.cauchy_A, p.cauchy_B_um2);
    const double n = refractive_index(lambda_nm, p.cauchy_A, p.cauchy_B_um2);
    if (lambda_nm == p.lambda_ref_nm) return p.f_ref_mm;
    return p.f_ref_mm * (n_ref - 1.0) / (n - 1.0);
}

double image_distance_mm(double lambda_nm, const OpticalPrescription& p) {
    const double f = focal_length_mm(lambda_nm, p);
    if (std::isinf(p.object_distance_mm)) return f;
    require(p.object_distance_mm > f, Errc::VirtualImage,
            "object distance " + std::to_string(p.object_distance_mm) +
                " mm does not exceed focal length " + std::to_string(f) + " mm");
    return 1.0 / (1.0 / f - 1.0 / p.object_distance_mm);
}

double blur_radius_px(double lambda_nm, std::size_t k, const OpticalPrescription& p) {
    require(k < p.detector_offsets_mm.size(), Errc::OutOfBounds, "detector position out of range");
    const double detector = image_distance_mm(p.lambda_ref_nm, p) + p.detector_offsets_mm[k];
    const double focus = image_distance_mm(lambda_nm, p);
    const double diameter = p.aperture_diameter_mm * std::abs(detector - focus) / focus;
    return 0.5 * diameter / (p.pixel_pitch_um * 1e-3);
}

std::vector<double> synth_kernel(double radius_px, PsfModel model, std::size_t ny, std::size_t nx,
                                 std::size_t kernel_halfwidth) {
    require(radius_px >= 0 && std::isfinite(radius_px), Errc::InvalidArgument,
            "blur radius must be finite and >= 0");
    require(2 * kernel_halfwidth + 1 <= std::min(nx, ny), Errc::KernelTooLarge,
            "kernel window " + std::to_string(2 * kernel_halfwidth + 1) + " exceeds image " +
                std::to_string(ny) + "x" + std::to_string(nx));
    std::vector<double> k(ny * nx, 0.0);
    const std::size_t cm = ny / 2;
    const std::size_t cn = nx / 2;
    if (radius_px < 0.5) {
        k[cm * nx + cn] = 1.0;
        return k;
    }
    const auto hw = static_cast<long>(kernel_halfwidth);
    const double r2 = radius_px * radius_px;
    const double sigma = radius_px / 2.0;
    double total = 0.0;
    for (long dm = -hw; dm <= hw; ++dm) {
        for (long dn = -hw; dn <= hw; ++dn) {
            double v = 0.0;
            if (model == PsfModel::disc) {
                // area fraction from a 4x4 grid of sub-pixel centres
                int inside = 0;
                for (int i = 0; i < 4; ++i) {
                    for (int j = 0; j < 4; ++j) {
                        const double y = static_cast<double>(dm) + (i + 0.5) / 4.0 - 0.5;
                        const double x = static_cast<double>(dn) + (j + 0.5) / 4.0 - 0.5;
                        if (x * x + y * y <= r2) ++inside;
                    }
                }
                v = inside / 16.0;
            } else {
                const double d2 = static_cast<double>(dm * dm + dn * dn);
                v = std::exp(-d2 / (2.0 * sigma * sigma));
            }
            k[(cm + dm) * nx + (cn + dn)] = v;
            total += v;
        }
    }
    for (double& v : k) v /= total;
    return k;
}

std::span<const double> PsfStack::kernel(std::size_t k, std::size_t s) const {
    require(k < K && s < S, Errc::OutOfBounds, "kernel index out of range");
    const std::size_t n = geometry.pixels();
    return std::span<const double>(kernels).subspan((k * S + s) * n, n);
}

std::span<double> PsfStack::kernel(std::size_t k, std::size_t s) {
    require(k < K && s < S, Errc::OutOfBounds, "kernel index out of range");
    const std::size_t n = geometry.pixels();
    return std::span<double>(kernels).subspan((k * S + s) * n, n);
}

PsfStack build_psf_stack(const OpticalPrescription& p, const CubeGeometry& geometry) {
    p.validate();
    geometry.validate();
    PsfStack stack;
    stack.K = p.measurements();
    stack.S = geometry.bands;
    stack.geometry = geometry;
    stack.detector_offsets_mm = p.detector_offsets_mm;
    stack.kernels.reserve(stack.K * stack.S * geometry.pixels());
    for (std::size_t k = 0; k < stack.K; ++k) {
        for (std::size_t s = 0; s < stack.S; ++s) {
            const double r = blur_radius_px(geometry.wavelengths_nm[s], k, p);
            const auto kern = synth_kernel(r, p.psf_model, geometry.ny, geometry.nx, p.kernel_halfwidth);
            stack.kernels.insert(stack.kernels.end(), kern.begin(), kern.end());
        }
    }
    return stack;
}

std::size_t write_psf_stack(const PsfStack& stack, std::ostream& out,
                            const nlohmann::json& provenance) {
    nlohmann::json h = {{"K", stack.K},
                        {"S", stack.S},
                        {"nx", stack.geometry.nx},
                        {"ny", stack.geometry.ny},
                        {"wavelengths_nm", stack.geometry.wavelengths_nm},
                        {"detector_offsets_mm", stack.detector_offsets_mm}};
    if (!provenance.is_null()) h["provenance"] = provenance;
    std::size_t bytes = detail::write_envelope_header(out, "PSF1", h);
    bytes += detail::write_f32(out, stack.kernels);
    return bytes;
}

PsfReadResult read_psf_stack(std::istream& in) {
    constexpr double kTol = 1e-6;
    const auto h = detail::read_envelope_header(in, "PSF1");
    PsfReadResult result;
    PsfStack& st = result.stack;
    st.K = detail::header_size(h, "K");
    st.S = detail::header_size(h, "S");
    st.geometry.nx = detail::header_size(h, "nx");
    st.geometry.ny = detail::header_size(h, "ny");
    st.geometry.bands = st.S;
    st.geometry.wavelengths_nm = detail::header_reals(h, "wavelengths_nm");
    st.detector_offsets_mm = detail::header_reals(h, "detector_offsets_mm");
    try {
        st.geometry.validate();
    } catch (const Error& e) {
        fail(Errc::HeaderError, e.what());
    }
    require(st.K >= 1 && st.detector_offsets_mm.size() == st.K, Errc::HeaderError,
            "detector_offsets_mm length must equal K");
    st.kernels = detail::read_f32(in, st.K * st.S * st.geometry.pixels());

    for (std::size_t k = 0; k < st.K; ++k) {
        for (std::size_t s = 0; s < st.S; ++s) {
            auto kern = st.kernel(k, s);
            double sum = 0.0;
            bool clipped = false;
            for (double& v : kern) {
                require(std::isfinite(v), Errc::NonFinite, "kernel contains NaN/Inf");
                require(v >= -kTol, Errc::NormalizationError,
                        "kernel (" + std::to_string(k) + "," + std::to_string(s) + ") has negative entries");
                if (v < 0) {
                    v = 0;
                    clipped = true;
                }
                sum += v;
            }
            require(sum > 0, Errc::NormalizationError,
                    "kernel (" + std::to_string(k) + "," + std::to_string(s) + ") sums to " +
                        std::to_string(sum));
            if (std::abs(sum - 1.0) > kTol || clipped) {
                for (double& v : kern) v /= sum;
                result.warnings.push_back("kernel (" + std::to_string(k) + "," + std::to_string(s) +
                                          ") renormalized from sum " + std::to_string(sum));
            }
        }
    }
    return result;
}

void save_psf_stack(const PsfStack& stack, const std::string& path, const nlohmann::json& provenance) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), Errc::FormatError, "cannot open '" + path + "' for writing");
    write_psf_stack(stack, out, provenance);
}

PsfReadResult load_psf_stack(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), Errc::FormatError, "cannot open '" + path + "'");
    return read_psf_stack(in);
}

} // namespace chromacs
