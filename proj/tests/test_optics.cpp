#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "chromacs/errors.hpp"
#include "chromacs/optics.hpp"
#include "helpers.hpp"

using namespace chromacs;
using chromacs::testing::geometry;

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected chromacs::Error");
    return Errc::InvalidArgument;
}

} // namespace

TEST_CASE("refractive index follows Cauchy dispersion") {
    // reference values evaluated independently in double precision
    CHECK(refractive_index(550.0, 1.5046, 0.00420) == doctest::Approx(1.5184842975206612).epsilon(1e-14));
    CHECK(refractive_index(420.0, 1.5046, 0.00420) == doctest::Approx(1.5284095238095237).epsilon(1e-14));
    for (double l : {380.0, 512.5, 1000.0}) CHECK(refractive_index(l, 1.7, 0.0) == 1.7);
    CHECK(code_of([] { refractive_index(0.0, 1.5, 0.004); }) == Errc::NonPositiveWavelength);
    CHECK(code_of([] { refractive_index(-5.0, 1.5, 0.004); }) == Errc::NonPositiveWavelength);
}

TEST_CASE("focal length scales with the lensmaker factor") {
    const OpticalPrescription p;
    CHECK(focal_length_mm(550.0, p) == 50.0);
    CHECK(focal_length_mm(420.0, p) == doctest::Approx(49.06083957218377).epsilon(1e-13));
    CHECK(focal_length_mm(700.0, p) == doctest::Approx(50.51765050170686).epsilon(1e-13));
    CHECK(focal_length_mm(420.0, p) < focal_length_mm(550.0, p));
    CHECK(focal_length_mm(550.0, p) < focal_length_mm(700.0, p));

    OpticalPrescription flat;
    flat.cauchy_B_um2 = 0.0;
    for (double l : {420.0, 480.0, 700.0}) CHECK(focal_length_mm(l, flat) == doctest::Approx(50.0).epsilon(1e-15));
}

TEST_CASE("thin-lens image distance") {
    OpticalPrescription p;
    CHECK(image_distance_mm(600.0, p) == focal_length_mm(600.0, p));
    p.object_distance_mm = 200.0;
    CHECK(image_distance_mm(550.0, p) == doctest::Approx(200.0 / 3.0).epsilon(1e-14));
    p.object_distance_mm = 40.0;
    CHECK(code_of([&] { image_distance_mm(550.0, p); }) == Errc::VirtualImage);
}

TEST_CASE("geometric blur radius") {
    OpticalPrescription p;
    p.detector_offsets_mm = {0.0, 0.5};
    CHECK(blur_radius_px(550.0, 0, p) == 0.0);
    CHECK(blur_radius_px(550.0, 1, p) == doctest::Approx(5.0).epsilon(1e-12));

    const double r = blur_radius_px(450.0, 1, p);
    p.aperture_diameter_mm *= 2.0;
    CHECK(blur_radius_px(450.0, 1, p) == doctest::Approx(2.0 * r).epsilon(1e-14));

    // independent evaluation of the distance formulas
    const OpticalPrescription d;
    for (std::size_t k = 0; k < 3; ++k) {
        for (double l : {420.0, 500.0, 610.0, 700.0}) {
            const double n = 1.5046 + 0.0042 / ((l / 1000.0) * (l / 1000.0));
            const double nref = 1.5046 + 0.0042 / (0.55 * 0.55);
            const double fi = 50.0 * (nref - 1.0) / (n - 1.0);
            const double dk = 50.0 + d.detector_offsets_mm[k];
            CHECK(blur_radius_px(l, k, d) == doctest::Approx(0.5 * 10.0 * std::abs(dk - fi) / fi / 0.01).epsilon(1e-12));
        }
    }
}

TEST_CASE("synth_kernel") {
    SUBCASE("sub-pixel radius gives a centred delta") {
        const auto h = synth_kernel(0.2, PsfModel::disc, 9, 8, 3);
        CHECK(h[4 * 8 + 4] == 1.0);
        CHECK(sum(h) == 1.0);
    }
    SUBCASE("nonnegative and unit sum") {
        for (auto model : {PsfModel::disc, PsfModel::gaussian}) {
            for (double r : {0.0, 0.49, 0.5, 1.3, 2.7, 5.0, 7.9, 14.0, 40.0}) {
                const auto h = synth_kernel(r, model, 32, 32, 15);
                CHECK(std::abs(sum(h) - 1.0) <= 1e-9);
                for (double v : h) CHECK(v >= 0.0);
            }
        }
    }
    SUBCASE("gaussian is radially decreasing") {
        const auto h = synth_kernel(4.0, PsfModel::gaussian, 32, 32, 15);
        const double c = h[16 * 32 + 16];
        CHECK(c > h[16 * 32 + 18]);
        CHECK(h[16 * 32 + 18] > h[16 * 32 + 20]);
        CHECK(h[18 * 32 + 16] / c == doctest::Approx(std::exp(-4.0 / 8.0)).epsilon(1e-12));
    }
    SUBCASE("disc support is truncated to the window") {
        const auto h = synth_kernel(3.0, PsfModel::disc, 16, 16, 5);
        CHECK(h[8 * 16 + 8] > 0.0);
        CHECK(h[8 * 16 + 12] == 0.0);  // outside the radius
        for (std::size_t m = 0; m < 16; ++m)
            for (std::size_t n = 0; n < 16; ++n)
                if (std::abs(int(m) - 8) > 5 || std::abs(int(n) - 8) > 5) CHECK(h[m * 16 + n] == 0.0);
    }
    CHECK(code_of([] { synth_kernel(1.0, PsfModel::disc, 10, 12, 5); }) == Errc::KernelTooLarge);
}

TEST_CASE("build_psf_stack") {
    const OpticalPrescription p;
    const auto g = geometry(32, 32, 29);
    const auto stack = build_psf_stack(p, g);
    CHECK(stack.K == 3);
    CHECK(stack.S == 29);
    CHECK(stack.kernels.size() == 87 * g.pixels());
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t s = 0; s < 29; ++s) CHECK(std::abs(sum(stack.kernel(k, s)) - 1.0) <= 1e-9);
    }
    // the reference band is in focus at the middle detector position
    const auto in_focus = stack.kernel(1, 13);
    CHECK(g.wavelengths_nm[13] == doctest::Approx(550.0));
    CHECK(in_focus[16 * 32 + 16] == 1.0);

    OpticalPrescription flat;
    flat.cauchy_B_um2 = 0.0;
    flat.detector_offsets_mm = {0.0, 0.0};
    flat.kernel_halfwidth = 5;
    const auto deltas = build_psf_stack(flat, geometry(16, 16, 4));
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t s = 0; s < 4; ++s) CHECK(deltas.kernel(k, s)[8 * 16 + 8] == 1.0);
}

TEST_CASE("PSF1 roundtrip and validation") {
    OpticalPrescription flat;
    flat.cauchy_B_um2 = 0.0;
    flat.kernel_halfwidth = 2;
    const auto stack = build_psf_stack(flat, geometry(6, 6, 2));
    std::stringstream buf;
    write_psf_stack(stack, buf);
    const std::string bytes = buf.str();
    CHECK(bytes.rfind("PSF1\n", 0) == 0);
    const auto back = read_psf_stack(buf);
    CHECK(back.warnings.empty());
    auto rounded = stack.kernels;
    for (double& v : rounded) v = static_cast<float>(v);
    CHECK(back.stack.kernels == rounded);
    CHECK(back.stack.detector_offsets_mm == stack.detector_offsets_mm);
    CHECK(back.stack.geometry.wavelengths_nm == stack.geometry.wavelengths_nm);

    SUBCASE("kernel summing to zero") {
        auto bad = stack;
        std::fill(bad.kernel(1, 0).begin(), bad.kernel(1, 0).end(), 0.0);
        std::stringstream b;
        write_psf_stack(bad, b);
        CHECK(code_of([&] { read_psf_stack(b); }) == Errc::NormalizationError);
    }
    SUBCASE("slightly off normalization is renormalized") {
        auto off = stack;
        off.kernel(0, 1)[3 * 6 + 3] = 1.00001;
        std::stringstream b;
        write_psf_stack(off, b);
        const auto r = read_psf_stack(b);
        CHECK(r.warnings.size() == 1);
        CHECK(std::abs(sum(r.stack.kernel(0, 1)) - 1.0) <= 1e-9);
    }
    SUBCASE("negative entries") {
        auto neg = stack;
        neg.kernel(0, 0)[0] = -0.5;
        neg.kernel(0, 0)[3 * 6 + 3] = 1.5;
        std::stringstream b;
        write_psf_stack(neg, b);
        CHECK(code_of([&] { read_psf_stack(b); }) == Errc::NormalizationError);
    }
    SUBCASE("bad magic") {
        std::stringstream b("PSF2" + bytes.substr(4));
        CHECK(code_of([&] { read_psf_stack(b); }) == Errc::FormatError);
    }
}

TEST_CASE("prescription validation") {
    OpticalPrescription p;
    p.detector_offsets_mm.clear();
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.cauchy_A = 1.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.aperture_diameter_mm = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK(parse_psf_model("gaussian") == PsfModel::gaussian);
    CHECK_THROWS_AS(parse_psf_model("airy"), Error);
}
