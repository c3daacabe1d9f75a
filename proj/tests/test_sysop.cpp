#include <doctest.h>

#include <sstream>

#include "chromacs/errors.hpp"
#include "chromacs/sysop.hpp"
#include "chromacs/transforms.hpp"
#include "helpers.hpp"

using namespace chromacs;
using chromacs::testing::geometry;
using chromacs::testing::max_abs_diff;
using chromacs::testing::random_cube;
using chromacs::testing::random_vector;

namespace {

// Direct O(N^2) circular convolution with a kernel centred at (ny/2, nx/2).
std::vector<double> brute_conv(const std::vector<double>& img, const std::vector<double>& h, std::size_t ny,
                               std::size_t nx) {
    std::vector<double> out(ny * nx, 0.0);
    for (std::size_t pm = 0; pm < ny; ++pm)
        for (std::size_t pn = 0; pn < nx; ++pn)
            for (std::size_t qm = 0; qm < ny; ++qm)
                for (std::size_t qn = 0; qn < nx; ++qn) {
                    const std::size_t hm = (pm + ny - qm + ny / 2) % ny;
                    const std::size_t hn = (pn + nx - qn + nx / 2) % nx;
                    out[pm * nx + pn] += img[qm * nx + qn] * h[hm * nx + hn];
                }
    return out;
}

PsfStack stack_from(std::size_t K, const CubeGeometry& g, auto&& kernel_fn) {
    PsfStack st;
    st.K = K;
    st.S = g.bands;
    st.geometry = g;
    st.detector_offsets_mm.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t s = 0; s < g.bands; ++s) {
            const std::vector<double> h = kernel_fn(k, s);
            st.kernels.insert(st.kernels.end(), h.begin(), h.end());
        }
    return st;
}

std::vector<double> delta(const CubeGeometry& g, std::size_t dm = 0, std::size_t dn = 0) {
    std::vector<double> h(g.pixels(), 0.0);
    h[((g.ny / 2 + dm) % g.ny) * g.nx + (g.nx / 2 + dn) % g.nx] = 1.0;
    return h;
}

std::vector<double> random_kernel(const CubeGeometry& g, std::uint64_t seed) {
    auto h = random_vector(g.pixels(), seed, 0.0, 1.0);
    double s = 0.0;
    for (double v : h) s += v;
    for (double& v : h) v /= s;
    return h;
}

MaskSet ones(std::size_t K, const CubeGeometry& g) { return gen_masks(K, g.ny, g.nx, 1.0, 0); }

SystemOperator random_system(std::size_t K, const CubeGeometry& g, std::uint64_t seed) {
    return SystemOperator(gen_masks(K, g.ny, g.nx, 0.5, seed),
                          stack_from(K, g, [&](std::size_t k, std::size_t s) { return random_kernel(g, seed * 100 + k * 10 + s); }));
}

} // namespace

TEST_CASE("conv2_periodic") {
    const std::size_t ny = 6, nx = 6;
    const auto g = geometry(ny, nx, 1);
    const auto img = random_vector(ny * nx, 1);
    CHECK(max_abs_diff(conv2_periodic(img, delta(g), ny, nx), img) < 1e-15);

    const auto shifted = conv2_periodic(img, delta(g, 1, 0), ny, nx);
    for (std::size_t m = 0; m < ny; ++m)
        for (std::size_t n = 0; n < nx; ++n)
            CHECK(shifted[m * nx + n] == doctest::Approx(img[((m + ny - 1) % ny) * nx + n]).epsilon(1e-14));

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto a = random_vector(ny * nx, 10 + seed);
        const auto h = random_vector(ny * nx, 20 + seed);
        CHECK(max_abs_diff(conv2_periodic(a, h, ny, nx), brute_conv(a, h, ny, nx)) <= 1e-12);
    }
    // odd, non-square shape
    const auto a = random_vector(5 * 7, 3);
    const auto h = random_vector(5 * 7, 4);
    CHECK(max_abs_diff(conv2_periodic(a, h, 5, 7), brute_conv(a, h, 5, 7)) <= 1e-12);
    CHECK_THROWS_AS(conv2_periodic(a, std::vector<double>(34), 5, 7), Error);
}

TEST_CASE("corr2_periodic is convolution with the reversed kernel") {
    const std::size_t ny = 6, nx = 5;
    const auto a = random_vector(ny * nx, 7);
    const auto h = random_vector(ny * nx, 8);
    std::vector<double> rev(ny * nx);
    for (std::size_t m = 0; m < ny; ++m)
        for (std::size_t n = 0; n < nx; ++n) {
            // reflect about the centre pixel
            const std::size_t rm = (2 * (ny / 2) + ny - m) % ny;
            const std::size_t rn = (2 * (nx / 2) + nx - n) % nx;
            rev[rm * nx + rn] = h[m * nx + n];
        }
    CHECK(max_abs_diff(corr2_periodic(a, h, ny, nx), brute_conv(a, rev, ny, nx)) <= 1e-12);
}

TEST_CASE("forward and adjoint on degenerate systems") {
    const auto g = geometry(5, 6, 3);
    const SystemOperator op(ones(2, g), stack_from(2, g, [&](auto, auto) { return delta(g); }));
    const auto x = random_cube(g, 3);
    const auto y = op.forward_apply(x);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t p = 0; p < g.pixels(); ++p)
            CHECK(y.plane(k)[p] == doctest::Approx(x.data()[p] + x.data()[30 + p] + x.data()[60 + p]).epsilon(1e-14));

    const auto v = op.adjoint_apply(y);
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t p = 0; p < g.pixels(); ++p)
            CHECK(v.plane(s)[p] == doctest::Approx(y.plane(0)[p] + y.plane(1)[p]).epsilon(1e-14));

    const auto zero = op.forward_apply(make_cube(g, std::vector<double>(g.size(), 0.0)));
    for (double val : zero.data) CHECK(val == 0.0);
    MeasurementSet yz{2, 5, 6, std::vector<double>(60, 0.0), {}};
    const auto vz = op.adjoint_apply(yz);
    for (double val : vz.data()) CHECK(val == 0.0);
}

TEST_CASE("forward model matches brute-force mask, convolve and sum") {
    const auto g = geometry(6, 5, 3);
    const auto op = random_system(2, g, 4);
    const auto x = random_cube(g, 9);
    const auto y = op.forward_apply(x);
    for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> ref(g.pixels(), 0.0);
        for (std::size_t s = 0; s < 3; ++s) {
            std::vector<double> coded(x.plane(s).begin(), x.plane(s).end());
            for (std::size_t p = 0; p < g.pixels(); ++p) coded[p] *= op.masks().mask(k)[p];
            const auto h = op.psfs().kernel(k, s);
            const auto c = brute_conv(coded, std::vector<double>(h.begin(), h.end()), g.ny, g.nx);
            for (std::size_t p = 0; p < g.pixels(); ++p) ref[p] += c[p];
        }
        CHECK(max_abs_diff(y.plane(k), ref) <= 1e-12);
    }
}

TEST_CASE("adjoint dot test") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = geometry(4 + seed % 5, 3 + seed % 7, 1 + seed % 4);
        const auto op = random_system(1 + seed % 3, g, seed);
        const auto x = random_vector(op.cols(), seed * 7);
        const auto u = random_vector(op.rows(), seed * 13);
        const double lhs = dot(op.apply(x), u);
        const double rhs = dot(x, op.apply_adjoint(u));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * norm2(x) * norm2(u));
    }
}

TEST_CASE("build_dense") {
    SUBCASE("delta PSF and ones mask give the identity") {
        const auto g = geometry(3, 4, 1);
        const auto d = build_dense(SystemOperator(ones(1, g), stack_from(1, g, [&](auto, auto) { return delta(g); })));
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 12; ++j) CHECK(d(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    }
    SUBCASE("shifted delta gives a circular shift permutation") {
        const auto g = geometry(3, 4, 1);
        const auto d = build_dense(SystemOperator(ones(1, g), stack_from(1, g, [&](auto, auto) { return delta(g, 0, 1); })));
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 12; ++j) {
                const bool hit = (i / 4 == j / 4) && (i % 4 == (j % 4 + 1) % 4);
                CHECK(std::abs(d(i, j) - (hit ? 1.0 : 0.0)) < 1e-15);
            }
    }
    SUBCASE("blocks are block-circulant before masking") {
        const auto g = geometry(4, 4, 2);
        const SystemOperator op(ones(2, g), stack_from(2, g, [&](std::size_t k, std::size_t s) { return random_kernel(g, 50 + 2 * k + s); }));
        const auto d = build_dense(op);
        const std::size_t N = 16;
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t s = 0; s < 2; ++s)
                for (std::size_t pm = 0; pm < 4; ++pm)
                    for (std::size_t pn = 0; pn < 4; ++pn)
                        for (std::size_t qm = 0; qm < 4; ++qm)
                            for (std::size_t qn = 0; qn < 4; ++qn) {
                                const double first = d(k * N + ((pm + 4 - qm) % 4) * 4 + (pn + 4 - qn) % 4, s * N);
                                CHECK(std::abs(d(k * N + pm * 4 + pn, s * N + qm * 4 + qn) - first) < 1e-15);
                            }
    }
    SUBCASE("columns match forward_apply of basis cubes") {
        const auto g = geometry(4, 4, 2);
        const auto op = random_system(2, g, 8);
        const auto d = build_dense(op);
        const auto x = random_vector(op.cols(), 3);
        CHECK(max_abs_diff(d.apply(x), op.apply(x)) <= 1e-11);
        const auto u = random_vector(op.rows(), 4);
        CHECK(max_abs_diff(d.apply_adjoint(u), op.apply_adjoint(u)) <= 1e-11);
    }
    const auto big = geometry(40, 40, 3);
    try {
        build_dense(SystemOperator(ones(1, big), stack_from(1, big, [&](auto, auto) { return delta(big); })));
        FAIL("expected TooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooLarge);
    }
}

TEST_CASE("composition with the synthesis transform") {
    const auto g = geometry(4, 4, 2);
    auto op = std::make_shared<SystemOperator>(random_system(2, g, 21));
    auto psi = std::make_shared<SparsifyingTransform>(g, TransformSpec{Wavelet::haar, 2});
    const auto A = compose_with_synthesis(op, psi);
    const auto dA = to_dense(*A);
    const auto dH = build_dense(*op);
    const auto dP = to_dense(*psi);
    double dev = 0.0;
    for (std::size_t i = 0; i < dA.rows(); ++i)
        for (std::size_t j = 0; j < dA.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < dP.rows(); ++r) acc += dH(i, r) * dP(r, j);
            dev = std::max(dev, std::abs(acc - dA(i, j)));
        }
    CHECK(dev <= 1e-11);

    const auto ident = compose_with_synthesis(op, std::make_shared<ScaledIdentity>(op->cols()));
    const auto x = random_vector(op->cols(), 5);
    CHECK(max_abs_diff(ident->apply(x), op->apply(x)) == 0.0);

    const auto u = random_vector(A->rows(), 6);
    CHECK(std::abs(dot(A->apply(x), u) - dot(x, A->apply_adjoint(u))) <= 1e-10 * norm2(x) * norm2(u));
    CHECK_THROWS_AS(compose_with_synthesis(op, std::make_shared<ScaledIdentity>(op->cols() + 1)), Error);
}

TEST_CASE("linearity and nonnegativity") {
    const auto g = geometry(8, 8, 4);
    const SystemOperator op(gen_masks(3, 8, 8, 0.5, 3),
                            build_psf_stack([] {
                                OpticalPrescription p;
                                p.kernel_halfwidth = 3;
                                return p;
                            }(), g));
    const auto a = random_vector(op.cols(), 1);
    const auto b = random_vector(op.cols(), 2);
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.5 * a[i] - 0.25 * b[i];
    const auto ya = op.apply(a), yb = op.apply(b), yc = op.apply(c);
    double scale = 0.0, dev = 0.0;
    for (std::size_t i = 0; i < yc.size(); ++i) {
        dev = std::max(dev, std::abs(yc[i] - (1.5 * ya[i] - 0.25 * yb[i])));
        scale = std::max(scale, std::abs(yc[i]));
    }
    CHECK(dev <= 1e-12 * scale);

    for (double v : op.forward_apply(random_cube(g, 4)).data) CHECK(v >= -1e-12);
}

TEST_CASE("threaded application is bitwise identical") {
    const auto g = geometry(8, 6, 5);
    const auto base = random_system(3, g, 2);
    const SystemOperator threaded(base.masks(), base.psfs(), SystemOptions{4, false});
    const auto x = random_vector(base.cols(), 1);
    const auto u = random_vector(base.rows(), 2);
    CHECK(base.apply(x) == threaded.apply(x));
    CHECK(base.apply_adjoint(u) == threaded.apply_adjoint(u));
}

TEST_CASE("shape mismatches are rejected") {
    const auto g = geometry(4, 4, 2);
    CHECK_THROWS_AS(SystemOperator(gen_masks(3, 4, 4, 0.5, 1), stack_from(2, g, [&](auto, auto) { return delta(g); })), Error);
    CHECK_THROWS_AS(SystemOperator(gen_masks(2, 4, 5, 0.5, 1), stack_from(2, g, [&](auto, auto) { return delta(g); })), Error);
    const auto op = random_system(2, g, 1);
    CHECK_THROWS_AS(op.forward_apply(random_cube(geometry(4, 4, 3), 1)), Error);
}

TEST_CASE("MEA1 roundtrip and noise utility") {
    MeasurementSet y{2, 3, 4, random_vector(24, 1), {"abc", "def", 7}};
    for (double& v : y.data) v = static_cast<float>(v);
    std::stringstream buf;
    write_measurements(y, buf, nlohmann::json{{"config_digest", "00ff"}});
    CHECK(buf.str().rfind("MEA1\n", 0) == 0);
    CHECK(buf.str().find("00ff") != std::string::npos);
    const auto back = read_measurements(buf);
    CHECK(back.data == y.data);
    CHECK(back.provenance == y.provenance);

    auto noisy = y;
    add_gaussian_noise(noisy, 0.0, 3);
    CHECK(noisy.data == y.data);
    auto n1 = y, n2 = y;
    add_gaussian_noise(n1, 0.1, 3);
    add_gaussian_noise(n2, 0.1, 3);
    CHECK(n1.data == n2.data);
    CHECK(n1.data != y.data);
}

TEST_CASE("preconditioner is symmetric positive definite") {
    const auto g = geometry(8, 8, 3);
    const auto op = random_system(3, g, 5);
    const NormalPreconditioner P(op);
    const auto a = random_vector(op.rows(), 1);
    const auto b = random_vector(op.rows(), 2);
    CHECK(std::abs(dot(P.apply(a), b) - dot(a, P.apply(b))) <= 1e-10 * norm2(a) * norm2(b));
    CHECK(dot(P.apply(a), a) > 0.0);
}
