#include "chromacs/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace chromacs {

namespace {

struct Material {
    double base;
    double amp[2];
    double mu[2];
    double sigma[2];

    double reflectance(double lambda) const {
        double r = base;
        for (int i = 0; i < 2; ++i) {
            const double d = lambda - mu[i];
            r += amp[i] * std::exp(-d * d / (2.0 * sigma[i] * sigma[i]));
        }
        return std::min(r, 1.0);
    }
};

struct Shape {
    bool disc;
    double cy, cx, ry, rx;
    std::size_t material;
    double shade;

    bool contains(double y, double x) const {
        if (disc) {
            const double dy = (y - cy) / ry;
            const double dx = (x - cx) / rx;
            return dy * dy + dx * dx <= 1.0;
        }
        return std::abs(y - cy) <= ry && std::abs(x - cx) <= rx;
    }
};

} // namespace

SpectralCube synthetic_scene(const CubeGeometry& geometry, std::uint64_t seed) {
    geometry.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

    constexpr std::size_t kMaterials = 6;
    std::vector<Material> materials;
    for (std::size_t i = 0; i < kMaterials; ++i) {
        Material m{};
        m.base = uniform(0.05, 0.3);
        for (int j = 0; j < 2; ++j) {
            m.amp[j] = uniform(0.2, 0.6);
            m.mu[j] = uniform(420.0, 700.0);
            m.sigma[j] = uniform(30.0, 90.0);
        }
        materials.push_back(m);
    }

    const double ny = static_cast<double>(geometry.ny);
    const double nx = static_cast<double>(geometry.nx);
    std::vector<Shape> shapes;
    for (int i = 0; i < 7; ++i) {
        Shape s{};
        s.disc = u01(rng) < 0.5;
        s.cy = uniform(0.1, 0.9) * ny;
        s.cx = uniform(0.1, 0.9) * nx;
        s.ry = uniform(0.08, 0.3) * ny;
        s.rx = uniform(0.08, 0.3) * nx;
        s.material = 1 + static_cast<std::size_t>(u01(rng) * (kMaterials - 1)) % (kMaterials - 1);
        s.shade = uniform(0.6, 1.0);
        shapes.push_back(s);
    }

    // per-pixel material and shading; later shapes occlude earlier ones
    std::vector<std::size_t> label(geometry.pixels(), 0);
    std::vector<double> shade(geometry.pixels());
    for (std::size_t m = 0; m < geometry.ny; ++m) {
        for (std::size_t n = 0; n < geometry.nx; ++n) {
            const double y = static_cast<double>(m) + 0.5;
            const double x = static_cast<double>(n) + 0.5;
            const std::size_t p = m * geometry.nx + n;
            shade[p] = 0.55 + 0.35 * (x / nx) + 0.1 * (y / ny);
            for (const auto& s : shapes) {
                if (s.contains(y, x)) {
                    label[p] = s.material;
                    shade[p] = s.shade;
                }
            }
        }
    }

    const double lo = geometry.wavelengths_nm.front();
    const double span = std::max(geometry.wavelengths_nm.back() - lo, 1.0);
    std::vector<double> data(geometry.size());
    for (std::size_t s = 0; s < geometry.bands; ++s) {
        const double lambda = geometry.wavelengths_nm[s];
        const double illum = 0.8 + 0.2 * (lambda - lo) / span;
        for (std::size_t p = 0; p < geometry.pixels(); ++p) {
            data[s * geometry.pixels() + p] = illum * shade[p] * materials[label[p]].reflectance(lambda);
        }
    }
    const double peak = *std::max_element(data.begin(), data.end());
    if (peak > 0) {
        for (double& v : data) v /= peak;
    }
    return make_cube(geometry, std::move(data));
}

} // namespace chromacs
