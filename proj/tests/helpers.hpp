#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chromacs/cube.hpp"

namespace chromacs::testing {

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

inline CubeGeometry geometry(std::size_t ny, std::size_t nx, std::size_t bands, double start = 420.0,
                             double step = 10.0) {
    return CubeGeometry{nx, ny, bands, wavelength_grid(start, step, bands), 10.0};
}

inline SpectralCube random_cube(const CubeGeometry& g, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    return make_cube(g, random_vector(g.size(), seed, lo, hi));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace chromacs::testing
