#pragma once

#include <cstddef>
#include <cstdint>

#include "chromacs/cube.hpp"

namespace chromacs {

/// Deterministic piecewise-smooth test scene: a shaded background and a handful of
/// rectangles and discs, each made of a material with a smooth reflectance
/// spectrum, under a smooth illuminant. Nonnegative, peak about 1.
SpectralCube synthetic_scene(const CubeGeometry& geometry, std::uint64_t seed);

} // namespace chromacs
