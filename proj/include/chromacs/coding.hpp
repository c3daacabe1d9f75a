#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chromacs/cube.hpp"

namespace chromacs {

/// K binary coded-aperture masks, one per measurement.
struct MaskSet {
    std::size_t K = 0;
    std::size_t ny = 0;
    std::size_t nx = 0;
    std::uint64_t seed = 0;
    double density = 0.5;
    std::vector<std::uint8_t> masks;  // K*ny*nx, each 0 or 1

    std::span<const std::uint8_t> mask(std::size_t k) const;

    bool operator==(const MaskSet&) const = default;
};

/// Each pixel independently 1 with probability `density`; deterministic in `seed`.
MaskSet gen_masks(std::size_t K, std::size_t ny, std::size_t nx, double density, std::uint64_t seed);

/// Every band multiplied pixel-wise by the same mask.
SpectralCube apply_mask(const SpectralCube& cube, std::span<const std::uint8_t> mask);

std::size_t write_masks(const MaskSet& masks, std::ostream& out,
                        const nlohmann::json& provenance = nullptr);
MaskSet read_masks(std::istream& in);

void save_masks(const MaskSet& masks, const std::string& path,
                const nlohmann::json& provenance = nullptr);
MaskSet load_masks(const std::string& path);

} // namespace chromacs
