#include "chromacs/coding.hpp"

#include <fstream>
#include <random>

#include "chromacs/detail/envelope.hpp"
#include "chromacs/errors.hpp"

namespace chromacs {

std::span<const std::uint8_t> MaskSet::mask(std::size_t k) const {
    require(k < K, Errc::OutOfBounds, "mask index out of range");
    return std::span<const std::uint8_t>(masks).subspan(k * ny * nx, ny * nx);
}

MaskSet gen_masks(std::size_t K, std::size_t ny, std::size_t nx, double density, std::uint64_t seed) {
    require(density > 0.0 && density <= 1.0, Errc::BadDensity, "density must lie in (0, 1]");
    require(K >= 1 && ny >= 1 && nx >= 1, Errc::InvalidArgument, "mask dimensions must be >= 1");
    MaskSet set{K, ny, nx, seed, density, std::vector<std::uint8_t>(K * ny * nx)};
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(density);
    for (auto& v : set.masks) v = coin(rng) ? 1 : 0;
    return set;
}

SpectralCube apply_mask(const SpectralCube& cube, std::span<const std::uint8_t> mask) {
    const auto& g = cube.geometry();
    require(mask.size() == g.pixels(), Errc::DimensionMismatch, "mask shape does not match cube");
    std::vector<double> data(cube.data().begin(), cube.data().end());
    const std::size_t n = g.pixels();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (mask[i % n] == 0) data[i] = 0.0;
    }
    return make_cube(g, std::move(data));
}

std::size_t write_masks(const MaskSet& masks, std::ostream& out, const nlohmann::json& provenance) {
    nlohmann::json h = {{"K", masks.K},
                        {"nx", masks.nx},
                        {"ny", masks.ny},
                        {"seed", masks.seed},
                        {"density", masks.density}};
    if (!provenance.is_null()) h["provenance"] = provenance;
    std::size_t bytes = detail::write_envelope_header(out, "MSK1", h);
    bytes += detail::write_u8(out, masks.masks);
    return bytes;
}

MaskSet read_masks(std::istream& in) {
    const auto h = detail::read_envelope_header(in, "MSK1");
    MaskSet set;
    set.K = detail::header_size(h, "K");
    set.nx = detail::header_size(h, "nx");
    set.ny = detail::header_size(h, "ny");
    require(set.K >= 1 && set.nx >= 1 && set.ny >= 1, Errc::HeaderError, "mask dimensions must be >= 1");
    if (auto it = h.find("seed"); it != h.end() && it->is_number_unsigned()) {
        set.seed = it->get<std::uint64_t>();
    }
    if (auto it = h.find("density"); it != h.end() && it->is_number()) {
        set.density = it->get<double>();
    }
    set.masks = detail::read_u8(in, set.K * set.ny * set.nx);
    for (auto v : set.masks) require(v <= 1, Errc::FormatError, "mask byte is neither 0 nor 1");
    return set;
}

void save_masks(const MaskSet& masks, const std::string& path, const nlohmann::json& provenance) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), Errc::FormatError, "cannot open '" + path + "' for writing");
    write_masks(masks, out, provenance);
}

MaskSet load_masks(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), Errc::FormatError, "cannot open '" + path + "'");
    return read_masks(in);
}

} // namespace chromacs
