#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace chromacs {

struct CubeGeometry {
    std::size_t nx = 0;  // columns
    std::size_t ny = 0;  // rows
    std::size_t bands = 0;
    std::vector<double> wavelengths_nm;
    double pixel_pitch_um = 10.0;

    std::size_t pixels() const noexcept { return nx * ny; }
    std::size_t size() const noexcept { return nx * ny * bands; }

    /// Throws DimensionMismatch/InvalidArgument when an invariant is broken.
    void validate() const;

    bool operator==(const CubeGeometry&) const = default;
};

/// Wavelengths start, start+step, ... (count entries).
std::vector<double> wavelength_grid(double start_nm, double step_nm, std::size_t count);

/// S planes of ny x nx values, band-major then row-major. Immutable once built.
class SpectralCube {
public:
    SpectralCube() = default;

    const CubeGeometry& geometry() const noexcept { return geometry_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> plane(std::size_t s) const;
    double at(std::size_t s, std::size_t m, std::size_t n) const;

    friend SpectralCube make_cube(CubeGeometry geometry, std::vector<double> data);
    friend SpectralCube make_cube(CubeGeometry geometry, const std::vector<std::vector<double>>& planes);

    bool operator==(const SpectralCube&) const = default;

private:
    CubeGeometry geometry_;
    std::vector<double> data_;
};

/// Validating constructors: DimensionMismatch on size disagreement, NonFinite on NaN/Inf.
SpectralCube make_cube(CubeGeometry geometry, std::vector<double> data);
SpectralCube make_cube(CubeGeometry geometry, const std::vector<std::vector<double>>& planes);

/// HSC1 container. `provenance` is stored under the "provenance" header key when non-null.
std::size_t write_cube(const SpectralCube& cube, std::ostream& out,
                       const nlohmann::json& provenance = nullptr);
SpectralCube read_cube(std::istream& in);

void save_cube(const SpectralCube& cube, const std::string& path,
               const nlohmann::json& provenance = nullptr);
SpectralCube load_cube(const std::string& path);

SpectralCube crop(const SpectralCube& cube, std::size_t x0, std::size_t y0, std::size_t w,
                  std::size_t h);

struct RgbImage {
    std::size_t ny = 0;
    std::size_t nx = 0;
    std::vector<double> rgb;  // interleaved, ny*nx*3, each in [0,1]

    double at(std::size_t m, std::size_t n, std::size_t c) const { return rgb[(m * nx + n) * 3 + c]; }
};

/// Gaussian band weights centred at 620/550/450 nm (sigma 40 nm), normalized by the image maximum.
RgbImage render_rgb(const SpectralCube& cube);

/// Binary P6, values round(v*255).
void write_ppm(const RgbImage& image, std::ostream& out);
/// Binary P5 of one plane, scaled by the plane maximum (if > 0) and clipped to [0,1].
void write_pgm(std::span<const double> plane, std::size_t ny, std::size_t nx, std::ostream& out);

} // namespace chromacs
