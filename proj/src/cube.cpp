#include "chromacs/cube.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "chromacs/detail/envelope.hpp"
#include "chromacs/errors.hpp"

namespace chromacs {

void CubeGeometry::validate() const {
    require(nx >= 1 && ny >= 1 && bands >= 1, Errc::DimensionMismatch,
            "nx, ny and bands must all be >= 1");
    require(wavelengths_nm.size() == bands, Errc::DimensionMismatch,
            "wavelength count " + std::to_string(wavelengths_nm.size()) + " != bands " +
                std::to_string(bands));
    for (std::size_t s = 0; s < wavelengths_nm.size(); ++s) {
        require(std::isfinite(wavelengths_nm[s]), Errc::NonFinite, "non-finite wavelength");
        if (s > 0) {
            require(wavelengths_nm[s] > wavelengths_nm[s - 1], Errc::InvalidArgument,
                    "wavelengths must be strictly increasing");
        }
    }
    require(std::isfinite(pixel_pitch_um) && pixel_pitch_um > 0, Errc::InvalidArgument,
            "pixel pitch must be positive");
}

std::vector<double> wavelength_grid(double start_nm, double step_nm, std::size_t count) {
    std::vector<double> w(count);
    for (std::size_t i = 0; i < count; ++i) w[i] = start_nm + step_nm * static_cast<double>(i);
    return w;
}

std::span<const double> SpectralCube::plane(std::size_t s) const {
    require(s < geometry_.bands, Errc::OutOfBounds, "band index out of range");
    return std::span<const double>(data_).subspan(s * geometry_.pixels(), geometry_.pixels());
}

double SpectralCube::at(std::size_t s, std::size_t m, std::size_t n) const {
    require(s < geometry_.bands && m < geometry_.ny && n < geometry_.nx, Errc::OutOfBounds,
            "cube index out of range");
    return data_[(s * geometry_.ny + m) * geometry_.nx + n];
}

SpectralCube make_cube(CubeGeometry geometry, std::vector<double> data) {
    geometry.validate();
    require(data.size() == geometry.size(), Errc::DimensionMismatch,
            "data length " + std::to_string(data.size()) + " != " + std::to_string(geometry.size()));
    for (double v : data) require(std::isfinite(v), Errc::NonFinite, "cube contains NaN/Inf");
    SpectralCube cube;
    cube.geometry_ = std::move(geometry);
    cube.data_ = std::move(data);
    return cube;
}

SpectralCube make_cube(CubeGeometry geometry, const std::vector<std::vector<double>>& planes) {
    require(planes.size() == geometry.bands, Errc::DimensionMismatch,
            "plane count " + std::to_string(planes.size()) + " != bands " +
                std::to_string(geometry.bands));
    std::vector<double> data;
    data.reserve(geometry.size());
    for (const auto& p : planes) {
        require(p.size() == geometry.pixels(), Errc::DimensionMismatch, "plane shape mismatch");
        data.insert(data.end(), p.begin(), p.end());
    }
    return make_cube(std::move(geometry), std::move(data));
}

std::size_t write_cube(const SpectralCube& cube, std::ostream& out,
                       const nlohmann::json& provenance) {
    const auto& g = cube.geometry();
    nlohmann::json h = {{"nx", g.nx},
                        {"ny", g.ny},
                        {"bands", g.bands},
                        {"wavelengths_nm", g.wavelengths_nm},
                        {"pixel_pitch_um", g.pixel_pitch_um}};
    if (!provenance.is_null()) h["provenance"] = provenance;
    std::size_t bytes = detail::write_envelope_header(out, "HSC1", h);
    bytes += detail::write_f32(out, cube.data());
    return bytes;
}

SpectralCube read_cube(std::istream& in) {
    const auto h = detail::read_envelope_header(in, "HSC1");
    CubeGeometry g;
    g.nx = detail::header_size(h, "nx");
    g.ny = detail::header_size(h, "ny");
    g.bands = detail::header_size(h, "bands");
    g.wavelengths_nm = detail::header_reals(h, "wavelengths_nm");
    if (auto it = h.find("pixel_pitch_um"); it != h.end()) {
        if (!it->is_number()) fail(Errc::HeaderError, "invalid 'pixel_pitch_um'");
        g.pixel_pitch_um = it->get<double>();
    }
    try {
        g.validate();
    } catch (const Error& e) {
        fail(Errc::HeaderError, e.what());
    }
    auto data = detail::read_f32(in, g.size());
    return make_cube(std::move(g), std::move(data));
}

void save_cube(const SpectralCube& cube, const std::string& path, const nlohmann::json& provenance) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), Errc::FormatError, "cannot open '" + path + "' for writing");
    write_cube(cube, out, provenance);
}

SpectralCube load_cube(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), Errc::FormatError, "cannot open '" + path + "'");
    return read_cube(in);
}

SpectralCube crop(const SpectralCube& cube, std::size_t x0, std::size_t y0, std::size_t w,
                  std::size_t h) {
    const auto& g = cube.geometry();
    require(w >= 1 && h >= 1, Errc::OutOfBounds, "crop window must be non-empty");
    require(x0 < g.nx && w <= g.nx - x0 && y0 < g.ny && h <= g.ny - y0, Errc::OutOfBounds,
            "crop window exceeds cube bounds");
    CubeGeometry out_g = g;
    out_g.nx = w;
    out_g.ny = h;
    std::vector<double> data;
    data.reserve(out_g.size());
    for (std::size_t s = 0; s < g.bands; ++s) {
        const auto p = cube.plane(s);
        for (std::size_t m = y0; m < y0 + h; ++m) {
            const auto row = p.subspan(m * g.nx + x0, w);
            data.insert(data.end(), row.begin(), row.end());
        }
    }
    return make_cube(std::move(out_g), std::move(data));
}

RgbImage render_rgb(const SpectralCube& cube) {
    constexpr double kMu[3] = {620.0, 550.0, 450.0};
    constexpr double kSigma = 40.0;
    const auto& g = cube.geometry();
    RgbImage img{g.ny, g.nx, std::vector<double>(g.pixels() * 3, 0.0)};
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> w(g.bands);
        double wsum = 0.0;
        for (std::size_t s = 0; s < g.bands; ++s) {
            const double d = g.wavelengths_nm[s] - kMu[c];
            w[s] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            wsum += w[s];
        }
        if (wsum <= 0.0) continue;  // underflow far from every band
        for (std::size_t s = 0; s < g.bands; ++s) {
            const auto p = cube.plane(s);
            const double ws = w[s] / wsum;
            for (std::size_t i = 0; i < p.size(); ++i) img.rgb[i * 3 + c] += ws * p[i];
        }
    }
    const double peak = img.rgb.empty() ? 0.0 : *std::max_element(img.rgb.begin(), img.rgb.end());
    for (double& v : img.rgb) {
        if (peak > 0) v /= peak;
        v = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

namespace {

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

void write_ppm(const RgbImage& image, std::ostream& out) {
    out << "P6\n" << image.nx << ' ' << image.ny << "\n255\n";
    std::vector<unsigned char> bytes(image.rgb.size());
    std::transform(image.rgb.begin(), image.rgb.end(), bytes.begin(), to_byte);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), Errc::FormatError, "PPM write failed");
}

void write_pgm(std::span<const double> plane, std::size_t ny, std::size_t nx, std::ostream& out) {
    require(plane.size() == ny * nx, Errc::DimensionMismatch, "plane shape mismatch");
    const double peak = plane.empty() ? 0.0 : *std::max_element(plane.begin(), plane.end());
    out << "P5\n" << nx << ' ' << ny << "\n255\n";
    std::vector<unsigned char> bytes(plane.size());
    for (std::size_t i = 0; i < plane.size(); ++i) {
        bytes[i] = to_byte(peak > 0 ? plane[i] / peak : 0.0);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), Errc::FormatError, "PGM write failed");
}

} // namespace chromacs
