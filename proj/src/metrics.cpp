#include "chromacs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "chromacs/errors.hpp"

namespace chromacs {

namespace {

void check_same_geometry(const SpectralCube& a, const SpectralCube& b) {
    const auto& ga = a.geometry();
    const auto& gb = b.geometry();
    require(ga.nx == gb.nx && ga.ny == gb.ny && ga.bands == gb.bands, Errc::DimensionMismatch,
            "reference and estimate geometries differ");
}

double psnr_from(double peak, double mse) {
    if (mse <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / mse));
}

double reference_peak(const SpectralCube& reference) {
    const auto d = reference.data();
    return *std::max_element(d.begin(), d.end());
}

} // namespace

double psnr(const SpectralCube& reference, const SpectralCube& estimate) {
    check_same_geometry(reference, estimate);
    const auto r = reference.data();
    const auto e = estimate.data();
    double sse = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sse += (r[i] - e[i]) * (r[i] - e[i]);
    return psnr_from(reference_peak(reference), sse / static_cast<double>(r.size()));
}

std::vector<double> psnr_per_band(const SpectralCube& reference, const SpectralCube& estimate) {
    check_same_geometry(reference, estimate);
    const double peak = reference_peak(reference);
    std::vector<double> out;
    for (std::size_t s = 0; s < reference.geometry().bands; ++s) {
        const auto r = reference.plane(s);
        const auto e = estimate.plane(s);
        double sse = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) sse += (r[i] - e[i]) * (r[i] - e[i]);
        out.push_back(psnr_from(peak, sse / static_cast<double>(r.size())));
    }
    return out;
}

std::vector<SpectralPoint> spectral_curve(const SpectralCube& cube, std::size_t m, std::size_t n) {
    const auto& g = cube.geometry();
    require(m < g.ny && n < g.nx, Errc::OutOfBounds,
            "pixel (" + std::to_string(m) + "," + std::to_string(n) + ") outside " +
                std::to_string(g.ny) + "x" + std::to_string(g.nx));
    std::vector<SpectralPoint> curve;
    curve.reserve(g.bands);
    for (std::size_t s = 0; s < g.bands; ++s) curve.push_back({g.wavelengths_nm[s], cube.at(s, m, n)});
    return curve;
}

double compression_ratio(std::size_t K, std::size_t S) {
    require(K >= 1 && S >= 1, Errc::InvalidArgument, "K and S must be >= 1");
    return static_cast<double>(K) / static_cast<double>(S);
}

QualityReport evaluate(const SpectralCube& reference, const SpectralCube& estimate, std::size_t K,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pixels) {
    QualityReport rep;
    rep.psnr_db = psnr(reference, estimate);
    rep.psnr_per_band_db = psnr_per_band(reference, estimate);
    rep.compression_ratio = compression_ratio(K, reference.geometry().bands);
    for (const auto& [m, n] : pixels) {
        rep.curves.push_back({m, n, spectral_curve(reference, m, n), spectral_curve(estimate, m, n)});
    }
    return rep;
}

nlohmann::json to_json(const QualityReport& report) {
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : report.curves) {
        nlohmann::json lam = nlohmann::json::array(), truth = nlohmann::json::array(),
                       est = nlohmann::json::array();
        for (std::size_t i = 0; i < c.truth.size(); ++i) {
            lam.push_back(c.truth[i].lambda_nm);
            truth.push_back(c.truth[i].value);
            est.push_back(c.estimate[i].value);
        }
        curves.push_back({{"pixel", {c.m, c.n}}, {"lambda_nm", lam}, {"truth", truth}, {"estimate", est}});
    }
    return {{"psnr_db", report.psnr_db},
            {"psnr_per_band_db", report.psnr_per_band_db},
            {"compression_ratio", report.compression_ratio},
            {"curves", curves}};
}

void write_curve_csv(const PixelCurves& curves, std::ostream& out) {
    out << "lambda_nm,truth,estimate\n";
    out.precision(9);
    for (std::size_t i = 0; i < curves.truth.size(); ++i) {
        out << curves.truth[i].lambda_nm << ',' << curves.truth[i].value << ','
            << curves.estimate[i].value << '\n';
    }
}

} // namespace chromacs
