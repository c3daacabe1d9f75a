#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chromacs/cube.hpp"

namespace chromacs {

inline constexpr double kPsnrCapDb = 300.0;

/// 10 log10(peak^2 / MSE), peak = max of the reference, MSE over all S*N entries.
/// Identical cubes report kPsnrCapDb.
double psnr(const SpectralCube& reference, const SpectralCube& estimate);

/// PSNR of each band, with the peak still taken over the whole reference cube.
std::vector<double> psnr_per_band(const SpectralCube& reference, const SpectralCube& estimate);

struct SpectralPoint {
    double lambda_nm;
    double value;
};

std::vector<SpectralPoint> spectral_curve(const SpectralCube& cube, std::size_t m, std::size_t n);

double compression_ratio(std::size_t K, std::size_t S);

struct PixelCurves {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<SpectralPoint> truth;
    std::vector<SpectralPoint> estimate;
};

struct QualityReport {
    double psnr_db = 0.0;
    std::vector<double> psnr_per_band_db;
    double compression_ratio = 0.0;
    std::vector<PixelCurves> curves;
};

QualityReport evaluate(const SpectralCube& reference, const SpectralCube& estimate, std::size_t K,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pixels);

nlohmann::json to_json(const QualityReport& report);

/// CSV columns: lambda_nm,truth,estimate
void write_curve_csv(const PixelCurves& curves, std::ostream& out);

} // namespace chromacs
