#include "chromacs/pipeline.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "chromacs/coding.hpp"
#include "chromacs/cube.hpp"
#include "chromacs/metrics.hpp"
#include "chromacs/scene.hpp"
#include "chromacs/sysop.hpp"

namespace chromacs::pipeline {

namespace {

constexpr auto kKnownKeys = std::to_array<std::string_view>({
    "paths.cube", "paths.masks", "paths.psfs", "paths.measurements", "paths.reconstruction",
    "paths.report", "paths.trace", "paths.truth", "paths.estimate", "paths.quality",
    "paths.curves_prefix", "paths.render_input", "paths.render_output",
    "geometry.nx", "geometry.ny", "geometry.bands", "geometry.lambda_start_nm",
    "geometry.lambda_step_nm", "geometry.pixel_pitch_um",
    "crop.x0", "crop.y0", "crop.w", "crop.h",
    "scene.seed",
    "optics.f_ref_mm", "optics.lambda_ref_nm", "optics.cauchy_A", "optics.cauchy_B_um2",
    "optics.aperture_diameter_mm", "optics.object_distance_mm", "optics.detector_offsets_mm",
    "optics.pixel_pitch_um", "optics.psf_model", "optics.kernel_halfwidth",
    "mask.count", "mask.density", "mask.seed",
    "transform.wavelet", "transform.levels",
    "solver.gamma", "solver.relax", "solver.max_iters", "solver.stop_tol", "solver.cg_tol",
    "solver.cg_max_iters", "solver.tikhonov_mu", "solver.epsilon", "solver.warm_start",
    "solver.precondition", "solver.precond_regularization",
    "noise.sigma", "noise.seed",
    "metrics.pixels", "metrics.K",
    "oracle.nx", "oracle.ny", "oracle.bands", "oracle.K", "oracle.seed", "oracle.halfwidth",
    "oracle.corrupt_adjoint", "oracle.dot_trials", "oracle.kernels",
    "render.band",
    "run.threads",
});

std::size_t threads_from(const Config& cfg) { return cfg.get_size("run.threads", 1); }

nlohmann::json provenance(const Config& cfg, std::string_view command) {
    return {{"command", std::string(command)}, {"config_digest", cfg.digest()}};
}

std::string short_id(const std::string& path) { return file_sha256(path).substr(0, 16); }

SpectralCube load_input_cube(const Config& cfg, const std::string& path) {
    auto cube = load_cube(path);
    if (cfg.contains("crop.w") || cfg.contains("crop.h")) {
        const auto& g = cube.geometry();
        cube = crop(cube, cfg.get_size("crop.x0", 0), cfg.get_size("crop.y0", 0),
                    cfg.get_size("crop.w", g.nx), cfg.get_size("crop.h", g.ny));
    }
    return cube;
}

std::string require_path(const Config& cfg, const std::string& key) {
    const auto v = cfg.find(key);
    require(v && !v->empty(), Errc::ConfigError, "missing required key '" + key + "'");
    return *v;
}

std::size_t measurement_count(const Config& cfg, const OpticalPrescription& p) {
    const std::size_t K = cfg.get_size("mask.count", p.measurements());
    require(K == p.measurements(), Errc::ConfigError,
            "mask.count = " + std::to_string(K) + " but optics.detector_offsets_mm lists " +
                std::to_string(p.measurements()) + " offsets");
    return K;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_pixels(const Config& cfg, std::size_t ny,
                                                              std::size_t nx) {
    std::vector<std::pair<std::size_t, std::size_t>> pixels;
    const auto text = cfg.find("metrics.pixels");
    if (!text) {
        return {{ny / 4, nx / 4}, {ny / 2, nx / 2}, {3 * ny / 4, 3 * nx / 4}};
    }
    std::stringstream ss(*text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = item.find(',');
        require(comma != std::string::npos, Errc::ConfigError, "metrics.pixels entry '" + item + "' is not m,n");
        Config tmp;
        tmp.set("m", item.substr(0, comma));
        tmp.set("n", item.substr(comma + 1));
        pixels.emplace_back(tmp.get_size("m", 0), tmp.get_size("n", 0));
    }
    return pixels;
}

PsfStack random_psf_stack(std::size_t K, const CubeGeometry& g, std::size_t halfwidth, std::uint64_t seed) {
    require(2 * halfwidth + 1 <= std::min(g.nx, g.ny), Errc::KernelTooLarge,
            "oracle.halfwidth too large for the instance");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    PsfStack stack;
    stack.K = K;
    stack.S = g.bands;
    stack.geometry = g;
    stack.detector_offsets_mm.assign(K, 0.0);
    stack.kernels.assign(K * g.bands * g.pixels(), 0.0);
    const std::size_t cy = g.ny / 2, cx = g.nx / 2;
    for (std::size_t ks = 0; ks < K * g.bands; ++ks) {
        double* h = stack.kernels.data() + ks * g.pixels();
        double sum = 0.0;
        for (std::size_t m = cy - halfwidth; m <= cy + halfwidth; ++m) {
            for (std::size_t n = cx - halfwidth; n <= cx + halfwidth; ++n) {
                h[m * g.nx + n] = u01(rng);
                sum += h[m * g.nx + n];
            }
        }
        for (std::size_t i = 0; i < g.pixels(); ++i) h[i] /= sum;
    }
    return stack;
}

nlohmann::json to_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"final_rel_change", r.final_rel_change},
            {"feasibility_residual", r.feasibility_residual},
            {"l1_value", r.l1_value},
            {"wall_time_s", r.wall_time_s},
            {"gamma", r.gamma},
            {"cg_iterations", r.cg_iterations},
            {"cg_stagnations", r.cg_stagnations},
            {"final_cg_converged", r.final_cg_converged},
            {"converged", r.converged}};
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::FormatError, "cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

} // namespace

ExitCode exit_code_for(Errc code) noexcept {
    switch (code) {
        case Errc::ConfigError:
        case Errc::Unsupported:
        case Errc::BadDensity:
        case Errc::InvalidArgument:
        case Errc::KernelTooLarge:
        case Errc::VirtualImage:
        case Errc::NonPositiveWavelength:
        case Errc::BadDimensions:
            return kConfigError;
        case Errc::NonFinite:
        case Errc::CgStagnation:
        case Errc::NegativeThreshold:
            return kNumericalError;
        default:
            return kDataError;
    }
}

std::span<const std::string_view> known_keys() { return kKnownKeys; }

OpticalPrescription prescription_from(const Config& cfg) {
    OpticalPrescription p;
    p.f_ref_mm = cfg.get_double("optics.f_ref_mm", p.f_ref_mm);
    p.lambda_ref_nm = cfg.get_double("optics.lambda_ref_nm", p.lambda_ref_nm);
    p.cauchy_A = cfg.get_double("optics.cauchy_A", p.cauchy_A);
    p.cauchy_B_um2 = cfg.get_double("optics.cauchy_B_um2", p.cauchy_B_um2);
    p.aperture_diameter_mm = cfg.get_double("optics.aperture_diameter_mm", p.aperture_diameter_mm);
    p.object_distance_mm = cfg.get_double("optics.object_distance_mm", p.object_distance_mm);
    p.detector_offsets_mm = cfg.get_reals("optics.detector_offsets_mm", p.detector_offsets_mm);
    p.pixel_pitch_um = cfg.get_double("optics.pixel_pitch_um", p.pixel_pitch_um);
    p.psf_model = parse_psf_model(cfg.get_string("optics.psf_model", to_string(p.psf_model)));
    p.kernel_halfwidth = cfg.get_size("optics.kernel_halfwidth", p.kernel_halfwidth);
    try {
        p.validate();
    } catch (const Error& e) {
        fail(Errc::ConfigError, e.what());
    }
    return p;
}

SolverConfig solver_config_from(const Config& cfg) {
    SolverConfig s;
    s.gamma = cfg.get_double("solver.gamma", s.gamma);
    s.relax = cfg.get_double("solver.relax", s.relax);
    s.max_iters = cfg.get_size("solver.max_iters", s.max_iters);
    s.stop_tol = cfg.get_double("solver.stop_tol", s.stop_tol);
    s.cg_tol = cfg.get_double("solver.cg_tol", s.cg_tol);
    s.cg_max_iters = cfg.get_size("solver.cg_max_iters", s.cg_max_iters);
    s.tikhonov_mu = cfg.get_double("solver.tikhonov_mu", s.tikhonov_mu);
    s.epsilon = cfg.get_double("solver.epsilon", s.epsilon);
    s.warm_start_cg = cfg.get_bool("solver.warm_start", s.warm_start_cg);
    s.record_trace = !cfg.get_string("paths.trace", "").empty();
    try {
        s.validate();
    } catch (const Error& e) {
        if (e.code() == Errc::Unsupported) throw;
        fail(Errc::ConfigError, e.what());
    }
    return s;
}

TransformSpec transform_spec_from(const Config& cfg, std::size_t ny, std::size_t nx) {
    TransformSpec t;
    t.wavelet = parse_wavelet(cfg.get_string("transform.wavelet", "haar"));
    t.levels = cfg.get_size("transform.levels", 0);
    if (t.levels == 0) t.levels = default_levels(ny, nx);
    t.validate(ny, nx);
    return t;
}

CubeGeometry geometry_from(const Config& cfg) {
    if (const auto path = cfg.find("paths.cube"); path && !path->empty()) {
        return load_input_cube(cfg, *path).geometry();
    }
    CubeGeometry g;
    g.nx = cfg.get_size("geometry.nx", 64);
    g.ny = cfg.get_size("geometry.ny", 64);
    g.bands = cfg.get_size("geometry.bands", 29);
    g.wavelengths_nm = wavelength_grid(cfg.get_double("geometry.lambda_start_nm", 420.0),
                                       cfg.get_double("geometry.lambda_step_nm", 10.0), g.bands);
    g.pixel_pitch_um = cfg.get_double("geometry.pixel_pitch_um",
                                      cfg.get_double("optics.pixel_pitch_um", 10.0));
    try {
        g.validate();
    } catch (const Error& e) {
        fail(Errc::ConfigError, e.what());
    }
    return g;
}

int cmd_scene(const Config& cfg, std::ostream& log) {
    CubeGeometry g;
    g.nx = cfg.get_size("geometry.nx", 64);
    g.ny = cfg.get_size("geometry.ny", 64);
    g.bands = cfg.get_size("geometry.bands", 29);
    g.wavelengths_nm = wavelength_grid(cfg.get_double("geometry.lambda_start_nm", 420.0),
                                       cfg.get_double("geometry.lambda_step_nm", 10.0), g.bands);
    g.pixel_pitch_um = cfg.get_double("geometry.pixel_pitch_um", 10.0);
    const auto out = require_path(cfg, "paths.cube");
    auto prov = provenance(cfg, "scene");
    prov["scene_seed"] = cfg.get_u64("scene.seed", 1);
    save_cube(synthetic_scene(g, cfg.get_u64("scene.seed", 1)), out, prov);
    log << "scene: wrote " << g.ny << "x" << g.nx << "x" << g.bands << " cube to " << out << '\n';
    return kOk;
}

int cmd_psf(const Config& cfg, std::ostream& log) {
    const auto p = prescription_from(cfg);
    measurement_count(cfg, p);
    const auto g = geometry_from(cfg);
    const auto stack = build_psf_stack(p, g);
    auto prov = provenance(cfg, "psf");
    prov["psf_model"] = to_string(p.psf_model);
    const auto out = cfg.get_string("paths.psfs", "psfs.psf");
    save_psf_stack(stack, out, prov);
    log << "psf: wrote " << stack.K * stack.S << " kernels (K=" << stack.K << ", S=" << stack.S
        << ") to " << out << '\n';
    return kOk;
}

int cmd_mask(const Config& cfg, std::ostream& log) {
    const auto p = prescription_from(cfg);
    const std::size_t K = measurement_count(cfg, p);
    const auto g = geometry_from(cfg);
    const auto masks = gen_masks(K, g.ny, g.nx, cfg.get_double("mask.density", 0.5),
                                 cfg.get_u64("mask.seed", 1));
    const auto out = cfg.get_string("paths.masks", "masks.msk");
    save_masks(masks, out, provenance(cfg, "mask"));
    log << "mask: wrote " << K << " masks (" << g.ny << "x" << g.nx << ", density " << masks.density
        << ") to " << out << '\n';
    return kOk;
}

int cmd_simulate(const Config& cfg, std::ostream& log) {
    const auto cube_path = require_path(cfg, "paths.cube");
    const auto mask_path = cfg.get_string("paths.masks", "masks.msk");
    const auto psf_path = cfg.get_string("paths.psfs", "psfs.psf");
    const auto cube = load_input_cube(cfg, cube_path);
    auto masks = load_masks(mask_path);
    auto psfs = load_psf_stack(psf_path);
    for (const auto& w : psfs.warnings) log << "warning: " << w << '\n';
    const auto& g = cube.geometry();
    require(psfs.stack.geometry.nx == g.nx && psfs.stack.geometry.ny == g.ny &&
                psfs.stack.S == g.bands,
            Errc::DimensionMismatch, "PSF stack does not match the cube geometry");
    const std::uint64_t seed = masks.seed;
    SystemOperator op(std::move(masks), std::move(psfs.stack), {threads_from(cfg), false});
    auto y = op.forward_apply(cube);
    y.provenance = {short_id(mask_path), short_id(psf_path), seed};
    const double sigma = cfg.get_double("noise.sigma", 0.0);
    add_gaussian_noise(y, sigma, cfg.get_u64("noise.seed", cfg.get_u64("mask.seed", 1)));
    auto extra = provenance(cfg, "simulate");
    extra["noise_sigma"] = sigma;
    const auto out = cfg.get_string("paths.measurements", "measurements.mea");
    save_measurements(y, out, extra);
    log << "simulate: wrote K=" << y.K << " measurements (" << y.ny << "x" << y.nx << ") to " << out << '\n';
    return kOk;
}

int cmd_reconstruct(const Config& cfg, std::ostream& log) {
    const auto meas_path = cfg.get_string("paths.measurements", "measurements.mea");
    auto y = load_measurements(meas_path);
    auto masks = load_masks(cfg.get_string("paths.masks", "masks.msk"));
    auto psfs = load_psf_stack(cfg.get_string("paths.psfs", "psfs.psf"));
    for (const auto& w : psfs.warnings) log << "warning: " << w << '\n';

    auto op = std::make_shared<SystemOperator>(std::move(masks), std::move(psfs.stack),
                                               SystemOptions{threads_from(cfg), false});
    require(y.K == op->K() && y.ny == op->geometry().ny && y.nx == op->geometry().nx,
            Errc::DimensionMismatch, "measurements do not match masks/PSFs");
    const auto& g = op->geometry();
    const auto spec = transform_spec_from(cfg, g.ny, g.nx);
    auto psi = std::make_shared<SparsifyingTransform>(g, spec);
    auto A = compose_with_synthesis(op, psi);
    const auto solver_cfg = solver_config_from(cfg);

    std::unique_ptr<NormalPreconditioner> precond;
    if (cfg.get_bool("solver.precondition", true)) {
        precond = std::make_unique<NormalPreconditioner>(
            *op, cfg.get_double("solver.precond_regularization", 1e-3));
    }
    auto result = douglas_rachford(*A, y.data, solver_cfg, precond.get());
    const auto& rep = result.report;
    auto x = make_cube(g, psi->apply(result.alpha));

    auto prov = provenance(cfg, "reconstruct");
    prov["measurements_id"] = short_id(meas_path);
    const auto out = cfg.get_string("paths.reconstruction", "reconstruction.hsc");
    save_cube(x, out, prov);

    nlohmann::json report = {{"solve", to_json(rep)},
                             {"wavelet", to_string(spec.wavelet)},
                             {"levels", spec.levels},
                             {"config_digest", cfg.digest()}};
    if (const auto truth_path = cfg.find("paths.truth"); truth_path && !truth_path->empty()) {
        const auto truth = load_input_cube(cfg, *truth_path);
        const auto q = evaluate(truth, x, op->K(), parse_pixels(cfg, g.ny, g.nx));
        report["quality"] = to_json(q);
        log << "reconstruct: PSNR " << std::fixed << std::setprecision(2) << q.psnr_db << " dB\n";
        log.unsetf(std::ios::floatfield);
    }
    write_json(report, cfg.get_string("paths.report", "report.json"));
    if (const auto trace = cfg.get_string("paths.trace", ""); !trace.empty()) {
        std::ofstream t(trace);
        require(static_cast<bool>(t), Errc::FormatError, "cannot open '" + trace + "' for writing");
        write_trace_csv(rep.trace, t);
    }
    log << "reconstruct: " << rep.iterations << " iterations, feasibility residual "
        << rep.feasibility_residual << ", wrote " << out << '\n';
    if (!rep.final_cg_converged) {
        log << "reconstruct: final projection did not reach cg_tol (CgStagnation)\n";
        return kNumericalError;
    }
    return kOk;
}

int cmd_oracle(const Config& cfg, std::ostream& log) {
    CubeGeometry g;
    g.nx = cfg.get_size("oracle.nx", 8);
    g.ny = cfg.get_size("oracle.ny", 8);
    g.bands = cfg.get_size("oracle.bands", 4);
    require(g.bands >= 1, Errc::ConfigError, "oracle.bands must be >= 1");
    g.wavelengths_nm = wavelength_grid(420.0, 280.0 / static_cast<double>(std::max<std::size_t>(g.bands - 1, 1)),
                                       g.bands);
    require(g.pixels() * g.bands <= 4096, Errc::TooLarge,
            "oracle instance N*S = " + std::to_string(g.pixels() * g.bands) + " exceeds 4096");
    const std::size_t K = cfg.get_size("oracle.K", 2);
    const std::uint64_t seed = cfg.get_u64("oracle.seed", 1);

    OpticalPrescription p;
    p.kernel_halfwidth = cfg.get_size("oracle.halfwidth", (std::min(g.nx, g.ny) - 1) / 2);
    p.detector_offsets_mm.clear();
    for (std::size_t k = 0; k < K; ++k) {
        p.detector_offsets_mm.push_back(-0.25 + 0.5 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(K - 1, 1)));
    }
    // random kernels are not centrosymmetric, so a flipped kernel in the adjoint is visible
    const auto kernels = cfg.get_string("oracle.kernels", "random");
    require(kernels == "random" || kernels == "optics", Errc::ConfigError,
            "oracle.kernels must be 'random' or 'optics'");
    PsfStack psfs = build_psf_stack(p, g);
    if (kernels == "random") psfs = random_psf_stack(K, g, p.kernel_halfwidth, seed);
    SystemOptions opts{threads_from(cfg), cfg.get_bool("oracle.corrupt_adjoint", false)};
    auto H = std::make_shared<SystemOperator>(gen_masks(K, g.ny, g.nx, 0.5, seed), std::move(psfs), opts);
    const auto spec = transform_spec_from(cfg, g.ny, g.nx);
    auto psi = std::make_shared<SparsifyingTransform>(g, spec);
    auto A = compose_with_synthesis(H, psi);

    struct Check {
        std::string name;
        double value;
        double threshold;
    };
    std::vector<Check> checks;

    const auto dense = build_dense(*H);
    const auto dense_adj = to_dense_from_adjoint(*H);
    double fwd_dev = 0.0, adj_dev = 0.0;
    // independent entries: D[(k,p),(s,q)] = c_k(q) h_ks(p - q + centre), periodic
    const std::size_t N = g.pixels();
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t s = 0; s < g.bands; ++s) {
            const auto h = H->psfs().kernel(k, s);
            const auto c = H->masks().mask(k);
            for (std::size_t pm = 0; pm < g.ny; ++pm) {
                for (std::size_t pn = 0; pn < g.nx; ++pn) {
                    for (std::size_t qm = 0; qm < g.ny; ++qm) {
                        for (std::size_t qn = 0; qn < g.nx; ++qn) {
                            const std::size_t hm = (pm + g.ny - qm + g.ny / 2) % g.ny;
                            const std::size_t hn = (pn + g.nx - qn + g.nx / 2) % g.nx;
                            const double ref = c[qm * g.nx + qn] * h[hm * g.nx + hn];
                            const std::size_t row = k * N + pm * g.nx + pn;
                            const std::size_t col = s * N + qm * g.nx + qn;
                            fwd_dev = std::max(fwd_dev, std::abs(dense(row, col) - ref));
                            adj_dev = std::max(adj_dev, std::abs(dense_adj(row, col) - ref));
                        }
                    }
                }
            }
        }
    }
    checks.push_back({"dense_forward_max_abs_dev", fwd_dev, 1e-11});
    checks.push_back({"dense_adjoint_max_abs_dev", adj_dev, 1e-11});

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const auto randvec = [&](std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = normal(rng);
        return v;
    };
    const std::size_t trials = cfg.get_size("oracle.dot_trials", 20);
    double dot_hc = 0.0, dot_a = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        for (const LinearOperator* op : {static_cast<const LinearOperator*>(H.get()),
                                         static_cast<const LinearOperator*>(A.get())}) {
            const auto x = randvec(op->cols());
            const auto u = randvec(op->rows());
            const double lhs = dot(op->apply(x), u);
            const double rhs = dot(x, op->apply_adjoint(u));
            const double rel = std::abs(lhs - rhs) / (norm2(x) * norm2(u));
            (op == H.get() ? dot_hc : dot_a) = std::max(op == H.get() ? dot_hc : dot_a, rel);
        }
    }
    checks.push_back({"dot_test_HC_rel", dot_hc, 1e-10});
    checks.push_back({"dot_test_A_rel", dot_a, 1e-10});

    const auto psi_dense = to_dense(*psi);
    const std::size_t n = psi->cols();
    double orth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) acc += psi_dense(r, i) * psi_dense(r, j);
            orth = std::max(orth, std::abs(acc - (i == j ? 1.0 : 0.0)));
        }
    }
    checks.push_back({"psi_orthogonality_max_abs_dev", orth, 1e-12});

    bool pass = true;
    log << "oracle: instance " << g.ny << "x" << g.nx << "x" << g.bands << ", K=" << K << '\n';
    for (const auto& c : checks) {
        const bool ok = c.value <= c.threshold;
        pass = pass && ok;
        log << (ok ? "PASS " : "FAIL ") << c.name << " = " << std::scientific << std::setprecision(3)
            << c.value << " (threshold " << c.threshold << ")\n";
    }
    log.unsetf(std::ios::floatfield);
    log << "oracle: " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kOk : kNumericalError;
}

int cmd_metrics(const Config& cfg, std::ostream& log) {
    const auto ref = load_input_cube(cfg, require_path(cfg, "paths.cube"));
    const auto est = load_cube(cfg.get_string("paths.estimate", cfg.get_string("paths.reconstruction",
                                                                               "reconstruction.hsc")));
    const auto& g = ref.geometry();
    const std::size_t K = cfg.get_size("metrics.K", cfg.get_size("mask.count", prescription_from(cfg).measurements()));
    const auto q = evaluate(ref, est, K, parse_pixels(cfg, g.ny, g.nx));
    write_json(to_json(q), cfg.get_string("paths.quality", "quality.json"));
    const auto prefix = cfg.get_string("paths.curves_prefix", "curve");
    for (const auto& c : q.curves) {
        const auto path = prefix + "_" + std::to_string(c.m) + "_" + std::to_string(c.n) + ".csv";
        std::ofstream out(path);
        require(static_cast<bool>(out), Errc::FormatError, "cannot open '" + path + "' for writing");
        write_curve_csv(c, out);
    }
    log << "metrics: PSNR " << std::fixed << std::setprecision(2) << q.psnr_db << " dB, compression ratio "
        << std::setprecision(5) << q.compression_ratio << ", " << q.curves.size() << " curves\n";
    log.unsetf(std::ios::floatfield);
    return kOk;
}

int cmd_render(const Config& cfg, std::ostream& log) {
    const auto in = cfg.get_string("paths.render_input", cfg.get_string("paths.reconstruction", "reconstruction.hsc"));
    const auto cube = load_cube(in);
    const auto band = cfg.get_string("render.band", "rgb");
    std::string out;
    if (band == "rgb") {
        out = cfg.get_string("paths.render_output", "render.ppm");
        std::ofstream f(out, std::ios::binary);
        require(static_cast<bool>(f), Errc::FormatError, "cannot open '" + out + "' for writing");
        write_ppm(render_rgb(cube), f);
    } else {
        const std::size_t s = cfg.get_size("render.band", 0);
        require(s < cube.geometry().bands, Errc::OutOfBounds, "render.band out of range");
        out = cfg.get_string("paths.render_output", "render.pgm");
        std::ofstream f(out, std::ios::binary);
        require(static_cast<bool>(f), Errc::FormatError, "cannot open '" + out + "' for writing");
        write_pgm(cube.plane(s), cube.geometry().ny, cube.geometry().nx, f);
    }
    log << "render: wrote " << out << '\n';
    return kOk;
}

int run_command(std::string_view name, const Config& cfg, std::ostream& log, std::ostream& err) {
    try {
        cfg.check_known(known_keys());
        if (name == "scene") return cmd_scene(cfg, log);
        if (name == "psf") return cmd_psf(cfg, log);
        if (name == "mask") return cmd_mask(cfg, log);
        if (name == "simulate") return cmd_simulate(cfg, log);
        if (name == "reconstruct") return cmd_reconstruct(cfg, log);
        if (name == "oracle") return cmd_oracle(cfg, log);
        if (name == "metrics") return cmd_metrics(cfg, log);
        if (name == "render") return cmd_render(cfg, log);
        fail(Errc::ConfigError, "unknown command '" + std::string(name) + "'");
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

} // namespace chromacs::pipeline
