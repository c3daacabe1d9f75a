#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "chromacs/coding.hpp"
#include "chromacs/cube.hpp"
#include "chromacs/errors.hpp"
#include "chromacs/metrics.hpp"
#include "chromacs/optics.hpp"
#include "chromacs/scene.hpp"
#include "chromacs/solver.hpp"
#include "chromacs/sysop.hpp"
#include "chromacs/transforms.hpp"

namespace py = pybind11;
using namespace chromacs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Mask = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v, std::vector<py::ssize_t> shape) {
    Array a(shape);
    std::memcpy(a.mutable_data(), v.data(), v.size() * sizeof(double));
    return a;
}

std::vector<double> flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

void require_ndim(const py::array& a, py::ssize_t ndim, const char* what) {
    require(a.ndim() == ndim, Errc::DimensionMismatch,
            std::string(what) + " must have " + std::to_string(ndim) + " dimensions");
}

CubeGeometry cube_geometry(const Array& data, const std::vector<double>& wavelengths, double pitch) {
    require_ndim(data, 3, "cube");
    return CubeGeometry{static_cast<std::size_t>(data.shape(2)), static_cast<std::size_t>(data.shape(1)),
                        static_cast<std::size_t>(data.shape(0)), wavelengths, pitch};
}

MaskSet mask_set(const Mask& masks) {
    require_ndim(masks, 3, "masks");
    MaskSet m;
    m.K = masks.shape(0);
    m.ny = masks.shape(1);
    m.nx = masks.shape(2);
    m.masks.assign(masks.data(), masks.data() + masks.size());
    for (auto v : m.masks) require(v <= 1, Errc::FormatError, "mask values must be 0 or 1");
    return m;
}

PsfStack psf_from(const Array& kernels, const std::vector<double>& wavelengths) {
    require_ndim(kernels, 4, "kernels");
    PsfStack st;
    st.K = kernels.shape(0);
    st.S = kernels.shape(1);
    st.geometry = CubeGeometry{static_cast<std::size_t>(kernels.shape(3)), static_cast<std::size_t>(kernels.shape(2)),
                               st.S, wavelengths, 10.0};
    st.geometry.validate();
    st.detector_offsets_mm.assign(st.K, 0.0);
    st.kernels = flat(kernels);
    return st;
}

class PySystem {
public:
    PySystem(const Mask& masks, const Array& kernels, const std::vector<double>& wavelengths, std::size_t threads)
        : op_(std::make_shared<SystemOperator>(mask_set(masks), psf_from(kernels, wavelengths),
                                               SystemOptions{threads, false})) {}

    Array forward(const Array& x) const {
        require_ndim(x, 3, "cube");
        const auto& g = op_->geometry();
        return to_array(op_->apply(flat(x)), {static_cast<py::ssize_t>(op_->K()), static_cast<py::ssize_t>(g.ny),
                                              static_cast<py::ssize_t>(g.nx)});
    }
    Array adjoint(const Array& y) const {
        require_ndim(y, 3, "measurements");
        const auto& g = op_->geometry();
        return to_array(op_->apply_adjoint(flat(y)), {static_cast<py::ssize_t>(op_->S()), static_cast<py::ssize_t>(g.ny),
                                                      static_cast<py::ssize_t>(g.nx)});
    }
    std::shared_ptr<SystemOperator> op() const { return op_; }

private:
    std::shared_ptr<SystemOperator> op_;
};

class PyTransform {
public:
    PyTransform(std::size_t ny, std::size_t nx, std::size_t bands, const std::string& wavelet, std::size_t levels)
        : psi_(CubeGeometry{nx, ny, bands, wavelength_grid(1.0, 1.0, bands), 10.0},
               TransformSpec{parse_wavelet(wavelet), levels == 0 ? default_levels(ny, nx) : levels}) {
        psi_.spec().validate(ny, nx);
    }
    Array synthesis(const Array& alpha) const { return apply(alpha, false); }
    Array analysis(const Array& x) const { return apply(x, true); }
    std::size_t levels() const { return psi_.spec().levels; }

private:
    Array apply(const Array& a, bool adjoint) const {
        require_ndim(a, 3, "array");
        const auto& g = psi_.geometry();
        require(static_cast<std::size_t>(a.size()) == g.size(), Errc::DimensionMismatch, "shape does not match transform");
        const auto in = flat(a);
        return to_array(adjoint ? psi_.apply_adjoint(in) : psi_.apply(in),
                        {static_cast<py::ssize_t>(g.bands), static_cast<py::ssize_t>(g.ny), static_cast<py::ssize_t>(g.nx)});
    }
    SparsifyingTransform psi_;
};

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["iterations"] = r.iterations;
    d["final_rel_change"] = r.final_rel_change;
    d["feasibility_residual"] = r.feasibility_residual;
    d["l1_value"] = r.l1_value;
    d["wall_time_s"] = r.wall_time_s;
    d["gamma"] = r.gamma;
    d["cg_iterations"] = r.cg_iterations;
    d["cg_stagnations"] = r.cg_stagnations;
    d["final_cg_converged"] = r.final_cg_converged;
    d["converged"] = r.converged;
    return d;
}

} // namespace

PYBIND11_MODULE(_chromacs, m) {
    m.doc() = "Bindings for the chromacs compressive spectral imaging library";

    static py::exception<Error> error(m, "ChromacsError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("refractive_index", &refractive_index, py::arg("lambda_nm"), py::arg("cauchy_A") = 1.5046,
          py::arg("cauchy_B_um2") = 0.00420);
    m.def(
        "focal_length_mm",
        [](double lambda_nm, double f_ref_mm, double lambda_ref_nm, double A, double B) {
            OpticalPrescription p;
            p.f_ref_mm = f_ref_mm;
            p.lambda_ref_nm = lambda_ref_nm;
            p.cauchy_A = A;
            p.cauchy_B_um2 = B;
            return focal_length_mm(lambda_nm, p);
        },
        py::arg("lambda_nm"), py::arg("f_ref_mm") = 50.0, py::arg("lambda_ref_nm") = 550.0, py::arg("cauchy_A") = 1.5046,
        py::arg("cauchy_B_um2") = 0.00420);

    m.def(
        "psf_stack",
        [](std::size_t ny, std::size_t nx, const std::vector<double>& wavelengths,
           const std::vector<double>& detector_offsets_mm, const std::string& model, std::size_t kernel_halfwidth,
           double aperture_diameter_mm) {
            OpticalPrescription p;
            p.detector_offsets_mm = detector_offsets_mm;
            p.psf_model = parse_psf_model(model);
            p.kernel_halfwidth = kernel_halfwidth;
            p.aperture_diameter_mm = aperture_diameter_mm;
            const auto st = build_psf_stack(p, CubeGeometry{nx, ny, wavelengths.size(), wavelengths, 10.0});
            return to_array(st.kernels, {static_cast<py::ssize_t>(st.K), static_cast<py::ssize_t>(st.S),
                                         static_cast<py::ssize_t>(ny), static_cast<py::ssize_t>(nx)});
        },
        py::arg("ny"), py::arg("nx"), py::arg("wavelengths_nm"),
        py::arg("detector_offsets_mm") = std::vector<double>{-0.25, 0.0, 0.25}, py::arg("model") = "disc",
        py::arg("kernel_halfwidth") = 15, py::arg("aperture_diameter_mm") = 10.0,
        "Synthesised PSF kernels, shape (K, S, ny, nx).");

    m.def(
        "gen_masks",
        [](std::size_t K, std::size_t ny, std::size_t nx, double density, std::uint64_t seed) {
            const auto ms = gen_masks(K, ny, nx, density, seed);
            Mask a({static_cast<py::ssize_t>(K), static_cast<py::ssize_t>(ny), static_cast<py::ssize_t>(nx)});
            std::memcpy(a.mutable_data(), ms.masks.data(), ms.masks.size());
            return a;
        },
        py::arg("K"), py::arg("ny"), py::arg("nx"), py::arg("density") = 0.5, py::arg("seed") = 1);

    m.def(
        "load_cube",
        [](const std::string& path) {
            const auto c = load_cube(path);
            const auto& g = c.geometry();
            return py::make_tuple(to_array(c.data(), {static_cast<py::ssize_t>(g.bands), static_cast<py::ssize_t>(g.ny),
                                                      static_cast<py::ssize_t>(g.nx)}),
                                  g.wavelengths_nm);
        },
        py::arg("path"), "Returns (data of shape (S, ny, nx), wavelengths_nm).");
    m.def(
        "save_cube",
        [](const std::string& path, const Array& data, const std::vector<double>& wavelengths, double pitch) {
            save_cube(make_cube(cube_geometry(data, wavelengths, pitch), flat(data)), path);
        },
        py::arg("path"), py::arg("data"), py::arg("wavelengths_nm"), py::arg("pixel_pitch_um") = 10.0);
    m.def(
        "synthetic_scene",
        [](std::size_t ny, std::size_t nx, const std::vector<double>& wavelengths, std::uint64_t seed) {
            const auto c = synthetic_scene(CubeGeometry{nx, ny, wavelengths.size(), wavelengths, 10.0}, seed);
            return to_array(c.data(), {static_cast<py::ssize_t>(wavelengths.size()), static_cast<py::ssize_t>(ny),
                                       static_cast<py::ssize_t>(nx)});
        },
        py::arg("ny"), py::arg("nx"), py::arg("wavelengths_nm"), py::arg("seed") = 1);

    py::class_<PySystem>(m, "SystemOperator")
        .def(py::init<const Mask&, const Array&, const std::vector<double>&, std::size_t>(), py::arg("masks"),
             py::arg("kernels"), py::arg("wavelengths_nm"), py::arg("threads") = 1)
        .def("forward", &PySystem::forward, py::arg("cube"))
        .def("adjoint", &PySystem::adjoint, py::arg("measurements"));

    py::class_<PyTransform>(m, "Transform")
        .def(py::init<std::size_t, std::size_t, std::size_t, const std::string&, std::size_t>(), py::arg("ny"),
             py::arg("nx"), py::arg("bands"), py::arg("wavelet") = "haar", py::arg("levels") = 0)
        .def("synthesis", &PyTransform::synthesis)
        .def("analysis", &PyTransform::analysis)
        .def_property_readonly("levels", &PyTransform::levels);

    m.def(
        "reconstruct",
        [](const PySystem& system, const Array& y, const std::string& wavelet, std::size_t levels, std::size_t max_iters,
           double gamma, double stop_tol, bool precondition) {
            const auto op = system.op();
            const auto& g = op->geometry();
            auto psi = std::make_shared<SparsifyingTransform>(
                g, TransformSpec{parse_wavelet(wavelet), levels == 0 ? default_levels(g.ny, g.nx) : levels});
            auto A = compose_with_synthesis(op, psi);
            SolverConfig cfg;
            cfg.max_iters = max_iters;
            cfg.gamma = gamma;
            cfg.stop_tol = stop_tol;
            std::unique_ptr<NormalPreconditioner> P;
            if (precondition) P = std::make_unique<NormalPreconditioner>(*op);
            SolveResult res;
            {
                py::gil_scoped_release release;
                res = douglas_rachford(*A, flat(y), cfg, P.get());
            }
            auto x = psi->apply(res.alpha);
            return py::make_tuple(to_array(x, {static_cast<py::ssize_t>(g.bands), static_cast<py::ssize_t>(g.ny),
                                               static_cast<py::ssize_t>(g.nx)}),
                                  report_dict(res.report));
        },
        py::arg("system"), py::arg("measurements"), py::arg("wavelet") = "haar", py::arg("levels") = 0,
        py::arg("max_iters") = 2000, py::arg("gamma") = 0.0, py::arg("stop_tol") = 1e-6, py::arg("precondition") = true,
        "Douglas-Rachford basis pursuit; returns (cube, report).");

    m.def(
        "psnr",
        [](const Array& ref, const Array& est) {
            std::vector<double> wl(ref.ndim() == 3 ? ref.shape(0) : 0);
            for (std::size_t i = 0; i < wl.size(); ++i) wl[i] = static_cast<double>(i + 1);
            const auto g = cube_geometry(ref, wl, 10.0);
            return psnr(make_cube(g, flat(ref)), make_cube(cube_geometry(est, wl, 10.0), flat(est)));
        },
        py::arg("reference"), py::arg("estimate"));
    m.def("compression_ratio", &compression_ratio, py::arg("K"), py::arg("S"));
}
