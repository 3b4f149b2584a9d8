#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qat/errors.hpp"
#include "qat/spectra.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

PYBIND11_MODULE(_qatlab, m) {
    m.doc() = "Quantum Arnold transformation for linear second-order systems";

    py::register_exception<qat::Error>(m, "QatError", PyExc_RuntimeError);

    py::class_<qat::PresetParams>(m, "PresetParams")
        .def(py::init<>())
        .def_readwrite("gamma", &qat::PresetParams::gamma)
        .def_readwrite("omega", &qat::PresetParams::omega)
        .def_readwrite("force_amplitude", &qat::PresetParams::force_amplitude)
        .def_readwrite("force_frequency", &qat::PresetParams::force_frequency)
        .def_readwrite("mass", &qat::PresetParams::mass)
        .def_readwrite("hbar", &qat::PresetParams::hbar);

    py::class_<qat::LsodeSpec>(m, "LsodeSpec")
        .def_readonly("mass", &qat::LsodeSpec::mass)
        .def_readonly("hbar", &qat::LsodeSpec::hbar)
        .def_readonly("label", &qat::LsodeSpec::label)
        .def("f", &qat::LsodeSpec::f)
        .def("omega_sq", &qat::LsodeSpec::w2)
        .def("forcing", &qat::LsodeSpec::lambda)
        .def_property_readonly("forced", &qat::LsodeSpec::forced);

    m.def("make_preset", &qat::make_preset, "name"_a, "params"_a = qat::PresetParams{});
    m.def("preset_names", &qat::preset_names);

    py::class_<qat::Grid>(m, "Grid")
        .def(py::init<double, double, int>(), "x_min"_a, "x_max"_a, "n"_a)
        .def_readonly("x_min", &qat::Grid::x_min)
        .def_readonly("x_max", &qat::Grid::x_max)
        .def_readonly("n", &qat::Grid::n)
        .def_property_readonly("dx", &qat::Grid::dx)
        .def("points", &qat::Grid::points);

    py::enum_<qat::Frame>(m, "Frame").value("Lsode", qat::Frame::Lsode).value("Free", qat::Frame::Free);

    py::class_<qat::WaveFunction>(m, "WaveFunction")
        .def(py::init<const qat::Grid&, qat::CVec, double, qat::Frame>(), "grid"_a, "psi"_a,
             "time"_a = 0.0, "frame"_a = qat::Frame::Lsode)
        .def_readonly("grid", &qat::WaveFunction::grid)
        .def_readwrite("psi", &qat::WaveFunction::psi)
        .def_readwrite("time", &qat::WaveFunction::time)
        .def_readwrite("frame", &qat::WaveFunction::frame)
        .def("norm", &qat::WaveFunction::norm);

    m.def("gaussian", &qat::gaussian, "grid"_a, "x0"_a, "p0"_a, "sigma"_a, "hbar"_a = 1.0);
    m.def("plane_wave", &qat::plane_wave, "grid"_a, "k"_a);
    m.def("inner", &qat::inner);
    m.def("l2_distance", &qat::l2_distance);
    m.def("free_evolve", &qat::free_evolve, "psi"_a, "tau"_a, "m"_a = 1.0, "hbar"_a = 1.0);

    py::class_<qat::QatContext>(m, "QatContext")
        .def_property_readonly("spec", &qat::QatContext::spec)
        .def_property_readonly("window", [](const qat::QatContext& c) {
            return py::make_tuple(c.window().lo, c.window().hi);
        })
        .def("map_time", &qat::QatContext::map_time)
        .def("inverse_time", &qat::QatContext::inverse_time)
        .def("basis", [](const qat::QatContext& c, double t) {
            const qat::QatPoint q = c.at(t);
            return py::dict("u1"_a = q.b.u1, "u2"_a = q.b.u2, "up"_a = q.up, "du1"_a = q.b.du1,
                            "du2"_a = q.b.du2, "dup"_a = q.dup, "W"_a = q.W, "tau"_a = q.tau);
        });

    m.def("make_context", &qat::make_context, "spec"_a, "t_max"_a, "t_min"_a = 0.0);
    m.def("extend_window", &qat::extend_window, "ctx"_a, "t_target"_a);
    m.def("qat_forward", &qat::qat_forward, "ctx"_a, "phi"_a, "check_support"_a = true);
    m.def("qat_inverse", &qat::qat_inverse, "ctx"_a, "varphi"_a, "check_support"_a = true);
    m.def("evolve_qat_exact", &qat::evolve_qat_exact, "ctx"_a, "psi0"_a, "t"_a,
          "check_support"_a = true);
    m.def("evolve_crank_nicolson", &qat::evolve_crank_nicolson, "spec"_a, "psi0"_a, "t"_a,
          "dt"_a = 1e-4);
    m.def("schrodinger_residual", &qat::schrodinger_residual, "spec"_a, "series"_a);

    m.def("commutator_table", [](const qat::QatContext& ctx, double t, const qat::Grid& g) {
        py::dict out;
        for (const auto& e : qat::commutator_table(ctx, t, g)) out[py::str(e.name)] = e.error;
        return out;
    });

    py::class_<qat::HStarParams>(m, "HStarParams")
        .def(py::init<double, double>(), "omega_tilde"_a, "gamma_tilde"_a)
        .def_readonly("omega_tilde", &qat::HStarParams::omega_tilde)
        .def_readonly("gamma_tilde", &qat::HStarParams::gamma_tilde)
        .def_property_readonly("Omega_tilde", &qat::HStarParams::Omega_tilde);

    m.def("hstar_eigenvalue", &qat::hstar_eigenvalue, "params"_a, "nu"_a, "hbar"_a = 1.0);
    m.def("eigenfunction_phi_n",
          [](const qat::QatContext& ctx, const qat::HStarParams& p, int n, double t,
             const qat::Grid& g) { return qat::eigenfunction_phi_n(ctx, p, n, t, g); },
          "ctx"_a, "params"_a, "n"_a, "t"_a, "grid"_a);
    m.def("rayleigh_quotients", &qat::rayleigh_quotients, "ctx"_a, "params"_a, "n_max"_a, "t"_a,
          "grid"_a);
    m.def("parabolic_cylinder_D", &qat::parabolic_cylinder_D, "nu"_a, "z"_a);
}
