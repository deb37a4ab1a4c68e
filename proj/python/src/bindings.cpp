#include "finstab/acceptance.hpp"
#include "finstab/scenario.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace finstab;

namespace {

py::dict trajectory_dict(const Trajectory& tr) {
    py::dict d;
    d["times"] = tr.times;
    d["states"] = tr.states;
    d["controls"] = tr.controls;
    d["lyapunov"] = tr.lyapunov;
    d["norms"] = tr.norms;
    d["settling_time"] = tr.settling_time;
    return d;
}

ControllerSpec make_spec(const std::string& variant, double mu, double phi_constant, double dead_zone,
                         std::optional<Vec> zeta, std::optional<Vec> varpi) {
    ControllerSpec s;
    s.variant = control_variant_from_string(variant);
    s.mu = mu;
    s.phi = phi_constant == 0.0 ? PhiSpec::zero() : PhiSpec::constant_value(phi_constant);
    s.dead_zone = dead_zone;
    s.zeta = std::move(zeta);
    s.varpi = std::move(varpi);
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite-time stabilization of bilinear and linear modal systems";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

    py::class_<ModalModel>(m, "ModalModel")
        .def_static("bilinear", &ModalModel::bilinear, py::arg("metric"), py::arg("generator"),
                    py::arg("control_op"), py::arg("labels") = std::vector<std::string>{})
        .def_static("linear", &ModalModel::linear, py::arg("metric"), py::arg("generator"),
                    py::arg("input_map"), py::arg("labels") = std::vector<std::string>{})
        .def_property_readonly("dim", &ModalModel::dim)
        .def_property_readonly("metric", &ModalModel::metric)
        .def_property_readonly("generator", &ModalModel::generator)
        .def_property_readonly("is_bilinear", &ModalModel::is_bilinear);

    m.def("inner", &inner);
    m.def("quasi_contraction_type", py::overload_cast<const ModalModel&>(&quasi_contraction_type));

    py::class_<DecompositionResult>(m, "Decomposition")
        .def_readonly("w_basis", &DecompositionResult::w_basis)
        .def_readonly("wperp_basis", &DecompositionResult::wperp_basis)
        .def_readonly("projection", &DecompositionResult::projection)
        .def_readonly("gamma", &DecompositionResult::gamma)
        .def_readonly("delta", &DecompositionResult::delta)
        .def_readonly("h1_holds", &DecompositionResult::h1_holds);

    m.def("unobservable_subspace", [](const ModalModel& model, bool certified) {
        DecompositionResult d = unobservable_subspace(model);
        if (certified) certify(model, d);
        return d;
    }, py::arg("model"), py::arg("certify") = true);
    m.def("compute_gamma", &compute_gamma);

    py::class_<ControllerSpec>(m, "ControllerSpec")
        .def(py::init(&make_spec), py::arg("variant") = "BilinearPhi", py::arg("mu") = 0.25,
             py::arg("phi_constant") = 0.0, py::arg("dead_zone") = 1e-12, py::arg("zeta") = std::nullopt,
             py::arg("varpi") = std::nullopt)
        .def_readwrite("mu", &ControllerSpec::mu)
        .def_readwrite("dead_zone", &ControllerSpec::dead_zone)
        .def_property_readonly("variant", [](const ControllerSpec& s) { return to_string(s.variant); });

    m.def("control", [](const ControllerSpec& spec, const ModalModel& model, const DecompositionResult& dec,
                        const Vec& y) { return FeedbackLaw(spec, model, dec).evaluate(y).value; });
    m.def("settling_bound", [](const ControllerSpec& spec, const ModalModel& model, const DecompositionResult& dec,
                               const Vec& y0) { return settling_bound(spec, model, dec, y0).value; });

    m.def("simulate", [](const ModalModel& model, const DecompositionResult& dec, const ControllerSpec& spec,
                         const Vec& y0, double t_max, double rtol, double atol) {
        IntegrationOpts o;
        o.t_max = t_max;
        o.rtol = rtol;
        o.atol = atol;
        return trajectory_dict(simulate(model, dec, spec, y0, o));
    }, py::arg("model"), py::arg("dec"), py::arg("spec"), py::arg("y0"), py::arg("t_max") = 1.0,
       py::arg("rtol") = 1e-10, py::arg("atol") = 1e-13);

    m.def("frontend", [](const std::string& kind, int n_modes, int q) {
        FrontendSpec fs;
        fs.kind = frontend_kind_from_string(kind);
        fs.n_modes = n_modes;
        fs.q = q;
        const Frontend fe = build_frontend(fs);
        return py::make_tuple(fe.model, fe.decomposition(), fe.preset);
    }, py::arg("kind"), py::arg("n_modes") = 16, py::arg("q") = 1);

    m.def("run_scenario_json", [](const std::string& text, std::optional<std::string> out_dir) {
        const ScenarioReport rep = run_scenario(parse_scenario(json::parse(text)), out_dir);
        return py::make_tuple(rep.exit_code, rep.summary.dump());
    }, py::arg("config"), py::arg("out_dir") = std::nullopt);

    m.def("acceptance", [](const std::string& filter, double tol_scale) {
        AcceptanceOptions o;
        o.tol_scale = tol_scale;
        py::list out;
        for (const auto& r : run_acceptance(filter, o)) {
            py::dict d;
            d["id"] = r.id;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            out.append(d);
        }
        return out;
    }, py::arg("filter") = "*", py::arg("tol_scale") = 1.0);
}
