#include "soliton_forge/dressing.hpp"
#include "soliton_forge/gsge.hpp"
#include "soliton_forge/io.hpp"
#include "soliton_forge/isothermic.hpp"
#include "soliton_forge/sge.hpp"
#include "soliton_forge/surfaces.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace soliton_forge;

namespace {

std::vector<py::ssize_t> shape_of(const GridSpec& g)
{
    return std::vector<py::ssize_t>(g.dims.begin(), g.dims.end());
}

py::array_t<double> scalar_array(const ScalarField& f)
{
    py::array_t<double> a(shape_of(f.grid));
    std::copy(f.values.begin(), f.values.end(), a.mutable_data());
    return a;
}

ScalarField scalar_field(const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> a)
{
    if (static_cast<std::size_t>(a.size()) != g.size()) throw Error("array size does not match grid");
    return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

template <class M>
py::array matrix_array(const Field<M>& f)
{
    using T = typename M::Scalar;
    auto shape = shape_of(f.grid);
    const auto r = f.values.empty() ? 0 : f.values[0].rows();
    const auto c = f.values.empty() ? 0 : f.values[0].cols();
    shape.push_back(r);
    shape.push_back(c);
    py::array_t<T> a(shape);
    T* out = a.mutable_data();
    for (const M& m : f.values)
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) *out++ = m(i, j);
    return a;
}

py::array points_array(const PointField& f)
{
    auto shape = shape_of(f.grid);
    const auto d = f.values.empty() ? 0 : f.values[0].size();
    shape.push_back(d);
    py::array_t<double> a(shape);
    double* out = a.mutable_data();
    for (const Vec& v : f.values)
        for (Eigen::Index i = 0; i < d; ++i) *out++ = v(i);
    return a;
}

py::dict report_dict(const surfaces::SurfaceReport& r)
{
    py::dict d;
    d["E"] = scalar_array(r.E);
    d["F"] = scalar_array(r.F);
    d["G"] = scalar_array(r.G);
    d["L"] = scalar_array(r.L);
    d["M"] = scalar_array(r.M);
    d["N"] = scalar_array(r.N);
    d["K"] = scalar_array(r.K);
    d["normal"] = points_array(r.normal);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Soliton and integrable-geometry toolkit";
    m.attr("__version__") = io::tool_version;
    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<std::vector<int>, std::vector<double>, std::vector<double>>(), py::arg("dims"),
             py::arg("origin"), py::arg("spacing"))
        .def_static("box", &GridSpec::box, py::arg("lo"), py::arg("hi"), py::arg("h"))
        .def_readonly("dims", &GridSpec::dims)
        .def_readonly("origin", &GridSpec::origin)
        .def_readonly("spacing", &GridSpec::spacing)
        .def_property_readonly("ndim", &GridSpec::ndim)
        .def_property_readonly("size", &GridSpec::size)
        .def("coords", [](const GridSpec& g, int axis) {
            std::vector<double> x(g.dims.at(axis));
            for (int i = 0; i < g.dims[axis]; ++i) x[i] = g.coord(axis, i);
            return x;
        });

    // sine-Gordon
    auto sge_m = m.def_submodule("sge");
    py::class_<sge::SgeSolution>(sge_m, "SgeSolution")
        .def_property_readonly("q", [](const sge::SgeSolution& s) { return scalar_array(s.q); })
        .def_property_readonly("grid", [](const sge::SgeSolution& s) { return s.q.grid; })
        .def_readonly("mu_history", &sge::SgeSolution::mu_history)
        .def_readonly("residual", &sge::SgeSolution::residual)
        .def_readonly("verified", &sge::SgeSolution::verified)
        .def_readonly("diagnostics", &sge::SgeSolution::diagnostics);
    sge_m.def("from_array", [](const GridSpec& g, py::array_t<double> q, std::vector<double> mus) {
        return sge::make_solution(scalar_field(g, q), std::move(mus));
    }, py::arg("grid"), py::arg("q"), py::arg("mu_history") = std::vector<double>{});
    sge_m.def("vacuum", &sge::vacuum);
    sge_m.def("one_soliton", &sge::one_soliton, py::arg("grid"), py::arg("mu"));
    sge_m.def("residual", [](const sge::SgeSolution& q, int acc) { return max_abs(sge::sge_residual(q.q, acc)); },
              py::arg("q"), py::arg("accuracy") = 2);
    sge_m.def("backlund", [](const sge::SgeSolution& q, double mu, double qstar0, int substeps) {
        sge::BacklundOptions o;
        o.substeps = substeps;
        return sge::backlund(q, mu, qstar0, o);
    }, py::arg("q"), py::arg("mu"), py::arg("qstar0"), py::arg("substeps") = 1);
    sge_m.def("bt_residual", [](const sge::SgeSolution& q, const sge::SgeSolution& qs, double mu) {
        return sge::bt_residual(q.q, qs.q, mu).max();
    });
    sge_m.def("permutability", [](const sge::SgeSolution& q0, const sge::SgeSolution& q1, const sge::SgeSolution& q2,
                                  double mu1, double mu2) { return sge::permutability(q0, q1, q2, mu1, mu2); });
    sge_m.def("multi_soliton", &sge::multi_soliton, py::arg("grid"), py::arg("mus"));

    // surfaces
    auto srf = m.def_submodule("surfaces");
    srf.def("expected_curvature", &surfaces::expected_curvature);
    srf.def("sym_immersion", [](const sge::SgeSolution& q, double r, double dlambda) {
        surfaces::SymOptions o;
        o.dlambda = dlambda;
        const auto f = surfaces::sym_immersion(q, r, o);
        return py::make_tuple(points_array(f.points), report_dict(surfaces::fundamental_forms(f)));
    }, py::arg("q"), py::arg("r"), py::arg("dlambda") = 1e-4);
    srf.def("dressing_bt_surface", [](const sge::SgeSolution& q, double s, Eigen::Vector2d direction) {
        const auto r = surfaces::dressing_bt_surface(q, s, direction);
        py::dict d;
        d["qhat"] = r.qhat;
        d["f"] = points_array(r.f.points);
        d["fhat"] = points_array(r.fhat.points);
        d["distance"] = scalar_array(r.distance);
        d["normal_component"] = scalar_array(r.normal_component);
        d["expected_distance"] = r.expected_distance;
        return d;
    }, py::arg("q"), py::arg("s"), py::arg("direction"));

    // generalized sine-Gordon
    auto gm = m.def_submodule("gsge");
    py::class_<gsge::GsgeState>(gm, "GsgeState")
        .def_property_readonly("A", [](const gsge::GsgeState& s) { return matrix_array(s.A); })
        .def_property_readonly("F", [](const gsge::GsgeState& s) { return matrix_array(s.F); })
        .def_property_readonly("n", &gsge::GsgeState::n)
        .def_property_readonly("residual", [](const gsge::GsgeState& s) { return s.residual.max(); })
        .def_readonly("orthogonality", &gsge::GsgeState::orthogonality)
        .def_readonly("verified", &gsge::GsgeState::verified)
        .def_readonly("diagnostics", &gsge::GsgeState::diagnostics);
    gm.def("vacuum", &gsge::vacuum, py::arg("grid"), py::arg("n"));
    gm.def("lambda_from_theta", &gsge::lambda_from_theta);
    gm.def("backlund", [](const gsge::GsgeState& s, double lambda, const RMat& X0, int substeps) {
        gsge::BacklundOptions o;
        o.substeps = substeps;
        return gsge::backlund(s, lambda, X0, o);
    }, py::arg("seed"), py::arg("lam"), py::arg("X0"), py::arg("substeps") = 1);
    gm.def("linear_backlund", [](const gsge::GsgeState& s, double lambda, const RMat& X0, int substeps) {
        const auto n = X0.rows();
        RMat y0(n, 2 * n);
        y0 << X0, -RMat::Identity(n, n);
        gsge::BacklundOptions o;
        o.substeps = substeps;
        return gsge::linear_backlund(s, lambda, y0, o);
    }, py::arg("seed"), py::arg("lam"), py::arg("X0"), py::arg("substeps") = 1);
    gm.def("permutability", &gsge::permutability);
    gm.def("bt_residual", [](const gsge::GsgeState& seed, const gsge::GsgeState& out, double lambda) {
        return gsge::bt_residual(seed, out.A, lambda);
    });

    // U(n) dressing
    auto dm = m.def_submodule("dressing");
    py::class_<dressing::UnSolution>(dm, "UnSolution")
        .def_property_readonly("v", [](const dressing::UnSolution& s) { return matrix_array(s.v); })
        .def_property_readonly("n", &dressing::UnSolution::n)
        .def_readonly("real_form", &dressing::UnSolution::real_form)
        .def_readonly("residual", &dressing::UnSolution::residual)
        .def_readonly("verified", &dressing::UnSolution::verified)
        .def_readonly("diagnostics", &dressing::UnSolution::diagnostics);
    py::class_<dressing::SimpleElement>(dm, "SimpleElement")
        .def_readonly("alpha", &dressing::SimpleElement::alpha)
        .def_readonly("pi", &dressing::SimpleElement::pi)
        .def("__call__", [](const dressing::SimpleElement& g, cd l) { return dressing::eval_simple(g, l); });
    dm.def("vacuum", &dressing::vacuum, py::arg("grid"), py::arg("n"), py::arg("real_form") = false);
    dm.def("make_simple", &dressing::make_simple, py::arg("alpha"), py::arg("pi"));
    dm.def("projection_onto", [](const Mat& w) { return dressing::projection_onto(w); });
    dm.def("dress", [](const dressing::UnSolution& s, const dressing::SimpleElement& g, const std::string& method,
                       int substeps) {
        dressing::OdeOptions o;
        o.substeps = substeps;
        if (method == "ode") return dressing::dress_ode(s, g, g.pi, o).solution;
        if (method == "linear") return dressing::dress_linear(s, g, Mat(), o).solution;
        if (method != "algebraic") throw Error("method must be algebraic, ode or linear");
        bool zero = true;
        for (const Mat& v : s.v.values) zero = zero && v.isZero(0.0);
        const auto E = zero ? dressing::vacuum_frame(s.v.grid) : dressing::integrated_frame(s);
        return dressing::dress_algebraic(s, E, g).solution;
    }, py::arg("solution"), py::arg("g"), py::arg("method") = "algebraic", py::arg("substeps") = 1);
    dm.def("loop_permutability", &dressing::loop_permutability);

    // isothermic
    auto im = m.def_submodule("isothermic");
    py::class_<isothermic::IsothermicData>(im, "IsothermicData")
        .def_property_readonly("q", [](const isothermic::IsothermicData& d) { return scalar_array(d.q); })
        .def_property_readonly("r1", [](const isothermic::IsothermicData& d) { return scalar_array(d.r1); })
        .def_property_readonly("r2", [](const isothermic::IsothermicData& d) { return scalar_array(d.r2); })
        .def_property_readonly("residual", [](const isothermic::IsothermicData& d) { return d.residual.max(); })
        .def_readonly("verified", &isothermic::IsothermicData::verified);
    im.def("plane", &isothermic::plane);
    im.def("cylinder", &isothermic::cylinder);
    im.def("sphere", &isothermic::sphere);
    im.def("christoffel_dual_data", &isothermic::christoffel_dual_data);
    im.def("christoffel_pair", [](const isothermic::IsothermicData& d, int method) {
        const auto p = method == 2 ? isothermic::christoffel_pair_method2(d) : isothermic::christoffel_pair_method1(d);
        const auto r = isothermic::verify_pair(p, d);
        py::dict rep;
        rep["first_form_f"] = r.first_form_f;
        rep["first_form_dual"] = r.first_form_dual;
        rep["second_form_f"] = r.second_form_f;
        rep["second_form_dual"] = r.second_form_dual;
        rep["conformality"] = r.conformality;
        rep["passed"] = r.passed;
        return py::make_tuple(points_array(p.f.points), points_array(p.f_dual.points), rep);
    }, py::arg("data"), py::arg("method") = 1);
}
