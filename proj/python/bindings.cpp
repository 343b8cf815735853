#include <limits>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phg/cli.hpp"
#include "phg/directions.hpp"
#include "phg/error.hpp"
#include "phg/eval.hpp"
#include "phg/io.hpp"
#include "phg/system.hpp"
#include "phg/tracker.hpp"

namespace py = pybind11;
using namespace phg;

namespace {

PyObject* g_base = nullptr;
PyObject* g_zero = nullptr;
PyObject* g_overflow = nullptr;

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

// Wraps a system together with its homogenization and evaluation tables.
struct PySystem {
    LaurentSystem sys;
    HomogenizedSystem hom;
    HomotopyTables tables;

    explicit PySystem(LaurentSystem s) : sys(std::move(s)), hom(homogenize(sys)), tables(build_tables(hom)) {}
};

std::shared_ptr<const Backend> backend_of(const std::optional<std::string>& name) {
    return name ? make_backend(*name) : default_backend();
}

ComplexMatrix matrix_from(const CArray& a, std::size_t cols) {
    if (a.ndim() == 1) {
        if (static_cast<std::size_t>(a.shape(0)) != cols)
            throw ShapeError("point has " + std::to_string(a.shape(0)) + " coordinates, expected " +
                             std::to_string(cols));
        return ComplexMatrix(1, cols, std::vector<Complex>(a.data(), a.data() + cols));
    }
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != cols)
        throw ShapeError("points must have shape (p, " + std::to_string(cols) + ")");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    return ComplexMatrix(rows, cols, std::vector<Complex>(a.data(), a.data() + rows * cols));
}

py::array_t<Complex> array_from(const ComplexMatrix& m) {
    py::array_t<Complex> out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

py::array_t<Complex> vector_array(std::span<const Complex> v) {
    py::array_t<Complex> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> taus_for(const py::object& tau, std::size_t p) {
    if (py::isinstance<py::float_>(tau) || py::isinstance<py::int_>(tau))
        return std::vector<double>(p, tau.cast<double>());
    auto v = tau.cast<std::vector<double>>();
    if (v.size() != p) throw ShapeError("got " + std::to_string(v.size()) + " tau values for " + std::to_string(p) + " points");
    return v;
}

PointBatch batch_of(const PySystem& s, const CArray& y, const py::object& tau) {
    ComplexMatrix m = matrix_from(y, s.hom.N());
    const std::size_t p = m.rows();
    return make_point_batch(std::move(m), taus_for(tau, p));
}

py::dict result_dict(const TrackResult& r) {
    py::dict d;
    d["status"] = std::string(to_string(r.status));
    d["y"] = vector_array(r.y);
    d["tau"] = r.tau;
    d["at_infinity"] = r.at_infinity;
    d["x"] = r.at_infinity ? py::object(py::none()) : py::object(vector_array(r.x));
    d["residual"] = r.residual;
    d["steps"] = r.steps_taken;
    d["newton_iters"] = r.newton_iters_total;
    return d;
}

}  // namespace

PYBIND11_MODULE(_phg, m) {
    m.doc() = "Batched polyhedral homotopy evaluation and path tracking";

    auto& base = py::register_exception<Error>(m, "PhgError");
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    auto& zero = py::register_exception<ZeroCoordinate>(m, "ZeroCoordinate", base.ptr());
    auto& overflow = py::register_exception<MonomialOverflow>(m, "MonomialOverflow", base.ptr());
    py::register_exception<SingularJacobian>(m, "SingularJacobian", base.ptr());
    py::register_exception<DegenerateTangent>(m, "DegenerateTangent", base.ptr());
    py::register_exception<StartPointInvalid>(m, "StartPointInvalid", base.ptr());
    g_base = base.ptr();
    g_zero = zero.ptr();
    g_overflow = overflow.ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SubBatchError& e) {
            try {
                e.rethrow_inner();
            } catch (const ZeroCoordinate& inner) {
                PyErr_SetString(g_zero, inner.what());
            } catch (const MonomialOverflow& inner) {
                PyErr_SetString(g_overflow, inner.what());
            } catch (const Error& inner) {
                PyErr_SetString(g_base, inner.what());
            }
        }
    });

    py::class_<PySystem, std::shared_ptr<PySystem>>(m, "System")
        .def_static("from_json", [](const std::string& text) { return std::make_shared<PySystem>(parse_system(text)); })
        .def("to_json", [](const PySystem& s) { return serialize_system(s.sys); })
        .def_property_readonly("n", [](const PySystem& s) { return s.sys.n(); })
        .def_property_readonly("m", [](const PySystem& s) { return s.sys.m(); })
        .def_property_readonly("N", [](const PySystem& s) { return s.hom.N(); })
        .def_property_readonly("degree", [](const PySystem& s) { return s.hom.degree; })
        .def_property_readonly("support", [](const PySystem& s) { return s.sys.support(); })
        .def_property_readonly("coefficients", [](const PySystem& s) { return array_from(s.sys.coefficients()); })
        .def_property_readonly("lifting", [](const PySystem& s) { return s.sys.lifting_values(); })
        .def(
            "evaluate_affine",
            [](const PySystem& s, const std::vector<Complex>& x, double tau) { return s.sys.evaluate(x, tau); },
            py::arg("x"), py::arg("tau") = 0.0)
        .def("__repr__", [](const PySystem& s) {
            return "<phg.System n=" + std::to_string(s.sys.n()) + " m=" + std::to_string(s.sys.m()) + ">";
        });

    m.def("backends", &available_backends);

    m.def(
        "gen_cyclic", [](int n, std::uint64_t seed) { return std::make_shared<PySystem>(gen_cyclic(n, {seed, {}})); },
        py::arg("n"), py::arg("seed") = 0);
    m.def(
        "gen_chandra",
        [](int n, double c, std::uint64_t seed) { return std::make_shared<PySystem>(gen_chandra(n, c, {seed, {}})); },
        py::arg("n"), py::arg("c") = 0.51234, py::arg("seed") = 0);
    m.def(
        "gen_random",
        [](int n, int mm, int min_exponent, int max_exponent, std::uint64_t seed, double max_lifting) {
            return std::make_shared<PySystem>(gen_random({n, mm, min_exponent, max_exponent, seed, max_lifting}));
        },
        py::arg("n"), py::arg("m"), py::arg("min_exponent") = 0, py::arg("max_exponent") = 2, py::arg("seed") = 0,
        py::arg("max_lifting") = 1.0);

    m.def(
        "seeded_starts",
        [](const PySystem& s, std::size_t points, double tau0, std::uint64_t seed) {
            auto out = seeded_on_path_starts(s.sys, points, tau0, seed);
            return py::make_tuple(std::make_shared<PySystem>(std::move(out.system)), array_from(out.starts.y));
        },
        py::arg("system"), py::arg("points"), py::arg("tau0") = -20.0, py::arg("seed") = 0);

    m.def(
        "evaluate",
        [](const PySystem& s, const CArray& y, const py::object& tau, std::optional<std::string> backend,
           std::size_t batch_size) {
            const PointBatch pts = batch_of(s, y, tau);
            const auto be = backend_of(backend);
            ExtendedJacobianBatch jac;
            {
                py::gil_scoped_release release;
                jac = evaluate_batch(pts, s.tables, *be, EvalOptions{batch_size, 1});
            }
            py::array_t<Complex> out({jac.size(), jac.equations, jac.block_cols()});
            std::copy(jac.data.values().begin(), jac.data.values().end(), out.mutable_data());
            return out;
        },
        py::arg("system"), py::arg("y"), py::arg("tau") = 0.0, py::arg("backend") = py::none(),
        py::arg("batch_size") = 0);

    m.def(
        "oracle",
        [](const PySystem& s, const std::vector<Complex>& y, double tau) {
            if (y.size() != s.hom.N()) throw ShapeError("point has the wrong length");
            return array_from(eval_scalar_oracle(y, tau, s.hom));
        },
        py::arg("system"), py::arg("y"), py::arg("tau") = 0.0);

    m.def(
        "directions",
        [](const PySystem& s, const CArray& y, const py::object& tau, std::optional<std::string> backend) {
            const PointBatch pts = batch_of(s, y, tau);
            const auto be = backend_of(backend);
            const auto jac = evaluate_batch(pts, s.tables, *be);
            std::vector<BorderedJacobian> bordered;
            for (std::size_t i = 0; i < pts.size(); ++i) bordered.push_back(assemble_bordered(jac.block(i), pts.y.row(i)));
            const auto pairs = euler_newton_unified(bordered, *be);
            ComplexMatrix e(pts.size(), pts.dim()), nv(pts.size(), pts.dim());
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                std::copy(pairs[i].euler.begin(), pairs[i].euler.end(), e.row(i).begin());
                std::copy(pairs[i].newton.begin(), pairs[i].newton.end(), nv.row(i).begin());
            }
            return py::make_tuple(array_from(e), array_from(nv));
        },
        py::arg("system"), py::arg("y"), py::arg("tau") = 0.0, py::arg("backend") = py::none());

    m.def(
        "track",
        [](const PySystem& s, const CArray& y, double tau0, std::optional<std::size_t> fixed_steps,
           std::optional<int> newton_iters, bool skip_start_check, bool retrace, std::optional<std::string> backend,
           std::size_t batch_size) {
            const ComplexMatrix ym = matrix_from(y, s.hom.N());
            const std::size_t p = ym.rows();
            const PointBatch pts = make_point_batch(ym, std::vector<double>(p, tau0));
            TrackOptions o;
            o.tau0 = tau0;
            o.skip_start_check = skip_start_check;
            o.eval.batch_size = batch_size;
            if (fixed_steps) {
                o.fixed_step_mode = true;
                o.fixed_steps = *fixed_steps;
            }
            if (newton_iters) o.newton_max_iters = *newton_iters;
            const auto be = backend_of(backend);
            std::vector<TrackResult> results;
            std::vector<double> errors;
            {
                py::gil_scoped_release release;
                results = track_batch(pts, s.tables, o, *be);
                if (retrace)
                    for (const auto& r : results)
                        errors.push_back(r.status == PathStatus::converged ? retrace_check(r, s.tables, o, *be)
                                                                           : std::numeric_limits<double>::infinity());
            }
            py::list out;
            for (std::size_t i = 0; i < results.size(); ++i) {
                py::dict d = result_dict(results[i]);
                if (retrace) d["retrace_error"] = errors[i];
                out.append(d);
            }
            return out;
        },
        py::arg("system"), py::arg("y"), py::arg("tau0") = -20.0, py::arg("fixed_steps") = py::none(),
        py::arg("newton_iters") = py::none(), py::arg("skip_start_check") = false, py::arg("retrace") = false,
        py::arg("backend") = py::none(), py::arg("batch_size") = 0);

    m.def("chordal_distance", [](const std::vector<Complex>& a, const std::vector<Complex>& b) {
        return chordal_distance(a, b);
    });
}
