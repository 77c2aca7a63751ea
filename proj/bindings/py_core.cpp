#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dhs/abstract.hpp"
#include "dhs/bounds.hpp"
#include "dhs/complex.hpp"
#include "dhs/errors.hpp"
#include "dhs/geometry.hpp"
#include "dhs/report.hpp"
#include "dhs/spectrum.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

dhs::RhsMode parse_mode(const std::string& mode) {
    if (mode == "exact-integral") return dhs::RhsMode::exact;
    if (mode == "geometric-max") return dhs::RhsMode::geometric;
    throw dhs::InputError("unknown mode '" + mode + "'");
}

py::dict batch_dict(const dhs::BatchResult& result) {
    py::list failures;
    for (const auto& f : result.failures)
        failures.append(py::dict("trial"_a = f.trial, "what"_a = f.what, "dump"_a = f.dump));
    return py::dict("name"_a = result.name, "trials"_a = result.trials,
                    "max_violation"_a = result.max_violation, "failures"_a = failures);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "weighted Hodge Laplacian spectra and universal eigenvalue bounds on self-shrinkers";

    auto base = py::register_exception<dhs::Error>(m, "Error");
    py::register_exception<dhs::DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<dhs::TopologyError>(m, "TopologyError", base.ptr());
    py::register_exception<dhs::GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<dhs::CapabilityError>(m, "CapabilityError", base.ptr());
    py::register_exception<dhs::SolverError>(m, "SolverError", base.ptr());
    py::register_exception<dhs::InputError>(m, "InputError", base.ptr());
    py::register_exception<dhs::IdentityError>(m, "IdentityError", base.ptr());

    // geometry
    py::class_<dhs::GeometryBackend>(m, "GeometryBackend")
        .def_property_readonly(
            "kind", [](const dhs::GeometryBackend& b) { return std::string(dhs::to_string(b.kind)); })
        .def_readonly("m", &dhs::GeometryBackend::m)
        .def_readonly("n", &dhs::GeometryBackend::n)
        .def_readonly("curvature_estimated", &dhs::GeometryBackend::curvature_estimated)
        .def_property_readonly("sample_count",
                               [](const dhs::GeometryBackend& b) { return b.samples.size(); })
        .def("weighted_volume", &dhs::GeometryBackend::weighted_volume)
        .def("shrinker_residual",
             [](const dhs::GeometryBackend& b) { return dhs::shrinker_residual(b); });

    m.def(
        "sphere_backend",
        [](int mdim, int ambient_n, int resolution, double radius) {
            return dhs::sphere_backend(mdim, ambient_n > 0 ? ambient_n : mdim + 1, resolution,
                                       radius);
        },
        "m"_a, "ambient_n"_a = -1, "resolution"_a = -1, "radius"_a = 0.0,
        "round sphere of radius sqrt(m) (the drift-stationary one) unless radius is given");
    m.def("mesh_backend", &dhs::mesh_backend, "path"_a,
          "load a surface (.off/.obj) or polyline (.poly/.xy/.txt) file");

    // weighted complex
    py::class_<dhs::WeightedComplex>(m, "WeightedComplex")
        .def_readonly("m", &dhs::WeightedComplex::m)
        .def("cells", &dhs::WeightedComplex::cells, "p"_a)
        .def(
            "d", [](const dhs::WeightedComplex& cx, int p) { return cx.d.at(static_cast<std::size_t>(p)); },
            "p"_a, "incidence matrix d_p")
        .def(
            "mass",
            [](const dhs::WeightedComplex& cx, int p) { return cx.mass.at(static_cast<std::size_t>(p)); },
            "p"_a, "diagonal of the lumped Gaussian mass matrix M_p");
    m.def("build_complex", &dhs::build_complex, "backend"_a);
    m.def("hodge_laplacian", &dhs::hodge_laplacian, "complex"_a, "p"_a,
          "stiffness/mass pair (K_p, M_p) of the weighted Hodge Laplacian");
    m.def("drift_apply", &dhs::drift_apply, "complex"_a, "u"_a);
    m.def("carre_du_champ", &dhs::carre_du_champ, "complex"_a, "u"_a, "v"_a);
    m.def("weighted_quadrature", &dhs::weighted_quadrature, "complex"_a, "p"_a, "cell_values"_a,
          "phi"_a);

    // spectra
    py::class_<dhs::Spectrum>(m, "Spectrum")
        .def_readonly("degree", &dhs::Spectrum::degree)
        .def_readonly("eigenvalues", &dhs::Spectrum::eigenvalues)
        .def_readonly("eigenforms", &dhs::Spectrum::eigenforms)
        .def_readonly("residuals", &dhs::Spectrum::residuals)
        .def_readonly("clusters", &dhs::Spectrum::clusters)
        .def_readonly("analytic", &dhs::Spectrum::analytic)
        .def("to_json", &dhs::spectrum_to_json);
    m.def(
        "solve_spectrum",
        [](const Eigen::SparseMatrix<double>& k, const Eigen::SparseMatrix<double>& mm, int count,
           double tol, std::uint64_t seed) {
            dhs::SolveOptions options;
            options.tol = tol;
            options.seed = seed;
            return dhs::solve_spectrum(k, mm, count, options);
        },
        "K"_a, "M"_a, "count"_a, "tol"_a = 1e-9, "seed"_a = dhs::SolveOptions{}.seed);
    m.def("analytic_sphere_spectrum", &dhs::analytic_sphere_spectrum, "m"_a, "p"_a, "count"_a);
    m.def("coordinate_eigenfunction_check", &dhs::coordinate_eigenfunction_check, "complex"_a,
          "backend"_a);

    // bounds
    m.def("phi", &dhs::phi, "h_sq"_a, "H_sq"_a, "m"_a, "p"_a,
          "curvature correction term of the p-form inequality");
    py::class_<dhs::GeometricTerm>(m, "GeometricTerm")
        .def_readonly("g", &dhs::GeometricTerm::g)
        .def_readonly("min_xsq", &dhs::GeometricTerm::min_xsq)
        .def_readonly("m", &dhs::GeometricTerm::m)
        .def_readonly("p", &dhs::GeometricTerm::p);
    m.def("geometric_term", &dhs::geometric_term, "backend"_a, "p"_a);
    m.def("rhs_exact_closed_form", &dhs::rhs_exact_closed_form, "lam"_a, "backend"_a, "p"_a);
    m.def("rhs_geometric", &dhs::rhs_geometric, "lam"_a, "m"_a, "p"_a, "g"_a);
    m.def("yang_bound", &dhs::yang_bound, "eigenvalues"_a, "D"_a, "m"_a);
    m.def("yang_check", &dhs::yang_check, "spectrum"_a, "D"_a, "m"_a, "k"_a);
    m.def("gap_bound", &dhs::gap_bound, "eigenvalues"_a, "m"_a, "g"_a);
    m.def("lp_check", &dhs::lp_check, "spectrum"_a, "D_i"_a, "m"_a, "i"_a);
    m.def("lp_bound", &dhs::lp_bound, "lam"_a, "m"_a, "p"_a, "g"_a);
    m.def("cheng_yang_bound", &dhs::cheng_yang_bound, "mu_1"_a, "m"_a, "k"_a);

    py::class_<dhs::BoundRow>(m, "BoundRow")
        .def_readonly("inequality", &dhs::BoundRow::inequality)
        .def_readonly("p", &dhs::BoundRow::p)
        .def_readonly("index", &dhs::BoundRow::index)
        .def_readonly("bound", &dhs::BoundRow::bound)
        .def_readonly("observed", &dhs::BoundRow::observed)
        .def_readonly("slack", &dhs::BoundRow::slack)
        .def_readonly("passed", &dhs::BoundRow::pass)
        .def_readonly("mode", &dhs::BoundRow::mode);
    py::class_<dhs::BoundProvenance>(m, "BoundProvenance")
        .def_readonly("m", &dhs::BoundProvenance::m)
        .def_readonly("p", &dhs::BoundProvenance::p)
        .def_readonly("mode", &dhs::BoundProvenance::mode)
        .def_readonly("g", &dhs::BoundProvenance::g)
        .def_readonly("min_xsq", &dhs::BoundProvenance::min_xsq)
        .def_readonly("uniform_c", &dhs::BoundProvenance::uniform_c)
        .def_readonly("tolerance", &dhs::BoundProvenance::tolerance);
    py::class_<dhs::BoundReport>(m, "BoundReport")
        .def_readonly("rows", &dhs::BoundReport::rows)
        .def_readonly("provenance", &dhs::BoundReport::provenance)
        .def("all_pass", &dhs::BoundReport::all_pass);
    m.def(
        "bound_suite",
        [](const dhs::Spectrum& sp, const dhs::GeometryBackend& bk, const dhs::WeightedComplex* cx,
           const std::string& mode, int k_max, double tolerance, bool classical) {
            dhs::SuiteOptions options;
            options.mode = parse_mode(mode);
            options.k_max = k_max;
            options.tolerance = tolerance;
            options.classical = classical;
            return dhs::bound_suite(sp, bk, cx, options);
        },
        "spectrum"_a, "backend"_a, "complex"_a = static_cast<const dhs::WeightedComplex*>(nullptr),
        "mode"_a = "exact-integral", "k_max"_a = 50, "tolerance"_a = 1e-9, "classical"_a = false);
    m.def("bound_report_csv", &dhs::bound_report_csv, "report"_a);
    m.def("bound_report_json", &dhs::bound_report_json, "report"_a);

    // operator identities
    m.def("commutator", &dhs::commutator, "a"_a, "b"_a);
    m.def(
        "ah_check",
        [](const Eigen::MatrixXd& a, const std::vector<Eigen::MatrixXd>& bs, int k) {
            dhs::AhResult res = dhs::ah_check(dhs::OperatorPair(a, bs), k);
            return py::make_tuple(res.lhs, res.rhs, res.slack);
        },
        "a"_a, "perturbers"_a, "k"_a, "returns (lhs, rhs, slack) of the trace inequality");
    m.def(
        "commutator_terms",
        [](const Eigen::MatrixXd& a, const std::vector<Eigen::MatrixXd>& bs, int count) {
            dhs::CommutatorTerms terms = dhs::commutator_terms(dhs::OperatorPair(a, bs), count);
            return py::make_tuple(terms.rho, terms.gain);
        },
        "a"_a, "perturbers"_a, "count"_a, "returns (rho, gain) per eigenvector");
    m.def("lpt_identity_residual", &dhs::lpt_identity_residual, "L"_a, "G"_a, "j"_a);
    m.def(
        "triangularize_coupling",
        [](const Eigen::MatrixXd& l, const std::vector<Eigen::MatrixXd>& gs, int i) {
            dhs::CouplingRotation rot = dhs::triangularize_coupling(l, gs, i);
            return py::dict("rotated"_a = rot.rotated, "rotation"_a = rot.rotation,
                            "coupling"_a = rot.coupling, "deficient"_a = rot.deficient);
        },
        "L"_a, "Gs"_a, "i"_a);
    m.def(
        "ah_batch",
        [](int trials, std::uint64_t seed, int n_max, int threads) {
            return batch_dict(dhs::ah_batch(trials, seed, n_max, threads));
        },
        "trials"_a, "seed"_a, "n_max"_a = 12, "threads"_a = 1);
    m.def(
        "lpt_batch",
        [](int trials, std::uint64_t seed, int n_max, int threads) {
            return batch_dict(dhs::lpt_batch(trials, seed, n_max, threads));
        },
        "trials"_a, "seed"_a, "n_max"_a = 12, "threads"_a = 1);
    m.def(
        "triangularize_batch",
        [](int trials, std::uint64_t seed, int n_max, int threads) {
            return batch_dict(dhs::triangularize_batch(trials, seed, n_max, threads));
        },
        "trials"_a, "seed"_a, "n_max"_a = 12, "threads"_a = 1);
}
