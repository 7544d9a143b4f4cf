#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "freedyson/entropy.hpp"
#include "freedyson/error.hpp"
#include "freedyson/langevin.hpp"
#include "freedyson/mapcount.hpp"
#include "freedyson/ncpoly.hpp"
#include "freedyson/onematrix.hpp"
#include "freedyson/sdsolver.hpp"

namespace py = pybind11;
using namespace freedyson;

namespace {

py::object big(const BigInt& n) { return py::module_::import("builtins").attr("int")(n.str()); }

Word word_arg(const std::string& text, int letters = 0) { return parse_word(text, letters); }

StarSystem star_system(const std::string& stars, const std::string& observable, int letters) {
    StarSystem s;
    s.stars = parse_star_list(stars, letters);
    s.letters = std::max(1, letters);
    for (const auto& [q, k] : s.stars) s.letters = std::max(s.letters, q.max_index());
    if (!observable.empty()) {
        s.observable = parse_word(observable, letters);
        s.letters = std::max(s.letters, s.observable->max_index());
    }
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-matrix models: non-commutative calculus, Schwinger-Dyson solvers, map counts, Langevin sampling";

    // Later registrations are tried first, so the base class goes first.
    const auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());

    // ncpoly
    py::class_<NCPoly>(m, "NCPoly")
        .def(py::init([](const std::string& text, int letters) { return parse_poly(text, letters); }), py::arg("text"),
             py::arg("letters") = 0)
        .def_property_readonly("letters", &NCPoly::letters)
        .def_property_readonly("degree", &NCPoly::degree)
        .def("__str__", [](const NCPoly& p) { return to_string(p); })
        .def("__repr__", [](const NCPoly& p) { return "NCPoly('" + to_string(p) + "')"; })
        .def("__eq__", [](const NCPoly& a, const NCPoly& b) { return a == b; })
        .def("__add__", [](const NCPoly& a, const NCPoly& b) { return a + b; })
        .def("__mul__", [](const NCPoly& a, const NCPoly& b) { return a * b; });

    m.def("cyclic_gradient", [](const NCPoly& p, int i) { return cyclic_gradient(p, i); }, py::arg("p"), py::arg("i"));
    m.def("nc_derivative", [](const NCPoly& p, int i) { return to_string(nc_derivative(p, i)); }, py::arg("p"), py::arg("i"),
          "Non-commutative derivative as text (sum of c·A⊗B).");
    m.def("involution", [](const NCPoly& p, bool self_adjoint) { return involution(p, self_adjoint); }, py::arg("p"),
          py::arg("self_adjoint_letters") = false);
    m.def("normalized_trace", [](const NCPoly& p, const std::vector<Matrix>& x) { return normalized_trace(p, x); });

    py::class_<Potential>(m, "Potential")
        .def(py::init([](const std::string& text, int letters, bool self_adjoint) {
                 return Potential::parse(text, letters, self_adjoint);
             }),
             py::arg("text"), py::arg("letters") = 0, py::arg("self_adjoint") = true)
        .def_property_readonly("letters", &Potential::letters)
        .def_property_readonly("quadratic_weight", &Potential::quadratic_weight)
        .def_property_readonly("couplings", [](const Potential& v) {
            std::vector<std::pair<cplx, std::string>> out;
            for (const auto& c : v.couplings()) out.emplace_back(c.beta, to_string(c.monomial));
            return out;
        });

    // sdsolver
    py::class_<FixedPointOptions>(m, "FixedPointOptions")
        .def(py::init<>())
        .def_readwrite("degree", &FixedPointOptions::degree)
        .def_readwrite("bound", &FixedPointOptions::bound)
        .def_readwrite("damping", &FixedPointOptions::damping)
        .def_readwrite("tol", &FixedPointOptions::tol)
        .def_readwrite("max_iter", &FixedPointOptions::max_iter)
        .def_readwrite("max_words", &FixedPointOptions::max_words);

    py::class_<FixedPointResult>(m, "FixedPointResult")
        .def("tau", [](const FixedPointResult& r, const std::string& w) { return r.tau(word_arg(w, r.tau.letters())); })
        .def_readonly("iterations", &FixedPointResult::iterations)
        .def_readonly("max_residual", &FixedPointResult::max_residual)
        .def_readonly("internal_degree", &FixedPointResult::internal_degree)
        .def_readonly("truncation_error", &FixedPointResult::truncation_error)
        .def_readonly("bound", &FixedPointResult::bound);

    m.def("solve_fixed_point", &solve_fixed_point, py::arg("potential"), py::arg("options") = FixedPointOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("necklaces", [](int letters, std::size_t degree, bool dihedral) {
        std::vector<std::string> out;
        for (const auto& w : necklaces(letters, degree, dihedral ? Symmetry::dihedral : Symmetry::cyclic)) out.push_back(to_string(w));
        return out;
    }, py::arg("letters"), py::arg("degree"), py::arg("dihedral") = false);

    py::class_<BetaSeries>(m, "BetaSeries")
        .def_property_readonly("order", &BetaSeries::order)
        .def_property_readonly("degree", &BetaSeries::degree)
        .def("coefficient", [](const BetaSeries& s, const MultiIndex& k, const std::string& w) {
            return s.coefficient(k, word_arg(w, s.letters()));
        })
        .def("map_certificate", [](const BetaSeries& s, const MultiIndex& k, const std::string& w) {
            return s.map_certificate(k, word_arg(w, s.letters()));
        })
        .def("evaluate", [](const BetaSeries& s, const std::vector<cplx>& beta, const std::string& w) {
            const SeriesValue v = s.evaluate(beta, word_arg(w, s.letters()));
            return py::make_tuple(v.value, v.tail_estimate);
        }, "Returns (value, tail estimate).")
        .def("growth_rate", [](const BetaSeries& s, const std::string& w) { return s.growth_rate(word_arg(w, s.letters())); })
        .def("to_json", &BetaSeries::to_json);

    m.def("solve_series", [](const std::vector<std::string>& templates, int letters, double quadratic_weight, int order,
                             std::size_t degree) {
        std::vector<Word> t;
        for (const auto& q : templates) t.push_back(parse_word(q, letters));
        py::gil_scoped_release release;
        return solve_series(t, letters, quadratic_weight, order, degree);
    }, py::arg("templates"), py::arg("letters"), py::arg("quadratic_weight") = 1.0, py::arg("order") = 8, py::arg("degree") = 4);

    // mapcount
    m.def("count_maps", [](const std::string& stars, int genus, const std::string& observable, int letters,
                           std::size_t max_half_edges) {
        return big(count_maps(star_system(stars, observable, letters), genus, CountOptions{max_half_edges}));
    }, py::arg("stars"), py::arg("genus") = 0, py::arg("observable") = "", py::arg("letters") = 0,
          py::arg("max_half_edges") = 16);
    m.def("gaussian_genus_expansion", [](const std::string& stars, long n) {
        const Rational r = gaussian_genus_expansion(star_system(stars, "", 0), n);
        return py::module_::import("fractions").attr("Fraction")(r.str());
    }, py::arg("stars"), py::arg("n"));

    // onematrix
    py::class_<OneCutSolution>(m, "OneCutSolution")
        .def_property_readonly("beta", &OneCutSolution::beta)
        .def_property_readonly("edge", &OneCutSolution::support_edge)
        .def_property_readonly("convex", &OneCutSolution::convex)
        .def("density", &OneCutSolution::density)
        .def("cdf", &OneCutSolution::cdf)
        .def("cauchy", &OneCutSolution::cauchy)
        .def("moments", [](const OneCutSolution& s, int up_to) { return moments(s, up_to); }, py::arg("up_to"));
    m.def("solve_one_cut", [](double beta) { return solve_one_cut(beta); }, py::arg("beta"));

    // entropy
    m.def("free_entropy", [](const Potential& v, int nodes, const FixedPointOptions& fp) {
        EntropyOptions o;
        o.nodes = nodes;
        o.fixed_point = fp;
        EntropyReport r;
        {
            py::gil_scoped_release release;
            r = free_entropy(v, o);
        }
        py::dict d;
        d["chi"] = r.chi;
        d["gaussian_constant"] = r.gaussian_constant;
        d["integral"] = r.integral;
        d["integral_error"] = r.integral_error;
        d["tau_v"] = r.tau_v;
        return d;
    }, py::arg("potential"), py::arg("nodes") = 16, py::arg("fixed_point") = FixedPointOptions{});

    // langevin
    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("n", &SimConfig::n)
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_max", &SimConfig::t_max)
        .def_readwrite("burn_in", &SimConfig::burn_in)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("norm_cap", &SimConfig::norm_cap)
        .def_readwrite("clip", &SimConfig::clip)
        .def_readwrite("stride", &SimConfig::stride);

    m.def("simulate", [](const Potential& v, const SimConfig& cfg, const std::vector<std::string>& observables,
                         std::size_t spectrum_every) {
        std::vector<NCPoly> obs;
        for (const auto& o : observables) obs.push_back(parse_poly(o, v.letters()));
        SimulationHooks hooks;
        hooks.spectrum_every = spectrum_every;
        SimulationResult r;
        {
            py::gil_scoped_release release;
            r = simulate(v, cfg, obs, std::nullopt, hooks);
        }
        py::dict d;
        py::list stats;
        for (const auto& s : r.observables) {
            py::dict e;
            e["name"] = s.name;
            e["mean"] = s.mean;
            e["standard_error"] = s.standard_error;
            e["drift"] = s.drift;
            stats.append(e);
        }
        d["observables"] = stats;
        d["samples"] = r.samples;
        d["max_norm"] = r.max_norm;
        d["final_time"] = r.final_state.time;
        d["pooled_spectrum"] = r.pooled_spectrum;
        d["final_state"] = r.final_state.x;
        return d;
    }, py::arg("potential"), py::arg("config"), py::arg("observables") = std::vector<std::string>{},
          py::arg("spectrum_every") = 0);

    m.def("coupling_slope", [](const Potential& v, const SimConfig& cfg, const std::vector<Matrix>& z, double horizon) {
        py::gil_scoped_release release;
        return coupling_decay(v, cfg, z, horizon).slope;
    }, py::arg("potential"), py::arg("config"), py::arg("start"), py::arg("horizon"));

    m.def("gap_statistic", [](std::vector<double> eigenvalues) {
        const SpectralReport r = gap_statistic(std::move(eigenvalues));
        py::dict d;
        d["connected"] = r.connected;
        d["gap_location"] = r.gap_location;
        d["gap_width"] = r.gap_width;
        d["relative_width"] = r.relative_width;
        return d;
    }, py::arg("eigenvalues"));
    m.def("ks_distance", &ks_distance, py::arg("sorted_samples"), py::arg("cdf"));
    m.def("convexity_probe", [](const Potential& v, double c, double radius, std::size_t samples, std::size_t n,
                                std::uint64_t seed) {
        const ConvexityReport r = convexity_probe(v, c, radius, samples, n, seed);
        return py::make_tuple(r.pass, r.min_eigenvalue);
    }, py::arg("potential"), py::arg("c"), py::arg("radius"), py::arg("samples") = 100, py::arg("n") = 4,
          py::arg("seed") = 1);
}
