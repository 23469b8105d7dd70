#include "matchport/audit.hpp"
#include "matchport/io.hpp"
#include "matchport/line_solver.hpp"
#include "matchport/multiway.hpp"
#include "matchport/ordinal.hpp"
#include "matchport/ot_engine.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace matchport;

namespace {

using Entries = std::vector<std::tuple<std::size_t, std::size_t, double>>;

Entries entries_of(const Coupling& c) {
  Entries out;
  for (const auto& e : c.entries) out.emplace_back(e.x, e.y, e.mass);
  return out;
}

Coupling coupling_of(const Entries& entries) {
  Coupling c;
  for (const auto& [x, y, m] : entries) {
    c.entries.push_back({x, y, m});
    c.total_mass += m;
  }
  return c;
}

DenseMatrix<double> matrix_of(const std::vector<std::vector<double>>& rows) { return DenseMatrix<double>::from_rows(rows); }

CostSpec cost_of(std::optional<double> alpha) { return alpha && *alpha != 0.0 ? CostSpec::alpha(*alpha) : CostSpec::neg_utility(); }

py::dict solve_dict(const SolveReport& r) {
  py::dict d;
  d["coupling"] = entries_of(r.coupling);
  d["objective"] = r.objective;
  d["iterations"] = r.iterations;
  return d;
}

template <class T>
py::list pieces_of(const LineMatching<T>& lm) {
  py::list out;
  for (const auto& s : lm.diagonal) {
    py::dict d;
    d["kind"] = "diagonal";
    d["lo"] = format_rational(Rational(s.lo));
    d["hi"] = format_rational(Rational(s.hi));
    d["density"] = format_rational(Rational(s.density));
    out.append(d);
  }
  for (const auto& p : lm.monge_pieces) {
    py::dict d;
    d["kind"] = "monge";
    d["lo"] = format_rational(Rational(p.lo));
    d["hi"] = format_rational(Rational(p.hi));
    d["slope"] = format_rational(Rational(p.slope));
    d["intercept"] = format_rational(Rational(p.intercept));
    d["density"] = format_rational(Rational(p.density));
    out.append(d);
  }
  return out;
}

std::vector<Rational> rationals(const std::vector<std::string>& v) {
  std::vector<Rational> out;
  for (const auto& s : v) out.push_back(parse_rational(s));
  return out;
}

}  // namespace

PYBIND11_MODULE(_matchport, m) {
  m.doc() = "Stable matching through entropic optimal transport";

  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  auto solver = py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<OverflowError>(m, "OverflowError", solver.ptr());
  (void)validation;

  py::class_<DiscreteMarket>(m, "DiscreteMarket")
      .def_static(
          "from_points",
          [](std::vector<std::vector<double>> xs, std::vector<double> mx, std::vector<std::vector<double>> ys,
             std::vector<double> my, double p) {
            std::size_t dim = xs.empty() ? 1 : xs.front().size();
            return DiscreteMarket(std::move(xs), std::move(mx), std::move(ys), std::move(my), UtilitySpec::neg_distance(dim, p));
          },
          py::arg("x_atoms"), py::arg("x_masses"), py::arg("y_atoms"), py::arg("y_masses"), py::arg("p") = 2.0)
      .def_static(
          "from_table",
          [](const std::vector<std::vector<double>>& u, std::vector<double> mx, std::vector<double> my) {
            return DiscreteMarket(std::move(mx), std::move(my), UtilitySpec::table(matrix_of(u)));
          },
          py::arg("utility"), py::arg("x_masses"), py::arg("y_masses"))
      .def_property_readonly("nx", &DiscreteMarket::nx)
      .def_property_readonly("ny", &DiscreteMarket::ny)
      .def_property_readonly("total_mass", &DiscreteMarket::total_mass)
      .def("utility", py::overload_cast<std::size_t, std::size_t>(&DiscreteMarket::utility, py::const_));

  m.def(
      "solve_transport", [](const DiscreteMarket& mk, std::optional<double> alpha) { return solve_dict(solve_transport(mk, cost_of(alpha))); },
      py::arg("market"), py::arg("alpha") = py::none(),
      "Optimal coupling for c = (1 - exp(alpha u)) / alpha; alpha None or 0 maximises welfare.");
  m.def("stable_limit", [](const DiscreteMarket& mk) { return solve_dict(stable_limit(mk)); });
  m.def("greedy_matching", [](const DiscreteMarket& mk) { return entries_of(greedy_matching(mk)); });

  m.def("stability_gap", [](const Entries& c, const DiscreteMarket& mk) { return stability_gap(coupling_of(c), mk); });
  m.def("welfare", [](const Entries& c, const DiscreteMarket& mk) { return welfare(coupling_of(c), mk); });
  m.def("egalitarian_bound", &egalitarian_bound);
  m.def("egalitarian_eps", [](const Entries& c, const DiscreteMarket& mk, double u_star) {
    return egalitarian_eps(coupling_of(c), mk, u_star);
  });
  m.def("stability_bound", &stability_bound, py::arg("alpha"), py::arg("k") = 2);
  m.def("egalitarian_eps_bound", &egalitarian_eps_bound);

  m.def(
      "stable_line_matching",
      [](const std::vector<std::string>& b, const std::vector<std::string>& f, const std::vector<std::string>& g) {
        return pieces_of(stable_line_matching(ExactPiecewiseMarket(rationals(b), rationals(f), rationals(g))));
      },
      py::arg("breakpoints"), py::arg("f"), py::arg("g"),
      "Exact stable matching of a piecewise-uniform market on the line; numbers are decimal or p/q strings.");
  m.def(
      "assortative_matching",
      [](const std::vector<std::string>& b, const std::vector<std::string>& f, const std::vector<std::string>& g) {
        return pieces_of(assortative_matching(ExactPiecewiseMarket(rationals(b), rationals(f), rationals(g))));
      },
      py::arg("breakpoints"), py::arg("f"), py::arg("g"));

  py::class_<KMarket>(m, "KMarket")
      .def(py::init<std::vector<std::vector<double>>, std::vector<double>>(), py::arg("masses"), py::arg("utility"))
      .def_property_readonly("k", &KMarket::k);
  m.def(
      "solve_k_transport",
      [](const KMarket& km, std::optional<double> alpha) {
        auto r = solve_k_transport(km, cost_of(alpha));
        std::vector<std::pair<std::vector<std::size_t>, double>> entries;
        for (const auto& e : r.coupling.entries) entries.emplace_back(e.index, e.mass);
        py::dict d;
        d["coupling"] = entries;
        d["objective"] = r.objective;
        d["stability_gap"] = k_stability_gap(r.coupling, km);
        d["welfare"] = k_welfare(r.coupling, km);
        return d;
      },
      py::arg("market"), py::arg("alpha") = py::none());

  m.def(
      "check_acyclicity",
      [](std::vector<std::vector<int>> xr, std::vector<std::vector<int>> yr) -> std::optional<std::vector<std::pair<std::size_t, std::size_t>>> {
        auto c = check_acyclicity(PreferenceProfile(std::move(xr), std::move(yr)));
        if (!c) return std::nullopt;
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& z : c->couples) out.emplace_back(z.x, z.y);
        return out;
      },
      py::arg("x_rank"), py::arg("y_rank"), "None when acyclic, else a strict improvement cycle of (x, y) couples.");
  m.def(
      "build_potential",
      [](std::vector<std::vector<int>> xr, std::vector<std::vector<int>> yr) {
        auto u = build_potential(PreferenceProfile(std::move(xr), std::move(yr)));
        std::vector<std::vector<std::string>> out(u.rows(), std::vector<std::string>(u.cols()));
        for (std::size_t i = 0; i < u.rows(); ++i) {
          for (std::size_t j = 0; j < u.cols(); ++j) out[i][j] = format_rational(u(i, j));
        }
        return out;
      },
      py::arg("x_rank"), py::arg("y_rank"));

  m.def("parse_market", [](const std::string& text) {
    MarketFile f = parse_market(text);
    return std::make_pair(std::string(kind_name(f.kind)), write_market(f));
  });
  m.def("load_discrete_market", [](const std::string& path) { return to_discrete_market(parse_market_file(path)); });
}
