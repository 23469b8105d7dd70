#include "matchport/line_solver.hpp"

#include <map>

namespace matchport {

SampledMatching sample_line_matching(const LineMatching<double>& lm, std::size_t cells_per_piece) {
  if (cells_per_piece == 0) throw ValidationError("cells_per_piece must be >= 1");
  std::map<double, std::size_t> xs, ys;
  std::map<std::pair<std::size_t, std::size_t>, double> mass;
  auto add = [&](double x, double y, double q) {
    std::size_t i = xs.emplace(x, xs.size()).first->second;
    std::size_t j = ys.emplace(y, ys.size()).first->second;
    mass[{i, j}] += q;
  };
  auto cells = [&](double lo, double hi, double density, auto&& map) {
    double w = (hi - lo) / static_cast<double>(cells_per_piece);
    for (std::size_t c = 0; c < cells_per_piece; ++c) {
      double x = lo + w * (static_cast<double>(c) + 0.5);
      add(x, map(x), density * w);
    }
  };
  for (const auto& d : lm.diagonal) cells(d.lo, d.hi, d.density, [](double x) { return x; });
  for (const auto& p : lm.monge_pieces) cells(p.lo, p.hi, p.density, [&](double x) { return p.map(x); });
  if (mass.empty()) throw ValidationError("line matching carries no mass");

  std::vector<std::vector<double>> x_atoms(xs.size()), y_atoms(ys.size());
  std::vector<double> x_mass(xs.size(), 0.0), y_mass(ys.size(), 0.0);
  for (const auto& [x, i] : xs) x_atoms[i] = {x};
  for (const auto& [y, j] : ys) y_atoms[j] = {y};
  Coupling c;
  for (const auto& [key, q] : mass) {
    x_mass[key.first] += q;
    y_mass[key.second] += q;
    c.entries.push_back({key.first, key.second, q});
    c.total_mass += q;
  }
  MarketOptions opts;
  opts.merge_coincident = false;
  DiscreteMarket m(std::move(x_atoms), std::move(x_mass), std::move(y_atoms), std::move(y_mass),
                   UtilitySpec::neg_distance(1, 1.0), opts);
  return {std::move(m), std::move(c)};
}

}  // namespace matchport
