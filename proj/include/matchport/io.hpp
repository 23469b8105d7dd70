#pragma once

// Market files ("schema": "matchport/1" JSON), report serialisation and SVG
// arc diagrams. Numbers may be JSON numbers or strings such as "-10/7" or
// "0.25"; any string number marks the file as exact.

#include "matchport/audit.hpp"
#include "matchport/line_solver.hpp"
#include "matchport/market.hpp"
#include "matchport/multiway.hpp"
#include "matchport/ordinal.hpp"
#include "matchport/ot_engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace matchport {

inline constexpr const char* kSchema = "matchport/1";

enum class MarketKind { kDiscrete, kPiecewiseLine, kKDiscrete, kPreferences };

const char* kind_name(MarketKind k);

// A number as written: its exact value and whether it was a string.
struct FileNumber {
  Rational value;
  bool exact = false;
  double as_double() const { return to_double(value); }
  bool operator==(const FileNumber&) const = default;
};

using NumberRow = std::vector<FileNumber>;

struct AuditParams {
  std::optional<FileNumber> alpha;
  std::vector<FileNumber> alphas;
  std::optional<FileNumber> eps;
  std::optional<std::size_t> cells;
  bool operator==(const AuditParams&) const = default;
};

struct MarketFile {
  MarketKind kind = MarketKind::kDiscrete;
  std::string name;

  // discrete
  std::string utility_family;  // neg_distance, table, nash_surplus
  std::size_t dim = 1;
  FileNumber norm{Rational(2), false};
  bool norm_inf = false;
  std::optional<FileNumber> beta;
  std::vector<NumberRow> table;  // table values or surplus
  std::vector<NumberRow> x_atoms, y_atoms;
  NumberRow x_masses, y_masses;
  bool pad_with_dummy = false;
  FileNumber dummy_utility;

  // piecewise_line
  NumberRow breakpoints, f, g;

  // k_discrete
  std::vector<NumberRow> side_masses;
  NumberRow tensor;  // last index fastest

  // preferences
  std::vector<std::vector<int>> x_rank, y_rank;

  AuditParams audit;

  bool exact() const;  // true if any number was written as a string
  bool operator==(const MarketFile&) const = default;
};

// Throws ValidationError with "<source>:<line>:<col>" for syntax errors and
// "<source>: <field path>: ..." for schema and invariant violations.
MarketFile parse_market(const std::string& text, const std::string& source = "<input>");
MarketFile parse_market_file(const std::string& path);
std::string write_market(const MarketFile& f);

DiscreteMarket to_discrete_market(const MarketFile& f);
ExactDiscreteMarket to_exact_discrete_market(const MarketFile& f);
PiecewiseDensityMarket to_line_market(const MarketFile& f);
ExactPiecewiseMarket to_exact_line_market(const MarketFile& f);
KMarket to_k_market(const MarketFile& f);
PreferenceProfile to_profile(const MarketFile& f);

// Reports. Exact values are written as "p/q" strings.
std::string coupling_json(const Coupling& c);
std::string coupling_json(const ExactCoupling& c);
std::string k_coupling_json(const KCoupling& c);
std::string audit_json(const AuditReport& a);
std::string line_matching_json(const LineMatching<double>& lm);
std::string line_matching_json(const LineMatching<Rational>& lm);
std::string potential_json(const DenseMatrix<Rational>& u);
std::string cycle_json(const ImprovementCycle& c);
std::string sweep_json(const std::vector<SweepRow>& rows);

// Half-circle from x to its partner y, drawn above the axis.
struct Arc {
  double x = 0.0, y = 0.0, mass = 0.0;
  double center() const { return (x + y) / 2.0; }
  double radius() const { return (x > y ? x - y : y - x) / 2.0; }
};

struct SvgOptions {
  int width = 800;
  int height = 400;
  std::size_t arcs_per_piece = 5;
};

// Arcs at evenly spaced midpoints of every diagonal segment and Monge piece.
std::vector<Arc> sample_arcs(const LineMatching<double>& lm, std::size_t per_piece);
std::vector<Arc> coupling_arcs(const Coupling& c, const DiscreteMarket& m);

std::string render_arcs(const LineMatching<double>& lm, const PiecewiseDensityMarket& m, const SvgOptions& o = {});
std::string render_arcs(const Coupling& c, const DiscreteMarket& m, const SvgOptions& o = {});

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace matchport
