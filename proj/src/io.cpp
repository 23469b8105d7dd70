#include "matchport/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace matchport {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

namespace {

struct Ctx {
  const std::string& source;

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ValidationError(source + ": " + path + ": " + what);
  }

  const Json& field(const Json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing field");
    return *it;
  }

  FileNumber number(const Json& j, const std::string& path) const {
    try {
      if (j.is_string()) return {parse_rational(j.get<std::string>()), true};
      if (j.is_number_unsigned()) return {Rational(j.get<std::uint64_t>()), false};
      if (j.is_number_integer()) return {Rational(j.get<std::int64_t>()), false};
      if (j.is_number_float()) return {rational_from_double(j.get<double>()), false};
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
    fail(path, "expected a number or a \"p/q\" string");
  }

  NumberRow row(const Json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array");
    NumberRow out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<NumberRow> rows(const Json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array of arrays");
    std::vector<NumberRow> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(row(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<std::vector<int>> ranks(const Json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array of rank lists");
    std::vector<std::vector<int>> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      std::string p = path + "[" + std::to_string(i) + "]";
      if (!j[i].is_array()) fail(p, "expected an array of integer ranks");
      std::vector<int> r;
      for (std::size_t k = 0; k < j[i].size(); ++k) {
        if (!j[i][k].is_number_integer()) fail(p + "[" + std::to_string(k) + "]", "expected an integer rank");
        r.push_back(j[i][k].get<int>());
      }
      out.push_back(std::move(r));
    }
    return out;
  }
};

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

bool any_exact(const NumberRow& r) {
  return std::any_of(r.begin(), r.end(), [](const FileNumber& n) { return n.exact; });
}
bool any_exact(const std::vector<NumberRow>& rs) {
  return std::any_of(rs.begin(), rs.end(), [](const NumberRow& r) { return any_exact(r); });
}

template <class T>
T as(const FileNumber& n) {
  if constexpr (ScalarTraits<T>::exact) {
    return n.value;
  } else {
    return n.as_double();
  }
}

template <class T>
std::vector<T> as_vector(const NumberRow& r) {
  std::vector<T> out;
  for (const auto& n : r) out.push_back(as<T>(n));
  return out;
}

template <class T>
DenseMatrix<T> as_matrix(const std::vector<NumberRow>& rows) {
  std::vector<std::vector<T>> out;
  for (const auto& r : rows) out.push_back(as_vector<T>(r));
  return DenseMatrix<T>::from_rows(out);
}

template <class T>
BasicDiscreteMarket<T> build_discrete(const MarketFile& f) {
  MarketOptions opts;
  opts.pad_with_dummy = f.pad_with_dummy;
  opts.dummy_utility = f.dummy_utility.as_double();
  std::vector<T> xm = as_vector<T>(f.x_masses), ym = as_vector<T>(f.y_masses);
  if (f.utility_family == "neg_distance") {
    double p = f.norm_inf ? std::numeric_limits<double>::infinity() : f.norm.as_double();
    std::vector<std::vector<T>> xa, ya;
    for (const auto& r : f.x_atoms) xa.push_back(as_vector<T>(r));
    for (const auto& r : f.y_atoms) ya.push_back(as_vector<T>(r));
    return BasicDiscreteMarket<T>(std::move(xa), std::move(xm), std::move(ya), std::move(ym),
                                  BasicUtilitySpec<T>::neg_distance(f.dim, p), opts);
  }
  if (f.utility_family == "table") {
    return BasicDiscreteMarket<T>(std::move(xm), std::move(ym), BasicUtilitySpec<T>::table(as_matrix<T>(f.table)),
                                  opts);
  }
  if (f.utility_family == "nash_surplus") {
    if (!f.beta) throw ValidationError("nash_surplus needs beta");
    return BasicDiscreteMarket<T>(std::move(xm), std::move(ym),
                                  BasicUtilitySpec<T>::nash_surplus(as_matrix<T>(f.table), as<T>(*f.beta)), opts);
  }
  throw ValidationError("unknown utility family '" + f.utility_family + "'");
}

OJson number_json(const FileNumber& n) {
  if (n.exact) return format_rational(n.value);
  double v = n.as_double();
  if (std::trunc(v) == v && std::abs(v) < 9007199254740992.0) return static_cast<std::int64_t>(v);
  return v;
}

OJson row_json(const NumberRow& r) {
  OJson a = OJson::array();
  for (const auto& n : r) a.push_back(number_json(n));
  return a;
}

OJson rows_json(const std::vector<NumberRow>& rs) {
  OJson a = OJson::array();
  for (const auto& r : rs) a.push_back(row_json(r));
  return a;
}

OJson value_json(double v) { return v; }
OJson value_json(const Rational& v) { return format_rational(v); }

OJson optional_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

struct Canvas {
  double lo = 0.0, hi = 1.0;
  double margin = 20.0;
  double width = 800.0;
  double axis = 0.0;
  double bar = 60.0;  // max density bar height in px
  double height = 0.0;

  double sx(double x) const { return margin + (x - lo) / (hi - lo) * (width - 2.0 * margin); }
  double scale() const { return (width - 2.0 * margin) / (hi - lo); }
};

Canvas make_canvas(double lo, double hi, const std::vector<Arc>& arcs, const SvgOptions& o) {
  Canvas c;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  c.lo = lo;
  c.hi = hi;
  c.width = o.width;
  double rmax = 0.0;
  for (const auto& a : arcs) rmax = std::max(rmax, a.radius() * c.scale());
  double up = std::max(rmax, c.bar) + c.margin;
  c.axis = up + c.margin;
  c.height = std::max(static_cast<double>(o.height), c.axis + c.bar + c.margin);
  return c;
}

void svg_open(std::ostringstream& out, const Canvas& c) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(c.width) << "\" height=\""
      << fmt(c.height) << "\" viewBox=\"0 0 " << fmt(c.width) << " " << fmt(c.height) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

void svg_arcs(std::ostringstream& out, const Canvas& c, const std::vector<Arc>& arcs) {
  double mmax = 0.0;
  for (const auto& a : arcs) mmax = std::max(mmax, a.mass);
  out << "<line class=\"axis\" x1=\"" << fmt(c.margin) << "\" y1=\"" << fmt(c.axis) << "\" x2=\""
      << fmt(c.width - c.margin) << "\" y2=\"" << fmt(c.axis) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  for (const auto& a : arcs) {
    double l = c.sx(std::min(a.x, a.y)), r = c.sx(std::max(a.x, a.y));
    double rad = (r - l) / 2.0;
    double w = mmax > 0 ? 0.5 + 2.0 * a.mass / mmax : 1.0;
    out << "<path class=\"arc\" d=\"M " << fmt(l) << " " << fmt(c.axis) << " A " << fmt(rad) << " " << fmt(rad)
        << " 0 0 1 " << fmt(r) << " " << fmt(c.axis) << "\" fill=\"none\" stroke=\"#b5413a\" stroke-width=\""
        << fmt(w) << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace

const char* kind_name(MarketKind k) {
  switch (k) {
    case MarketKind::kDiscrete:
      return "discrete";
    case MarketKind::kPiecewiseLine:
      return "piecewise_line";
    case MarketKind::kKDiscrete:
      return "k_discrete";
    case MarketKind::kPreferences:
      return "preferences";
  }
  return "?";
}

bool MarketFile::exact() const {
  return norm.exact || (beta && beta->exact) || dummy_utility.exact || any_exact(table) || any_exact(x_atoms) ||
         any_exact(y_atoms) || any_exact(x_masses) || any_exact(y_masses) || any_exact(breakpoints) ||
         any_exact(f) || any_exact(g) || any_exact(side_masses) || any_exact(tensor);
}

MarketFile parse_market(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  Ctx ctx{source};
  if (!j.is_object()) ctx.fail("(root)", "expected an object");
  const Json& schema = ctx.field(j, "", "schema");
  if (!schema.is_string() || schema.get<std::string>() != kSchema) {
    ctx.fail("schema", std::string("expected \"") + kSchema + "\"");
  }
  const Json& kind = ctx.field(j, "", "kind");
  if (!kind.is_string()) ctx.fail("kind", "expected a string");
  MarketFile f;
  std::string k = kind.get<std::string>();
  if (k == "discrete") {
    f.kind = MarketKind::kDiscrete;
  } else if (k == "piecewise_line") {
    f.kind = MarketKind::kPiecewiseLine;
  } else if (k == "k_discrete") {
    f.kind = MarketKind::kKDiscrete;
  } else if (k == "preferences") {
    f.kind = MarketKind::kPreferences;
  } else {
    ctx.fail("kind", "unknown kind '" + k + "'");
  }
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) ctx.fail("name", "expected a string");
    f.name = it->get<std::string>();
  }

  switch (f.kind) {
    case MarketKind::kDiscrete: {
      const Json& u = ctx.field(j, "", "utility");
      const Json& fam = ctx.field(u, "utility", "family");
      if (!fam.is_string()) ctx.fail("utility.family", "expected a string");
      f.utility_family = fam.get<std::string>();
      if (f.utility_family == "neg_distance") {
        if (auto it = u.find("dim"); it != u.end()) {
          if (!it->is_number_unsigned() || it->get<std::size_t>() == 0) ctx.fail("utility.dim", "expected a positive integer");
          f.dim = it->get<std::size_t>();
        }
        if (auto it = u.find("p"); it != u.end()) {
          if (it->is_string() && it->get<std::string>() == "inf") {
            f.norm_inf = true;
          } else {
            f.norm = ctx.number(*it, "utility.p");
          }
        }
      } else if (f.utility_family == "table") {
        f.table = ctx.rows(ctx.field(u, "utility", "values"), "utility.values");
      } else if (f.utility_family == "nash_surplus") {
        f.table = ctx.rows(ctx.field(u, "utility", "surplus"), "utility.surplus");
        f.beta = ctx.number(ctx.field(u, "utility", "beta"), "utility.beta");
      } else {
        ctx.fail("utility.family", "unknown family '" + f.utility_family + "'");
      }
      for (const char* side : {"x", "y"}) {
        const Json& s = ctx.field(j, "", side);
        std::string p(side);
        NumberRow masses = ctx.row(ctx.field(s, p, "masses"), p + ".masses");
        std::vector<NumberRow> atoms;
        if (f.utility_family == "neg_distance") atoms = ctx.rows(ctx.field(s, p, "atoms"), p + ".atoms");
        if (p == "x") {
          f.x_masses = std::move(masses);
          f.x_atoms = std::move(atoms);
        } else {
          f.y_masses = std::move(masses);
          f.y_atoms = std::move(atoms);
        }
      }
      if (auto it = j.find("pad_with_dummy"); it != j.end()) {
        if (!it->is_boolean()) ctx.fail("pad_with_dummy", "expected true or false");
        f.pad_with_dummy = it->get<bool>();
      }
      if (auto it = j.find("dummy_utility"); it != j.end()) f.dummy_utility = ctx.number(*it, "dummy_utility");
      break;
    }
    case MarketKind::kPiecewiseLine:
      f.breakpoints = ctx.row(ctx.field(j, "", "breakpoints"), "breakpoints");
      f.f = ctx.row(ctx.field(j, "", "f"), "f");
      f.g = ctx.row(ctx.field(j, "", "g"), "g");
      break;
    case MarketKind::kKDiscrete: {
      const Json& sides = ctx.field(j, "", "sides");
      if (!sides.is_array()) ctx.fail("sides", "expected an array");
      for (std::size_t s = 0; s < sides.size(); ++s) {
        std::string p = "sides[" + std::to_string(s) + "]";
        f.side_masses.push_back(ctx.row(ctx.field(sides[s], p, "masses"), p + ".masses"));
      }
      const Json& u = ctx.field(j, "", "utility");
      const Json& fam = ctx.field(u, "utility", "family");
      if (!fam.is_string() || fam.get<std::string>() != "tensor") ctx.fail("utility.family", "expected \"tensor\"");
      f.utility_family = "tensor";
      f.tensor = ctx.row(ctx.field(u, "utility", "values"), "utility.values");
      break;
    }
    case MarketKind::kPreferences:
      f.x_rank = ctx.ranks(ctx.field(j, "", "x_rank"), "x_rank");
      f.y_rank = ctx.ranks(ctx.field(j, "", "y_rank"), "y_rank");
      break;
  }

  if (auto it = j.find("audit"); it != j.end()) {
    const Json& a = *it;
    if (!a.is_object()) ctx.fail("audit", "expected an object");
    if (auto v = a.find("alpha"); v != a.end()) f.audit.alpha = ctx.number(*v, "audit.alpha");
    if (auto v = a.find("alphas"); v != a.end()) f.audit.alphas = ctx.row(*v, "audit.alphas");
    if (auto v = a.find("eps"); v != a.end()) f.audit.eps = ctx.number(*v, "audit.eps");
    if (auto v = a.find("cells"); v != a.end()) {
      if (!v->is_number_unsigned() || v->get<std::size_t>() == 0) ctx.fail("audit.cells", "expected a positive integer");
      f.audit.cells = v->get<std::size_t>();
    }
  }

  // Invariants are checked by building the market once.
  try {
    switch (f.kind) {
      case MarketKind::kDiscrete:
        if (f.exact() && (f.utility_family != "neg_distance" || f.dim == 1 || f.norm_inf || f.norm.value == 1)) {
          (void)to_exact_discrete_market(f);
        } else {
          (void)to_discrete_market(f);
        }
        break;
      case MarketKind::kPiecewiseLine:
        if (f.exact()) {
          (void)to_exact_line_market(f);
        } else {
          (void)to_line_market(f);
        }
        break;
      case MarketKind::kKDiscrete:
        (void)to_k_market(f);
        break;
      case MarketKind::kPreferences:
        (void)to_profile(f);
        break;
    }
  } catch (const ValidationError& e) {
    ctx.fail(kind_name(f.kind), e.what());
  }
  return f;
}

MarketFile parse_market_file(const std::string& path) { return parse_market(read_text_file(path), path); }

std::string write_market(const MarketFile& f) {
  OJson j;
  j["schema"] = kSchema;
  j["kind"] = kind_name(f.kind);
  if (!f.name.empty()) j["name"] = f.name;
  switch (f.kind) {
    case MarketKind::kDiscrete: {
      OJson u;
      u["family"] = f.utility_family;
      if (f.utility_family == "neg_distance") {
        u["dim"] = f.dim;
        u["p"] = f.norm_inf ? OJson("inf") : number_json(f.norm);
      } else if (f.utility_family == "table") {
        u["values"] = rows_json(f.table);
      } else {
        u["surplus"] = rows_json(f.table);
        if (f.beta) u["beta"] = number_json(*f.beta);
      }
      j["utility"] = u;
      for (int s = 0; s < 2; ++s) {
        OJson side;
        if (f.utility_family == "neg_distance") side["atoms"] = rows_json(s == 0 ? f.x_atoms : f.y_atoms);
        side["masses"] = row_json(s == 0 ? f.x_masses : f.y_masses);
        j[s == 0 ? "x" : "y"] = side;
      }
      if (f.pad_with_dummy) j["pad_with_dummy"] = true;
      if (f.dummy_utility.value != 0 || f.dummy_utility.exact) j["dummy_utility"] = number_json(f.dummy_utility);
      break;
    }
    case MarketKind::kPiecewiseLine:
      j["breakpoints"] = row_json(f.breakpoints);
      j["f"] = row_json(f.f);
      j["g"] = row_json(f.g);
      break;
    case MarketKind::kKDiscrete: {
      OJson sides = OJson::array();
      for (const auto& s : f.side_masses) sides.push_back(OJson{{"masses", row_json(s)}});
      j["sides"] = sides;
      j["utility"] = OJson{{"family", "tensor"}, {"values", row_json(f.tensor)}};
      break;
    }
    case MarketKind::kPreferences:
      j["x_rank"] = f.x_rank;
      j["y_rank"] = f.y_rank;
      break;
  }
  const AuditParams& a = f.audit;
  if (a.alpha || !a.alphas.empty() || a.eps || a.cells) {
    OJson aj = OJson::object();
    if (a.alpha) aj["alpha"] = number_json(*a.alpha);
    if (!a.alphas.empty()) aj["alphas"] = row_json(a.alphas);
    if (a.eps) aj["eps"] = number_json(*a.eps);
    if (a.cells) aj["cells"] = *a.cells;
    j["audit"] = aj;
  }
  return j.dump(2) + "\n";
}

DiscreteMarket to_discrete_market(const MarketFile& f) {
  if (f.kind != MarketKind::kDiscrete) throw ValidationError("not a discrete market file");
  return build_discrete<double>(f);
}

ExactDiscreteMarket to_exact_discrete_market(const MarketFile& f) {
  if (f.kind != MarketKind::kDiscrete) throw ValidationError("not a discrete market file");
  return build_discrete<Rational>(f);
}

PiecewiseDensityMarket to_line_market(const MarketFile& f) {
  if (f.kind != MarketKind::kPiecewiseLine) throw ValidationError("not a piecewise_line market file");
  return PiecewiseDensityMarket(as_vector<double>(f.breakpoints), as_vector<double>(f.f), as_vector<double>(f.g));
}

ExactPiecewiseMarket to_exact_line_market(const MarketFile& f) {
  if (f.kind != MarketKind::kPiecewiseLine) throw ValidationError("not a piecewise_line market file");
  return ExactPiecewiseMarket(as_vector<Rational>(f.breakpoints), as_vector<Rational>(f.f), as_vector<Rational>(f.g));
}

KMarket to_k_market(const MarketFile& f) {
  if (f.kind != MarketKind::kKDiscrete) throw ValidationError("not a k_discrete market file");
  std::vector<std::vector<double>> masses;
  for (const auto& s : f.side_masses) masses.push_back(as_vector<double>(s));
  return KMarket(std::move(masses), as_vector<double>(f.tensor));
}

PreferenceProfile to_profile(const MarketFile& f) {
  if (f.kind != MarketKind::kPreferences) throw ValidationError("not a preferences file");
  return PreferenceProfile(f.x_rank, f.y_rank);
}

std::string coupling_json(const Coupling& c) {
  OJson j;
  j["kind"] = "coupling";
  j["total_mass"] = c.total_mass;
  OJson e = OJson::array();
  for (const auto& x : c.entries) e.push_back(OJson::array({x.x, x.y, x.mass}));
  j["entries"] = e;
  return j.dump(2) + "\n";
}

std::string coupling_json(const ExactCoupling& c) {
  OJson j;
  j["kind"] = "coupling";
  j["total_mass"] = format_rational(c.total_mass);
  OJson e = OJson::array();
  for (const auto& x : c.entries) e.push_back(OJson::array({x.x, x.y, format_rational(x.mass)}));
  j["entries"] = e;
  return j.dump(2) + "\n";
}

std::string k_coupling_json(const KCoupling& c) {
  OJson j;
  j["kind"] = "k_coupling";
  j["total_mass"] = c.total_mass;
  OJson e = OJson::array();
  for (const auto& x : c.entries) {
    OJson row = OJson::array();
    for (std::size_t i : x.index) row.push_back(i);
    row.push_back(x.mass);
    e.push_back(row);
  }
  j["entries"] = e;
  return j.dump(2) + "\n";
}

std::string audit_json(const AuditReport& a) {
  OJson j;
  j["stability_gap"] = a.stability_gap;
  j["welfare"] = a.welfare;
  j["u_min_star"] = a.u_min_star;
  j["egalitarian_eps"] = a.egalitarian_eps;
  j["welfare_bound_ok"] = a.welfare_bound_ok;
  j["alpha"] = optional_json(a.alpha);
  j["theoretical_eps"] = optional_json(a.theoretical_eps);
  return j.dump(2) + "\n";
}

namespace {

const char* step_name(StepKind k) {
  switch (k) {
    case StepKind::kDiagonal:
      return "diagonal";
    case StepKind::kPair:
      return "pair";
    case StepKind::kEnd:
      return "end";
    case StepKind::kClosure:
      return "closure";
  }
  return "?";
}

template <class T>
std::string line_json(const LineMatching<T>& lm) {
  OJson j;
  j["kind"] = "line_matching";
  OJson d = OJson::array();
  for (const auto& s : lm.diagonal) {
    d.push_back(OJson{{"lo", value_json(s.lo)}, {"hi", value_json(s.hi)}, {"density", value_json(s.density)}});
  }
  j["diagonal"] = d;
  OJson p = OJson::array();
  for (const auto& s : lm.monge_pieces) {
    p.push_back(OJson{{"lo", value_json(s.lo)},
                      {"hi", value_json(s.hi)},
                      {"slope", value_json(s.slope)},
                      {"intercept", value_json(s.intercept)},
                      {"density", value_json(s.density)},
                      {"source", s.source == SourceSide::kMu ? "mu" : "nu"}});
  }
  j["pieces"] = p;
  OJson st = OJson::array();
  for (const auto& s : lm.provenance) {
    OJson o{{"kind", step_name(s.kind)}, {"run", s.run}, {"delta", value_json(s.delta)}, {"lo", value_json(s.cut_lo)}};
    if (s.kind == StepKind::kPair) o["mid"] = value_json(s.cut_mid);
    o["hi"] = value_json(s.cut_hi);
    st.push_back(o);
  }
  j["steps"] = st;
  j["operations"] = lm.operations;
  return j.dump(2) + "\n";
}

}  // namespace

std::string line_matching_json(const LineMatching<double>& lm) { return line_json(lm); }
std::string line_matching_json(const LineMatching<Rational>& lm) { return line_json(lm); }

std::string potential_json(const DenseMatrix<Rational>& u) {
  OJson rows = OJson::array();
  for (std::size_t x = 0; x < u.rows(); ++x) {
    OJson r = OJson::array();
    for (std::size_t y = 0; y < u.cols(); ++y) r.push_back(format_rational(u(x, y)));
    rows.push_back(r);
  }
  OJson j;
  j["kind"] = "potential";
  j["u"] = rows;
  return j.dump(2) + "\n";
}

std::string cycle_json(const ImprovementCycle& c) {
  OJson cs = OJson::array();
  for (const auto& z : c.couples) cs.push_back(OJson::array({z.x, z.y}));
  OJson j;
  j["kind"] = "improvement_cycle";
  j["couples"] = cs;
  return j.dump(2) + "\n";
}

std::string sweep_json(const std::vector<SweepRow>& rows) {
  OJson out = OJson::array();
  for (const auto& r : rows) {
    OJson o;
    o["alpha"] = r.alpha;
    o["theoretical_eps"] = optional_json(r.theoretical_eps);
    if (r.report && r.audit) {
      o["objective"] = r.report->objective;
      o["stability_gap"] = r.audit->stability_gap;
      o["egalitarian_eps"] = r.audit->egalitarian_eps;
      o["welfare"] = r.audit->welfare;
      o["u_min_star"] = r.audit->u_min_star;
      if (r.theoretical_eps) {
        double measured = r.alpha > 0 ? r.audit->stability_gap : r.audit->egalitarian_eps;
        o["bound_ok"] = measured <= *r.theoretical_eps + 1e-9;
      } else {
        o["bound_ok"] = nullptr;
      }
    }
    if (!r.error.empty()) o["error"] = r.error;
    out.push_back(o);
  }
  OJson j;
  j["kind"] = "sweep";
  j["rows"] = out;
  return j.dump(2) + "\n";
}

std::vector<Arc> sample_arcs(const LineMatching<double>& lm, std::size_t per_piece) {
  if (per_piece == 0) throw ValidationError("need at least one arc per piece");
  std::vector<Arc> arcs;
  auto sample = [&](double lo, double hi, double density, auto&& map) {
    double w = (hi - lo) / static_cast<double>(per_piece);
    for (std::size_t k = 0; k < per_piece; ++k) {
      double x = lo + w * (static_cast<double>(k) + 0.5);
      arcs.push_back({x, map(x), density * w});
    }
  };
  for (const auto& d : lm.diagonal) sample(d.lo, d.hi, d.density, [](double x) { return x; });
  for (const auto& p : lm.monge_pieces) sample(p.lo, p.hi, p.density, [&](double x) { return p.map(x); });
  return arcs;
}

std::vector<Arc> coupling_arcs(const Coupling& c, const DiscreteMarket& m) {
  if (!m.has_points() || m.utility_spec().dim() != 1) throw ValidationError("arc diagrams need a one-dimensional market");
  std::vector<Arc> arcs;
  for (const auto& e : support(c).entries) arcs.push_back({m.x_atoms()[e.x][0], m.y_atoms()[e.y][0], e.mass});
  return arcs;
}

std::string render_arcs(const LineMatching<double>& lm, const PiecewiseDensityMarket& m, const SvgOptions& o) {
  std::vector<Arc> arcs = sample_arcs(lm, o.arcs_per_piece);
  Canvas c = make_canvas(m.breakpoints().front(), m.breakpoints().back(), arcs, o);
  double dmax = 0.0;
  for (std::size_t i = 0; i < m.intervals(); ++i) dmax = std::max({dmax, m.f()[i], m.g()[i]});
  std::ostringstream out;
  svg_open(out, c);
  for (std::size_t i = 0; i < m.intervals(); ++i) {
    double x0 = c.sx(m.breakpoints()[i]), x1 = c.sx(m.breakpoints()[i + 1]);
    if (m.f()[i] > 0) {
      double h = c.bar * m.f()[i] / dmax;
      out << "<rect class=\"mu\" x=\"" << fmt(x0) << "\" y=\"" << fmt(c.axis - h) << "\" width=\"" << fmt(x1 - x0)
          << "\" height=\"" << fmt(h) << "\" fill=\"#4a7ab5\" fill-opacity=\"0.35\"/>\n";
    }
    if (m.g()[i] > 0) {
      double h = c.bar * m.g()[i] / dmax;
      out << "<rect class=\"nu\" x=\"" << fmt(x0) << "\" y=\"" << fmt(c.axis) << "\" width=\"" << fmt(x1 - x0)
          << "\" height=\"" << fmt(h) << "\" fill=\"#d99a2b\" fill-opacity=\"0.35\"/>\n";
    }
  }
  svg_arcs(out, c, arcs);
  return out.str();
}

std::string render_arcs(const Coupling& cp, const DiscreteMarket& m, const SvgOptions& o) {
  std::vector<Arc> arcs = coupling_arcs(cp, m);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, mmax = 0.0;
  for (const auto& a : m.x_atoms()) lo = std::min(lo, a[0]), hi = std::max(hi, a[0]);
  for (const auto& a : m.y_atoms()) lo = std::min(lo, a[0]), hi = std::max(hi, a[0]);
  for (double q : m.x_masses()) mmax = std::max(mmax, q);
  for (double q : m.y_masses()) mmax = std::max(mmax, q);
  Canvas c = make_canvas(lo, hi, arcs, o);
  std::ostringstream out;
  svg_open(out, c);
  for (std::size_t i = 0; i < m.nx(); ++i) {
    double h = c.bar * m.x_masses()[i] / mmax;
    out << "<rect class=\"mu\" x=\"" << fmt(c.sx(m.x_atoms()[i][0]) - 1.5) << "\" y=\"" << fmt(c.axis - h)
        << "\" width=\"3.000\" height=\"" << fmt(h) << "\" fill=\"#4a7ab5\"/>\n";
  }
  for (std::size_t j = 0; j < m.ny(); ++j) {
    double h = c.bar * m.y_masses()[j] / mmax;
    out << "<rect class=\"nu\" x=\"" << fmt(c.sx(m.y_atoms()[j][0]) - 1.5) << "\" y=\"" << fmt(c.axis)
        << "\" width=\"3.000\" height=\"" << fmt(h) << "\" fill=\"#d99a2b\"/>\n";
  }
  svg_arcs(out, c, arcs);
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path + ": cannot write file");
  out << text;
}

}  // namespace matchport
