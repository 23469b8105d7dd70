#include "matchport/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace matchport;
using OJson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kBoundFailed = 3, kSolverFailed = 4 };

struct Check {
  std::string name;
  bool ok = true;
  double value = 0.0;
  std::optional<double> bound;
};

struct SolveArgs {
  std::string file;
  std::string method;
  std::optional<double> alpha;
  bool rational = false;
  bool limit = false;
  std::size_t cells = 0;
  std::string svg;
  std::string audit = "all";
  std::optional<double> eps;
  std::size_t arcs = 5;
  std::string out;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

bool wants(const std::string& audit, const char* what) { return audit == "all" || audit == what; }

OJson checks_json(const std::vector<Check>& checks) {
  OJson a = OJson::array();
  for (const auto& c : checks) {
    OJson o{{"name", c.name}, {"ok", c.ok}, {"value", c.value}};
    o["bound"] = c.bound ? OJson(*c.bound) : OJson(nullptr);
    a.push_back(o);
  }
  return a;
}

bool all_ok(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.ok) return false;
  }
  return true;
}

double file_alpha(const SolveArgs& a, const MarketFile& f) {
  if (a.alpha) return *a.alpha;
  if (f.audit.alpha) return f.audit.alpha->as_double();
  return 0.0;
}

std::size_t file_cells(std::size_t cli, const MarketFile& f, std::size_t fallback) {
  if (cli > 0) return cli;
  if (f.audit.cells) return *f.audit.cells;
  return fallback;
}

// Checks shared by every two-sided coupling.
void audit_discrete(const Coupling& c, const DiscreteMarket& m, std::optional<double> alpha, bool claims_stable,
                    const SolveArgs& a, std::vector<Check>& checks, OJson& out) {
  MarketBaseline base = market_baseline(m);
  AuditReport r = audit_coupling(c, m, base, alpha && *alpha != 0.0 ? alpha : std::nullopt);
  out["audit"] = OJson::parse(audit_json(r));
  double scale = 1.0;
  {
    auto [lo, hi] = m.utility_range();
    scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  }
  if (wants(a.audit, "stability")) {
    if (claims_stable) {
      checks.push_back({"stability", r.stability_gap <= 1e-12 * scale, r.stability_gap, 0.0});
    } else if (alpha && *alpha > 0) {
      double b = stability_bound(*alpha);
      checks.push_back({"stability", r.stability_gap <= b + 1e-9, r.stability_gap, b});
    }
  }
  if (wants(a.audit, "egalitarian") && alpha && *alpha < 0) {
    double b = egalitarian_eps_bound(*alpha);
    checks.push_back({"egalitarian", r.egalitarian_eps <= b + 1e-9, r.egalitarian_eps, b});
  }
  if (wants(a.audit, "welfare")) {
    double eps = a.eps ? *a.eps : r.stability_gap;
    WelfareBoundResult w = welfare_bound_check(c, m, std::max(eps, r.stability_gap));
    checks.push_back({"welfare", w.welfare_ok, w.welfare_margin, 0.0});
    checks.push_back({"welfare_egalitarian", w.egalitarian_ok, w.egalitarian_margin, 0.0});
  }
  if (a.audit == "nocrossing" || (a.audit == "all" && claims_stable && m.has_points() && m.utility_spec().dim() == 1)) {
    auto v = no_crossing_check(c, m);
    checks.push_back({"nocrossing", v.empty(), static_cast<double>(v.size()), 0.0});
  }
}

int solve_discrete(const SolveArgs& a, const MarketFile& f, OJson& out, std::vector<Check>& checks) {
  std::string method = a.method.empty() ? "ot" : a.method;
  DiscreteMarket m = to_discrete_market(f);
  double alpha = file_alpha(a, f);
  if (method == "ot") {
    bool exact = (a.rational || f.exact()) && alpha == 0.0 && !a.limit;
    if (exact && a.rational) {
      ExactDiscreteMarket em = to_exact_discrete_market(f);
      ExactSolveReport r = solve_transport(em, CostSpec::neg_utility());
      out["mode"] = "rational";
      out["objective"] = format_rational(r.objective);
      out["coupling"] = OJson::parse(coupling_json(r.coupling));
      Coupling c;
      c.total_mass = to_double(r.coupling.total_mass);
      for (const auto& e : r.coupling.entries) c.entries.push_back({e.x, e.y, to_double(e.mass)});
      audit_discrete(c, m, std::nullopt, false, a, checks, out);
      if (!a.svg.empty()) write_text_file(a.svg, render_arcs(c, m, {800, 400, a.arcs}));
      return kOk;
    }
    SolveReport r = a.limit ? stable_limit(m) : solve_transport(m, CostSpec::alpha(alpha));
    out["mode"] = "float";
    out["alpha"] = a.limit ? r.alpha : alpha;
    out["objective"] = r.objective;
    out["iterations"] = r.iterations;
    out["coupling"] = OJson::parse(coupling_json(r.coupling));
    audit_discrete(r.coupling, m, a.limit ? std::optional<double>() : std::optional<double>(alpha), a.limit, a,
                   checks, out);
    if (!a.svg.empty()) write_text_file(a.svg, render_arcs(r.coupling, m, {800, 400, a.arcs}));
    return kOk;
  }
  if (method == "greedy") {
    Coupling c = greedy_matching(m);
    out["coupling"] = OJson::parse(coupling_json(c));
    audit_discrete(c, m, std::nullopt, true, a, checks, out);
    if (!a.svg.empty()) write_text_file(a.svg, render_arcs(c, m, {800, 400, a.arcs}));
    return kOk;
  }
  if (method == "bruteforce") {
    BruteForceResult b = brute_force_oracle(m);
    OJson stable = OJson::array();
    for (const auto& p : b.stable_set) stable.push_back(p);
    out["stable_set"] = stable;
    out["greedy"] = b.greedy;
    out["welfare_opt"] = b.welfare_opt;
    out["welfare_opt_value"] = b.welfare_opt_value;
    out["bottleneck_opt"] = b.bottleneck_opt;
    out["bottleneck_value"] = b.bottleneck_value;
    checks.push_back({"greedy_in_stable_set", b.greedy_is_stable, b.greedy_is_stable ? 1.0 : 0.0, std::nullopt});
    if (wants(a.audit, "welfare")) {
      for (const auto& p : b.stable_set) {
        WelfareBoundResult w = welfare_bound_check(permutation_coupling(m, p), m, 0.0);
        checks.push_back({"welfare", w.welfare_ok && w.egalitarian_ok, w.welfare_margin, 0.0});
      }
    }
    return kOk;
  }
  throw ValidationError("method '" + method + "' does not apply to a discrete market");
}

int solve_line(const SolveArgs& a, const MarketFile& f, OJson& out, std::vector<Check>& checks) {
  std::string method = a.method.empty() ? "line" : a.method;
  PiecewiseDensityMarket m = to_line_market(f);
  std::size_t cells = file_cells(a.cells, f, 50);
  if (method == "ot") {
    DiscreteMarket dm = discretize_line_market(m, cells);
    double alpha = file_alpha(a, f);
    SolveReport r = solve_transport(dm, CostSpec::alpha(alpha));
    out["alpha"] = alpha;
    out["cells"] = cells;
    out["objective"] = r.objective;
    out["coupling"] = OJson::parse(coupling_json(r.coupling));
    audit_discrete(r.coupling, dm, alpha, false, a, checks, out);
    if (!a.svg.empty()) write_text_file(a.svg, render_arcs(r.coupling, dm, {800, 400, a.arcs}));
    return kOk;
  }
  if (method != "line" && method != "assortative") {
    throw ValidationError("method '" + method + "' does not apply to a piecewise_line market");
  }
  LineMatching<double> lm;
  if (a.rational || f.exact()) {
    ExactPiecewiseMarket em = to_exact_line_market(f);
    LineMatching<Rational> exact = method == "line" ? stable_line_matching(em) : assortative_matching(em);
    out["mode"] = "rational";
    out["matching"] = OJson::parse(line_matching_json(exact));
    lm = to_double_matching(exact);
  } else {
    lm = method == "line" ? stable_line_matching(m) : assortative_matching(m);
    out["mode"] = "float";
    out["matching"] = OJson::parse(line_matching_json(lm));
  }
  SampledMatching s = sample_line_matching(lm, cells);
  AuditReport r = audit_coupling(s.coupling, s.market, market_baseline(s.market));
  out["cells"] = cells;
  out["audit"] = OJson::parse(audit_json(r));
  if (method == "line") {
    // The sampled coupling only approximates the continuum matching; allow
    // gaps up to a few cell widths.
    double h = 0.0;
    for (const auto& p : lm.monge_pieces) h = std::max(h, (p.hi - p.lo) / static_cast<double>(cells) * std::max(1.0, std::abs(p.slope)));
    if (wants(a.audit, "stability")) checks.push_back({"stability", r.stability_gap <= 4.0 * h + 1e-12, r.stability_gap, 4.0 * h});
  }
  // The assortative matching crosses whenever the sides are apart, so it is
  // only checked when asked for by name.
  if (method == "line" ? wants(a.audit, "nocrossing") : a.audit == "nocrossing") {
    auto v = no_crossing_check(lm);
    checks.push_back({"nocrossing", v.empty(), static_cast<double>(v.size()), 0.0});
  }
  if (!a.svg.empty()) write_text_file(a.svg, render_arcs(lm, m, {800, 400, a.arcs}));
  return kOk;
}

int solve_k(const SolveArgs& a, const MarketFile& f, OJson& out, std::vector<Check>& checks) {
  if (!a.method.empty() && a.method != "kmarginal") {
    throw ValidationError("method '" + a.method + "' does not apply to a k_discrete market");
  }
  KMarket m = to_k_market(f);
  double alpha = file_alpha(a, f);
  KSolveReport r = solve_k_transport(m, CostSpec::alpha(alpha));
  out["alpha"] = alpha;
  out["objective"] = r.objective;
  out["iterations"] = r.iterations;
  out["coupling"] = OJson::parse(k_coupling_json(r.coupling));
  KStabilityResult st = k_stability(r.coupling, m);
  double eps = a.eps ? *a.eps : st.gap;
  AuditReport rep = k_audits(r.coupling, m, std::max(eps, st.gap));
  if (alpha != 0.0) {
    rep.alpha = alpha;
    rep.theoretical_eps = theoretical_eps(alpha, m.k());
  }
  out["audit"] = OJson::parse(audit_json(rep));
  if (wants(a.audit, "stability") && alpha > 0) {
    double b = stability_bound(alpha, m.k());
    checks.push_back({"stability", st.gap <= b + 1e-9, st.gap, b});
  }
  if (wants(a.audit, "egalitarian") && alpha < 0) {
    double b = egalitarian_eps_bound(alpha);
    checks.push_back({"egalitarian", rep.egalitarian_eps <= b + 1e-9, rep.egalitarian_eps, b});
  }
  if (wants(a.audit, "welfare")) checks.push_back({"welfare", rep.welfare_bound_ok, rep.welfare, std::nullopt});
  return kOk;
}

int run_solve(const SolveArgs& a) {
  MarketFile f = parse_market_file(a.file);
  OJson out;
  out["kind"] = "solve_report";
  out["market"] = kind_name(f.kind);
  if (!f.name.empty()) out["name"] = f.name;
  std::vector<Check> checks;
  switch (f.kind) {
    case MarketKind::kDiscrete:
      solve_discrete(a, f, out, checks);
      break;
    case MarketKind::kPiecewiseLine:
      solve_line(a, f, out, checks);
      break;
    case MarketKind::kKDiscrete:
      solve_k(a, f, out, checks);
      break;
    case MarketKind::kPreferences:
      throw ValidationError("preference profiles are handled by the potential command");
  }
  out["checks"] = checks_json(checks);
  out["ok"] = all_ok(checks);
  emit(a.out, out.dump(2) + "\n");
  return all_ok(checks) ? kOk : kBoundFailed;
}

std::vector<double> parse_alphas(const std::string& csv) {
  std::vector<double> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(to_double(parse_rational(item)));
  }
  return out;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream t;
  char line[256];
  std::snprintf(line, sizeof line, "%10s %14s %12s %12s %12s %6s\n", "alpha", "objective", "gap", "egal_eps",
                "bound", "ok");
  t << line;
  for (const auto& r : rows) {
    std::string bound = r.theoretical_eps ? std::to_string(*r.theoretical_eps) : "n/a";
    if (!r.error.empty()) {
      std::snprintf(line, sizeof line, "%10.4g  error: %s\n", r.alpha, r.error.c_str());
    } else {
      double measured = r.alpha > 0 ? r.audit->stability_gap : r.audit->egalitarian_eps;
      const char* ok = !r.theoretical_eps ? "-" : (measured <= *r.theoretical_eps + 1e-9 ? "yes" : "NO");
      std::snprintf(line, sizeof line, "%10.4g %14.8g %12.6g %12.6g %12s %6s\n", r.alpha, r.report->objective,
                    r.audit->stability_gap, r.audit->egalitarian_eps, bound.c_str(), ok);
    }
    t << line;
  }
  return t.str();
}

int run_sweep(const std::string& file, const std::string& alphas_csv, std::size_t cells, unsigned threads,
              const std::string& format, const std::string& out) {
  MarketFile f = parse_market_file(file);
  std::vector<double> alphas;
  if (!alphas_csv.empty()) {
    alphas = parse_alphas(alphas_csv);
  } else {
    for (const auto& a : f.audit.alphas) alphas.push_back(a.as_double());
  }
  if (alphas.empty()) throw ValidationError("no alphas given (use --alphas or audit.alphas)");
  std::optional<DiscreteMarket> m;
  if (f.kind == MarketKind::kDiscrete) {
    m = to_discrete_market(f);
  } else if (f.kind == MarketKind::kPiecewiseLine) {
    m = discretize_line_market(to_line_market(f), file_cells(cells, f, 50));
  } else {
    throw ValidationError("sweep needs a discrete or piecewise_line market");
  }
  std::vector<SweepRow> rows = alpha_sweep(*m, alphas, threads);
  emit(out, format == "table" ? sweep_table(rows) : sweep_json(rows));
  bool failed = false, errored = false;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      errored = true;
      continue;
    }
    if (!r.theoretical_eps) continue;
    double measured = r.alpha > 0 ? r.audit->stability_gap : r.audit->egalitarian_eps;
    failed = failed || measured > *r.theoretical_eps + 1e-9;
  }
  if (errored) return kSolverFailed;
  return failed ? kBoundFailed : kOk;
}

int run_potential(const std::string& file, const std::string& out) {
  MarketFile f = parse_market_file(file);
  PreferenceProfile p = to_profile(f);
  if (auto cycle = check_acyclicity(p)) {
    emit(out, cycle_json(*cycle));
    std::cerr << "no potential: the profile has a strict improvement cycle of length " << cycle->couples.size()
              << "\n";
    return kBoundFailed;
  }
  emit(out, potential_json(build_potential(p)));
  return kOk;
}

int run_render(const SolveArgs& a) {
  if (a.svg.empty()) throw ValidationError("render needs --svg");
  MarketFile f = parse_market_file(a.file);
  if (f.kind == MarketKind::kPiecewiseLine) {
    std::string method = a.method.empty() ? "line" : a.method;
    if (method != "line" && method != "assortative") throw ValidationError("render supports line or assortative here");
    LineMatching<double> lm;
    if (f.exact()) {
      ExactPiecewiseMarket em = to_exact_line_market(f);
      lm = to_double_matching(method == "line" ? stable_line_matching(em) : assortative_matching(em));
    } else {
      PiecewiseDensityMarket m = to_line_market(f);
      lm = method == "line" ? stable_line_matching(m) : assortative_matching(m);
    }
    write_text_file(a.svg, render_arcs(lm, to_line_market(f), {800, 400, a.arcs}));
    return kOk;
  }
  if (f.kind == MarketKind::kDiscrete) {
    DiscreteMarket m = to_discrete_market(f);
    std::string method = a.method.empty() ? "ot" : a.method;
    Coupling c;
    if (method == "greedy") {
      c = greedy_matching(m);
    } else if (method == "ot") {
      c = solve_transport(m, CostSpec::alpha(file_alpha(a, f))).coupling;
    } else {
      throw ValidationError("render supports ot or greedy for discrete markets");
    }
    write_text_file(a.svg, render_arcs(c, m, {800, 400, a.arcs}));
    return kOk;
  }
  throw ValidationError("render needs a one-dimensional market");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matchport: stable, welfare-maximising and egalitarian matchings via optimal transport"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve a market file and audit the result");
  s->add_option("file", solve.file, "Market file")->required();
  s->add_option("--method", solve.method, "ot, line, assortative, greedy, bruteforce or kmarginal")
      ->check(CLI::IsMember({"ot", "line", "assortative", "greedy", "bruteforce", "kmarginal"}));
  s->add_option("--alpha", solve.alpha, "Cost parameter alpha (0 maximises welfare)");
  s->add_flag("--rational", solve.rational, "Exact rational arithmetic where available");
  s->add_flag("--stable-limit", solve.limit, "Pick alpha large enough for exact stability");
  s->add_option("--cells", solve.cells, "Cells per interval when discretising a line market");
  s->add_option("--svg", solve.svg, "Write an arc diagram");
  s->add_option("--arcs", solve.arcs, "Arcs per piece in diagrams");
  s->add_option("--audit", solve.audit, "stability, egalitarian, welfare, nocrossing or all")
      ->check(CLI::IsMember({"stability", "egalitarian", "welfare", "nocrossing", "all"}));
  s->add_option("--eps", solve.eps, "Stability level for the welfare bound check");
  s->add_option("--out", solve.out, "Report path (default stdout)");

  std::string sweep_file, sweep_alphas, sweep_format = "json", sweep_out;
  std::size_t sweep_cells = 0;
  unsigned sweep_threads = 0;
  auto* sw = app.add_subcommand("sweep", "Solve and audit over a list of alphas");
  sw->add_option("file", sweep_file, "Market file")->required();
  sw->add_option("--alphas", sweep_alphas, "Comma separated alphas");
  sw->add_option("--cells", sweep_cells, "Cells per interval for line markets");
  sw->add_option("--threads", sweep_threads, "Worker cap (MATCHPORT_THREADS also applies)");
  sw->add_option("--format", sweep_format, "json or table")->check(CLI::IsMember({"json", "table"}));
  sw->add_option("--out", sweep_out, "Report path (default stdout)");

  std::string pot_file, pot_out;
  auto* po = app.add_subcommand("potential", "Test a preference profile for a potential");
  po->add_option("file", pot_file, "Preferences file")->required();
  po->add_option("--out", pot_out, "Report path (default stdout)");

  SolveArgs render;
  auto* re = app.add_subcommand("render", "Draw an arc diagram of a one-dimensional matching");
  re->add_option("file", render.file, "Market file")->required();
  re->add_option("--svg", render.svg, "Output path")->required();
  re->add_option("--method", render.method, "line, assortative, ot or greedy");
  re->add_option("--alpha", render.alpha, "Cost parameter for --method ot");
  re->add_option("--arcs", render.arcs, "Arcs per piece");

  std::string val_file, val_out;
  auto* va = app.add_subcommand("validate", "Parse a market file and write it back in normal form");
  va->add_option("file", val_file, "Market file")->required();
  va->add_option("--out", val_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (s->parsed()) return run_solve(solve);
    if (sw->parsed()) return run_sweep(sweep_file, sweep_alphas, sweep_cells, sweep_threads, sweep_format, sweep_out);
    if (po->parsed()) return run_potential(pot_file, pot_out);
    if (re->parsed()) return run_render(render);
    if (va->parsed()) {
      emit(val_out, write_market(parse_market_file(val_file)));
      return kOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolverFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailed;
  }
  return kOk;
}
