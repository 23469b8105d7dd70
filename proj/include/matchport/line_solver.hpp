#pragma once

// Stable matching for piecewise-constant densities on the line.
//
// After removing the common part of mu and nu, rho = mu - nu alternates in
// sign over runs I_0..I_K. Across each boundary between two runs, mass is
// paired symmetrically outward: the m units nearest the boundary on each
// side are matched anti-assortatively, and the matched distance d(m) grows
// with m. Writing m_k(delta) for the mass consumed at boundary k once
// distances up to delta are allowed, run j is exhausted at the smallest
// delta with m_j(delta) + m_{j+1}(delta) >= M_j (one term for end runs). The
// run exhausted first is cut out together with its partners as independent
// anti-diagonal submarkets, and the process repeats until at most one sign
// change is left, which closes anti-assortatively. All quantities are
// piecewise linear, so rational inputs give exact outputs.

#include "matchport/market.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

namespace matchport {

enum class Sign : int { kNegative = -1, kZero = 0, kPositive = 1 };

template <class T>
struct SignedInterval {
  T lo, hi;
  Sign sign = Sign::kZero;
  T mass;  // |rho| mass of the interval
};

template <class T>
struct SignedDecomposition {
  std::vector<SignedInterval<T>> intervals;
  std::size_t sign_changes = 0;
};

template <class T>
struct DiagonalSegment {
  T lo, hi, density;
  bool operator==(const DiagonalSegment&) const = default;
};

enum class SourceSide { kMu, kNu };

// x in [lo, hi) carrying mu density `density` is sent to y = slope * x + intercept.
template <class T>
struct MongePiece {
  T lo, hi, slope, intercept, density;
  SourceSide source = SourceSide::kMu;

  T map(const T& x) const { return slope * x + intercept; }
  T mass() const { return density * (hi - lo); }
  bool operator==(const MongePiece&) const = default;
};

enum class StepKind { kDiagonal, kPair, kEnd, kClosure };

template <class T>
struct ExtractionStep {
  StepKind kind = StepKind::kClosure;
  std::size_t run = 0;  // index of the exhausted run at the time of the step
  T delta;              // matched distance reached at the step
  // kPair: J1 = [cut_lo, cut_mid], J2 = [cut_mid, cut_hi]. Other kinds use [cut_lo, cut_hi].
  T cut_lo, cut_mid, cut_hi;
  bool operator==(const ExtractionStep&) const = default;
};

template <class T>
struct LineMatching {
  std::vector<DiagonalSegment<T>> diagonal;
  std::vector<MongePiece<T>> monge_pieces;
  std::vector<ExtractionStep<T>> provenance;
  std::size_t operations = 0;  // constancy pieces visited; a cost measure
};

template <class T>
struct DiagonalSplit {
  std::vector<DiagonalSegment<T>> diagonal;
  BasicPiecewiseMarket<T> residual;
};

template <class T>
struct Extraction {
  std::vector<BasicPiecewiseMarket<T>> submarkets;  // one or two anti-diagonal markets
  BasicPiecewiseMarket<T> residual;
  ExtractionStep<T> step;
  std::size_t operations = 0;
};

struct MatchTarget {
  double y = 0.0;
  double share = 0.0;
};

namespace line_detail {

template <class T>
struct Piece {
  T lo, hi, density;
};

template <class T>
struct Run {
  Sign sign = Sign::kZero;
  std::vector<Piece<T>> pieces;  // nonzero pieces, left to right
  T mass = T(0);
};

template <class T>
std::vector<Run<T>> runs_of(const BasicPiecewiseMarket<T>& m, std::size_t& ops) {
  std::vector<Run<T>> runs;
  for (std::size_t i = 0; i < m.intervals(); ++i) {
    ++ops;
    T d = m.f()[i] - m.g()[i];
    if (d == 0) continue;
    Sign s = d > 0 ? Sign::kPositive : Sign::kNegative;
    if (s == Sign::kNegative) d = -d;
    if (runs.empty() || runs.back().sign != s) runs.push_back(Run<T>{s, {}, T(0)});
    runs.back().pieces.push_back({m.breakpoints()[i], m.breakpoints()[i + 1], d});
    runs.back().mass += d * m.width(i);
  }
  return runs;
}

// Mass-to-position map walking away from a boundary.
template <class T>
struct Walk {
  std::vector<Piece<T>> pieces;  // in walking order
  std::vector<T> start;          // cumulative mass before each piece
  bool leftward = false;

  Walk(const Run<T>& run, bool walk_left) : leftward(walk_left) {
    pieces = run.pieces;
    if (walk_left) std::reverse(pieces.begin(), pieces.end());
    T acc(0);
    for (const auto& p : pieces) {
      start.push_back(acc);
      acc += p.density * (p.hi - p.lo);
    }
  }

  // Piece owning mass m: start < m <= start + mass; m = 0 maps to piece 0.
  std::size_t locate(const T& m) const {
    std::size_t k = static_cast<std::size_t>(std::upper_bound(start.begin(), start.end(), m) - start.begin());
    if (k > 0) --k;
    if (k > 0 && start[k] == m) --k;
    return k;
  }

  T position(const T& m) const {
    std::size_t k = locate(m);
    const Piece<T>& p = pieces[k];
    T off = (m - start[k]) / p.density;
    return leftward ? T(p.hi - off) : T(p.lo + off);
  }
};

// Knots (delta, m) of the consumed mass m(delta) at one boundary, capped.
template <class T>
std::vector<std::pair<T, T>> consumption_knots(const Walk<T>& left, const Walk<T>& right, const T& cap,
                                               std::size_t& ops) {
  std::vector<T> marks;
  for (const T& s : left.start) marks.push_back(s);
  for (const T& s : right.start) marks.push_back(s);
  marks.push_back(cap);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  std::vector<std::pair<T, T>> knots;
  for (std::size_t k = 0; k + 1 < marks.size() && marks[k] < cap; ++k) {
    ++ops;
    const T& m0 = marks[k];
    const T& m1 = marks[k + 1];
    // No mark lies inside (m0, m1], so the pieces owning m1 own all of it.
    std::size_t li = left.locate(m1), ri = right.locate(m1);
    T a0 = left.pieces[li].hi - (m0 - left.start[li]) / left.pieces[li].density;
    T b0 = right.pieces[ri].lo + (m0 - right.start[ri]) / right.pieces[ri].density;
    knots.emplace_back(T(b0 - a0), m0);
    knots.emplace_back(T(right.position(m1) - left.position(m1)), m1);
  }
  return knots;
}

template <class T>
T eval_knots(const std::vector<std::pair<T, T>>& knots, const T& delta) {
  if (knots.empty() || delta < knots.front().first) return T(0);
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(knots.begin(), knots.end(), delta, [](const T& d, const auto& kn) { return d < kn.first; }) -
      knots.begin());
  if (k == knots.size()) return knots.back().second;
  const auto& a = knots[k - 1];
  const auto& b = knots[k];
  if (b.first == a.first) return b.second;
  return a.second + (delta - a.first) * (b.second - a.second) / (b.first - a.first);
}

// Smallest delta with sum of the consumption functions >= target.
template <class T>
std::optional<T> first_delta(const std::vector<const std::vector<std::pair<T, T>>*>& fs, const T& target,
                             std::size_t& ops) {
  std::vector<T> ds;
  for (const auto* f : fs) {
    for (const auto& kn : *f) ds.push_back(kn.first);
  }
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  T slack = T(0);
  if constexpr (!ScalarTraits<T>::exact) slack = target * T(1e-12);
  auto total = [&](const T& d) {
    T s(0);
    for (const auto* f : fs) s += eval_knots(*f, d);
    return s;
  };
  T prev_d(0), prev_s(0);
  bool have_prev = false;
  for (const T& d : ds) {
    ++ops;
    T s = total(d);
    if (s >= target - slack) {
      if (!have_prev || s == prev_s) return d;
      T hit = prev_d + (target - prev_s) * (d - prev_d) / (s - prev_s);
      return std::min(std::max(hit, prev_d), d);
    }
    prev_d = d;
    prev_s = s;
    have_prev = true;
  }
  return std::nullopt;
}

template <class T>
BasicPiecewiseMarket<T> with_cuts(const BasicPiecewiseMarket<T>& m, std::vector<T> cuts) {
  std::vector<T> b = m.breakpoints();
  const T lo = b.front(), hi = b.back();
  for (const T& c : cuts) {
    if (c > lo && c < hi) b.push_back(c);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<T> f, g;
  std::size_t src = 0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    while (m.breakpoints()[src + 1] <= b[i]) ++src;
    f.push_back(m.f()[src]);
    g.push_back(m.g()[src]);
  }
  return BasicPiecewiseMarket<T>(std::move(b), std::move(f), std::move(g));
}

// Splits m at lo and hi, returning (inside part, outside part).
template <class T>
std::pair<BasicPiecewiseMarket<T>, BasicPiecewiseMarket<T>> carve(const BasicPiecewiseMarket<T>& m, const T& lo,
                                                                  const T& hi) {
  BasicPiecewiseMarket<T> cut = with_cuts(m, {lo, hi});
  std::vector<T> fi, gi, fo, go;
  for (std::size_t i = 0; i < cut.intervals(); ++i) {
    bool inside = cut.breakpoints()[i] >= lo && cut.breakpoints()[i + 1] <= hi;
    fi.push_back(inside ? cut.f()[i] : T(0));
    gi.push_back(inside ? cut.g()[i] : T(0));
    fo.push_back(inside ? T(0) : cut.f()[i]);
    go.push_back(inside ? T(0) : cut.g()[i]);
  }
  return {BasicPiecewiseMarket<T>(cut.breakpoints(), std::move(fi), std::move(gi)),
          BasicPiecewiseMarket<T>(cut.breakpoints(), std::move(fo), std::move(go))};
}

template <class T>
void append_merged(std::vector<MongePiece<T>>& out, std::vector<MongePiece<T>> pieces) {
  out.insert(out.end(), pieces.begin(), pieces.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  std::vector<MongePiece<T>> merged;
  for (auto& p : out) {
    if (!merged.empty()) {
      auto& q = merged.back();
      if (q.hi == p.lo && q.slope == p.slope && q.intercept == p.intercept && q.density == p.density &&
          q.source == p.source) {
        q.hi = p.hi;
        continue;
      }
    }
    merged.push_back(p);
  }
  out = std::move(merged);
}

template <class T>
std::vector<Piece<T>> side_pieces(const BasicPiecewiseMarket<T>& m, bool mu) {
  std::vector<Piece<T>> out;
  for (std::size_t i = 0; i < m.intervals(); ++i) {
    const T& d = mu ? m.f()[i] : m.g()[i];
    if (d > 0) out.push_back({m.breakpoints()[i], m.breakpoints()[i + 1], d});
  }
  return out;
}

// Pairs mu pieces (in order) with nu pieces (in order) mass-by-mass.
// x_up / y_up choose the walking direction on each side.
template <class T>
std::vector<MongePiece<T>> pair_walk(std::vector<Piece<T>> mu, std::vector<Piece<T>> nu, bool x_up, bool y_up,
                                     std::size_t& ops) {
  if (!x_up) std::reverse(mu.begin(), mu.end());
  if (!y_up) std::reverse(nu.begin(), nu.end());
  std::vector<MongePiece<T>> out;
  T total(0);
  for (const auto& p : mu) total += p.density * (p.hi - p.lo);
  T dust = T(0);
  if constexpr (!ScalarTraits<T>::exact) dust = total * T(1e-13);
  std::size_t a = 0, b = 0;
  T used_a(0), used_b(0);  // mass already consumed from the current pieces
  while (a < mu.size() && b < nu.size()) {
    ++ops;
    const Piece<T>& p = mu[a];
    const Piece<T>& q = nu[b];
    T left_a = p.density * (p.hi - p.lo) - used_a;
    T left_b = q.density * (q.hi - q.lo) - used_b;
    T take = std::min(left_a, left_b);
    if (take > dust) {
      T xs = x_up ? T(p.lo + used_a / p.density) : T(p.hi - used_a / p.density);
      T ys = y_up ? T(q.lo + used_b / q.density) : T(q.hi - used_b / q.density);
      T xe = x_up ? T(xs + take / p.density) : T(xs - take / p.density);
      if (xe == xs) {
        // Take below the resolution of x; nothing to record.
      } else {
        T ratio = p.density / q.density;
        T slope = (x_up == y_up) ? ratio : T(-ratio);
        T intercept = ys - slope * xs;
        MongePiece<T> piece{x_up ? xs : xe, x_up ? xe : xs, slope, intercept, p.density, SourceSide::kMu};
        out.push_back(piece);
      }
    }
    if (left_a <= left_b) {
      ++a;
      used_a = T(0);
      used_b += left_a;
      if (left_a == left_b) {
        ++b;
        used_b = T(0);
      }
    } else {
      ++b;
      used_b = T(0);
      used_a += left_b;
    }
  }
  return out;
}

}  // namespace line_detail

template <class T>
SignedDecomposition<T> sign_changes(const BasicPiecewiseMarket<T>& m) {
  std::size_t ops = 0;
  auto runs = line_detail::runs_of(m, ops);
  SignedDecomposition<T> out;
  if (runs.empty()) {
    out.intervals.push_back({m.breakpoints().front(), m.breakpoints().back(), Sign::kZero, T(0)});
    return out;
  }
  for (std::size_t k = 0; k < runs.size(); ++k) {
    T lo = runs[k].pieces.front().lo;
    T hi = k + 1 < runs.size() ? runs[k + 1].pieces.front().lo : runs[k].pieces.back().hi;
    out.intervals.push_back({lo, hi, runs[k].sign, runs[k].mass});
  }
  out.sign_changes = runs.size() - 1;
  return out;
}

template <class T>
DiagonalSplit<T> split_diagonal(const BasicPiecewiseMarket<T>& m) {
  DiagonalSplit<T> out;
  std::vector<T> f, g;
  for (std::size_t i = 0; i < m.intervals(); ++i) {
    T common = std::min(m.f()[i], m.g()[i]);
    if (common > 0) {
      T lo = m.breakpoints()[i], hi = m.breakpoints()[i + 1];
      if (!out.diagonal.empty() && out.diagonal.back().hi == lo && out.diagonal.back().density == common) {
        out.diagonal.back().hi = hi;
      } else {
        out.diagonal.push_back({lo, hi, common});
      }
    }
    f.push_back(m.f()[i] - common);
    g.push_back(m.g()[i] - common);
  }
  out.residual = BasicPiecewiseMarket<T>(m.breakpoints(), std::move(f), std::move(g));
  return out;
}

template <class T>
LineMatching<T> anti_assortative(const BasicPiecewiseMarket<T>& sub) {
  using namespace line_detail;
  auto mu = side_pieces(sub, true);
  auto nu = side_pieces(sub, false);
  LineMatching<T> out;
  if (mu.empty() && nu.empty()) return out;
  if (mu.empty() || nu.empty()) throw ValidationError("anti_assortative needs mass on both sides");
  for (std::size_t i = 0; i < sub.intervals(); ++i) {
    if (sub.f()[i] > 0 && sub.g()[i] > 0) throw ValidationError("anti_assortative needs disjoint supports");
  }
  T tol = ScalarTraits<T>::tolerance();
  bool mu_left = mu.back().hi <= nu.front().lo + tol;
  bool nu_left = nu.back().hi <= mu.front().lo + tol;
  if (!mu_left && !nu_left) throw ValidationError("anti_assortative needs ordered supports");
  // Walk outward from the gap between the supports.
  std::size_t ops = 0;
  auto pieces = mu_left ? pair_walk(mu, nu, false, true, ops) : pair_walk(mu, nu, true, false, ops);
  append_merged(out.monge_pieces, std::move(pieces));
  out.operations = ops;
  return out;
}

template <class T>
LineMatching<T> assortative_matching(const BasicPiecewiseMarket<T>& m) {
  using namespace line_detail;
  LineMatching<T> out;
  std::size_t ops = 0;
  append_merged(out.monge_pieces, pair_walk(side_pieces(m, true), side_pieces(m, false), true, true, ops));
  out.operations = ops;
  return out;
}

template <class T>
Extraction<T> extract_independent_pair(const BasicPiecewiseMarket<T>& residual) {
  using namespace line_detail;
  for (std::size_t i = 0; i < residual.intervals(); ++i) {
    if (residual.f()[i] > 0 && residual.g()[i] > 0) {
      throw ValidationError("extraction needs mutually singular sides; split the diagonal first");
    }
  }
  Extraction<T> out;
  std::size_t& ops = out.operations;
  auto runs = runs_of(residual, ops);
  if (runs.size() < 3) throw ValidationError("extraction needs at least two sign changes");
  const std::size_t n = runs.size();
  // Boundary k sits between runs k-1 and k, for k = 1..n-1.
  std::vector<Walk<T>> lefts, rights;
  std::vector<std::vector<std::pair<T, T>>> knots(n);
  for (std::size_t k = 1; k < n; ++k) {
    lefts.emplace_back(runs[k - 1], true);
    rights.emplace_back(runs[k], false);
    T cap = std::min(runs[k - 1].mass, runs[k].mass);
    knots[k] = consumption_knots(lefts.back(), rights.back(), cap, ops);
  }
  std::optional<T> best;
  std::size_t best_run = 0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<const std::vector<std::pair<T, T>>*> fs;
    if (j >= 1) fs.push_back(&knots[j]);
    if (j + 1 < n) fs.push_back(&knots[j + 1]);
    auto d = first_delta(fs, runs[j].mass, ops);
    if (!d) continue;
    // Ties go to interior runs (lowest first), then to end runs, so an
    // interior run balanced against both neighbours empties in one step.
    const bool end = j == 0 || j + 1 == n;
    const bool best_end = best_run == 0 || best_run + 1 == n;
    bool better = !best;
    if (best) {
      bool less = false, equal = false;
      if constexpr (ScalarTraits<T>::exact) {
        less = *d < *best;
        equal = *d == *best;
      } else {
        less = *d < *best - ScalarTraits<T>::tolerance();
        equal = !less && *d <= *best + ScalarTraits<T>::tolerance();
      }
      better = less || (equal && best_end && !end);
    }
    if (better) {
      best = d;
      best_run = j;
    }
  }
  if (!best) throw SolverError("no run is ever exhausted; the residual is inconsistent");
  const T delta = *best;
  const std::size_t j = best_run;

  // Mass consumed at each affected boundary.
  std::vector<std::pair<std::size_t, T>> cuts;
  if (j == 0) {
    cuts.emplace_back(1, runs[0].mass);
  } else if (j == n - 1) {
    cuts.emplace_back(n - 1, runs[n - 1].mass);
  } else {
    T left = std::min(eval_knots(knots[j], delta), runs[j].mass);
    cuts.emplace_back(j, left);
    cuts.emplace_back(j + 1, T(runs[j].mass - left));
  }
  out.step.kind = (j == 0 || j == n - 1) ? StepKind::kEnd : StepKind::kPair;
  out.step.run = j;
  out.step.delta = delta;
  BasicPiecewiseMarket<T> rest = residual;
  std::vector<T> edges;
  for (const auto& [k, mass] : cuts) {
    if (!(mass > 0)) {
      edges.push_back(lefts[k - 1].pieces.front().hi);
      edges.push_back(rights[k - 1].pieces.front().lo);
      continue;
    }
    T lo = lefts[k - 1].position(mass);
    T hi = rights[k - 1].position(mass);
    edges.push_back(lo);
    edges.push_back(hi);
    auto [inside, outside] = carve(rest, lo, hi);
    out.submarkets.push_back(std::move(inside));
    rest = std::move(outside);
  }
  if (out.step.kind == StepKind::kPair) {
    out.step.cut_lo = edges[0];
    out.step.cut_mid = edges[1];
    out.step.cut_hi = edges[3];
  } else {
    out.step.cut_lo = edges[0];
    out.step.cut_mid = edges[1];
    out.step.cut_hi = edges[1];
  }
  out.residual = std::move(rest);
  return out;
}

template <class T>
LineMatching<T> stable_line_matching(const BasicPiecewiseMarket<T>& m) {
  LineMatching<T> out;
  DiagonalSplit<T> split = split_diagonal(m);
  out.diagonal = split.diagonal;
  out.operations += m.intervals();
  if (!out.diagonal.empty()) {
    ExtractionStep<T> step;
    step.kind = StepKind::kDiagonal;
    step.delta = T(0);
    step.cut_lo = out.diagonal.front().lo;
    step.cut_mid = step.cut_hi = out.diagonal.back().hi;
    out.provenance.push_back(step);
  }
  BasicPiecewiseMarket<T> residual = std::move(split.residual);
  for (;;) {
    SignedDecomposition<T> dec = sign_changes(residual);
    out.operations += residual.intervals();
    if (dec.sign_changes < 2) break;
    Extraction<T> ex = extract_independent_pair(residual);
    out.operations += ex.operations;
    for (const auto& sub : ex.submarkets) {
      LineMatching<T> part = anti_assortative(sub);
      out.operations += part.operations;
      line_detail::append_merged(out.monge_pieces, std::move(part.monge_pieces));
    }
    out.provenance.push_back(ex.step);
    residual = std::move(ex.residual);
  }
  LineMatching<T> last = anti_assortative(residual);
  out.operations += last.operations;
  if (!last.monge_pieces.empty()) {
    ExtractionStep<T> step;
    step.kind = StepKind::kClosure;
    step.delta = T(0);
    for (const auto& p : last.monge_pieces) {
      T d = p.map(p.lo) - p.lo;
      if (d < 0) d = -d;
      if (d > step.delta) step.delta = d;
    }
    step.cut_lo = last.monge_pieces.front().lo;
    step.cut_mid = step.cut_hi = last.monge_pieces.back().hi;
    out.provenance.push_back(step);
  }
  line_detail::append_merged(out.monge_pieces, std::move(last.monge_pieces));
  return out;
}

// Targets of x with their local mass shares (diagonal first).
template <class T>
std::vector<MatchTarget> eval_match_map(const LineMatching<T>& lm, double x) {
  auto collect = [&](bool closed) {
    std::vector<MatchTarget> out;
    double total = 0.0;
    for (const auto& d : lm.diagonal) {
      double lo = to_double(d.lo), hi = to_double(d.hi);
      if (x >= lo && (x < hi || (closed && x <= hi))) {
        out.push_back({x, to_double(d.density)});
        total += to_double(d.density);
      }
    }
    for (const auto& p : lm.monge_pieces) {
      double lo = to_double(p.lo), hi = to_double(p.hi);
      if (x >= lo && (x < hi || (closed && x <= hi))) {
        out.push_back({to_double(p.slope) * x + to_double(p.intercept), to_double(p.density)});
        total += to_double(p.density);
      }
    }
    for (auto& t : out) t.share /= total;
    return out;
  };
  auto out = collect(false);
  if (out.empty()) out = collect(true);
  if (out.empty()) throw ValidationError("x lies outside the support of mu");
  return out;
}

// Total mu mass carried by the matching (diagonal plus pieces).
template <class T>
T matched_mass(const LineMatching<T>& lm) {
  T s(0);
  for (const auto& d : lm.diagonal) s += d.density * (d.hi - d.lo);
  for (const auto& p : lm.monge_pieces) s += p.mass();
  return s;
}

template <class T>
LineMatching<double> to_double_matching(const LineMatching<T>& lm) {
  LineMatching<double> out;
  for (const auto& d : lm.diagonal) out.diagonal.push_back({to_double(d.lo), to_double(d.hi), to_double(d.density)});
  for (const auto& p : lm.monge_pieces) {
    out.monge_pieces.push_back({to_double(p.lo), to_double(p.hi), to_double(p.slope), to_double(p.intercept),
                                to_double(p.density), p.source});
  }
  for (const auto& s : lm.provenance) {
    out.provenance.push_back({s.kind, s.run, to_double(s.delta), to_double(s.cut_lo), to_double(s.cut_mid),
                              to_double(s.cut_hi)});
  }
  out.operations = lm.operations;
  return out;
}

template <class T>
BasicPiecewiseMarket<double> to_double_market(const BasicPiecewiseMarket<T>& m) {
  std::vector<double> b, f, g;
  for (const auto& v : m.breakpoints()) b.push_back(to_double(v));
  for (const auto& v : m.f()) f.push_back(to_double(v));
  for (const auto& v : m.g()) g.push_back(to_double(v));
  return BasicPiecewiseMarket<double>(std::move(b), std::move(f), std::move(g));
}

// A line matching sampled at cell midpoints, as a discrete market plus coupling.
struct SampledMatching {
  DiscreteMarket market;
  Coupling coupling;
};

SampledMatching sample_line_matching(const LineMatching<double>& lm, std::size_t cells_per_piece);

}  // namespace matchport
