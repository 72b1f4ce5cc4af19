#include "slopeforge/coding.hpp"

#include "slopeforge/entropy.hpp"
#include "slopeforge/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace slopeforge {

std::string Itinerary::letters() const {
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += ',';
    out += word[i] < 26 ? std::string(1, static_cast<char>('A' + word[i])) : std::to_string(word[i]);
  }
  return out;
}

std::size_t lap_of(const std::vector<Lap>& laps, const Rational& y) {
  auto it = std::lower_bound(laps.begin(), laps.end(), y,
                             [](const Lap& lap, const Rational& v) { return lap.interval.hi < v; });
  if (it == laps.end() || !it->interval.contains(y)) {
    throw PreconditionError("point " + to_string(y) + " outside the domain");
  }
  return static_cast<std::size_t>(it - laps.begin());
}

namespace {

// One orbit step consistent with the chosen lap.
Rational advance(const PwaMap& f, const Lap& lap, const Rational& x) {
  return f.eval(x, x == lap.interval.hi && x != lap.interval.lo ? Side::left : Side::right);
}

std::vector<std::size_t> code(const PwaMap& f, const std::vector<Lap>& laps, Rational x, int n) {
  std::vector<std::size_t> word;
  word.reserve(n);
  for (int k = 0; k < n; ++k) {
    const std::size_t i = lap_of(laps, x);
    word.push_back(i);
    if (k + 1 < n) x = advance(f, laps[i], x);
  }
  return word;
}

}  // namespace

Itinerary itinerary(const PwaMap& f, const Rational& x, int n) {
  const std::vector<Lap> lap_list = laps(f);
  Itinerary it;
  Rational cur = x;
  for (int k = 0; k < n; ++k) {
    const std::size_t i = lap_of(lap_list, cur);
    it.word.push_back(i);
    if (i + 1 < lap_list.size() && lap_list[i + 1].interval.lo == cur) it.ambiguous_at.push_back(k);
    if (k + 1 < n) cur = advance(f, lap_list[i], cur);
  }
  return it;
}

namespace {

// Increasing piecewise affine map onto [0, 1], constant on the runs and of
// equal slope elsewhere.
PwaMap collapse_map(const Interval& domain, const std::vector<Interval>& runs) {
  Rational collapsed = 0;
  for (const Interval& r : runs) collapsed += r.length();
  const Rational free = domain.length() - collapsed;
  if (free <= 0) throw PreconditionError("quotient degenerates to a point");
  std::vector<Rational> xs{domain.lo}, ys{Rational(0)};
  Rational seen = 0;
  for (const Interval& r : runs) {
    if (r.lo > xs.back()) {
      seen += r.lo - xs.back();
      xs.push_back(r.lo);
      ys.push_back(seen / free);
    }
    xs.push_back(r.hi);
    ys.push_back(seen / free);
  }
  if (xs.back() < domain.hi) {
    xs.push_back(domain.hi);
    ys.push_back(Rational(1));
  }
  return PwaMap::continuous(xs, ys, MapKind::function);
}

std::vector<Interval> merge_adjacent(std::vector<Interval> cells) {
  std::vector<Interval> out;
  for (Interval& c : cells) {
    if (!out.empty() && out.back().hi >= c.lo) {
      out.back().hi = std::max(out.back().hi, c.hi);
    } else {
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace

QuotientResult psm_reduce(const PwaMap& f, int depth, const IterationLimits& limits) {
  if (depth < 1) throw PreconditionError("coding depth must be >= 1");
  if (!entropy_lapcount(f, std::min(depth, 10), limits).positive()) {
    throw PreconditionError("entropy not positive");
  }
  const std::vector<Lap> lap_list = laps(f);

  // Iterates f^0..f^d; f^d's constant pieces carry the collapse.
  std::vector<Interval> cells;
  if (f.has_constant_piece()) {
    std::vector<PwaMap> iter{f};
    for (int k = 2; k <= depth; ++k) iter.push_back(compose(f, iter.back(), limits));
    const PwaMap& fd = iter.back();
    std::vector<Interval> flat;
    for (std::size_t i = 0; i < fd.segment_count(); ++i) {
      const Segment s = fd.segment(i);
      if (s.direction() != Direction::constant) continue;
      if (!flat.empty() && flat.back().hi == s.x0 && fd.eval(s.x0, Side::left) == s.y0) {
        flat.back().hi = s.x1;
      } else {
        flat.push_back({s.x0, s.x1});
      }
    }
    // Split each flat piece where the depth-d code changes; candidates are the
    // nodes of the iterates.
    std::vector<Rational> all_nodes;
    for (const PwaMap& g : iter) {
      for (const Node& node : g.nodes()) all_nodes.push_back(node.x);
    }
    std::sort(all_nodes.begin(), all_nodes.end());
    all_nodes.erase(std::unique(all_nodes.begin(), all_nodes.end()), all_nodes.end());
    for (const Interval& piece : flat) {
      std::vector<Rational> pts{piece.lo};
      for (auto it = std::upper_bound(all_nodes.begin(), all_nodes.end(), piece.lo);
           it != all_nodes.end() && *it < piece.hi; ++it) {
        pts.push_back(*it);
      }
      pts.push_back(piece.hi);
      std::vector<std::size_t> prev;
      for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const std::vector<std::size_t> c = code(f, lap_list, (pts[j] + pts[j + 1]) / 2, depth);
        if (j > 0 && c == prev) {
          cells.back().hi = pts[j + 1];
        } else {
          cells.push_back({pts[j], pts[j + 1]});
        }
        prev = c;
      }
    }
  }

  std::vector<Interval> runs = merge_adjacent(cells);
  std::vector<Interval> extra;
  for (;;) {
    std::vector<Interval> all = runs;
    all.insert(all.end(), extra.begin(), extra.end());
    std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    all = merge_adjacent(std::move(all));
    const PwaMap psi0 = collapse_map(f.domain(), all);

    // Classes of psi0 between consecutive breakpoints of f and of the runs.
    std::set<Rational> bset;
    for (const Node& node : f.nodes()) bset.insert(node.x);
    for (const Interval& r : all) {
      bset.insert(r.lo);
      bset.insert(r.hi);
    }
    struct Class {
      Rational lo, hi;
    };
    std::vector<Class> classes;
    for (const Rational& b : bset) {
      auto run = std::lower_bound(all.begin(), all.end(), b,
                                  [](const Interval& r, const Rational& v) { return r.hi < v; });
      const bool inside = run != all.end() && run->contains(b);
      const Rational lo = inside ? run->lo : b;
      const Rational hi = inside ? run->hi : b;
      if (!classes.empty() && classes.back().lo == lo) continue;
      classes.push_back({lo, hi});
    }
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      Node node{psi0(classes[i].lo), std::nullopt, std::nullopt};
      if (i > 0) node.y_left = psi0(f.eval(classes[i].lo, Side::left));
      if (i + 1 < classes.size()) node.y_right = psi0(f.eval(classes[i].hi, Side::right));
      nodes.push_back(std::move(node));
    }
    bool flat_piece = false;
    for (std::size_t i = 0; i + 1 < classes.size(); ++i) {
      if (*nodes[i].y_right == *nodes[i + 1].y_left) {
        // f maps the whole gap onto a collapsed point: a plateau of f^{d+1}.
        extra.push_back({classes[i].hi, classes[i + 1].lo});
        flat_piece = true;
      }
    }
    if (flat_piece) continue;

    PwaMap fhat = simplify(PwaMap(std::move(nodes)));
    QuotientResult out{depth, std::move(cells), std::move(all), psi0, fhat, Rational(0)};
    const PwaMap lhs = compose(out.fhat, out.psi0, limits);
    const PwaMap rhs = compose(out.psi0, f, limits);
    out.factor_residual = sup_dist(lhs, rhs);
    return out;
  }
}

std::string collapse_tsv(const std::vector<Interval>& intervals) {
  std::ostringstream out;
  out << "lo\thi\n";
  for (const Interval& c : intervals) out << to_string(c.lo) << '\t' << to_string(c.hi) << '\n';
  return out.str();
}

}  // namespace slopeforge
