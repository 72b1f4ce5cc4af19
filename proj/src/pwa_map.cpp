#include "slopeforge/pwa_map.hpp"

#include "slopeforge/error.hpp"

#include <algorithm>

namespace slopeforge {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::increasing: return "inc";
    case Direction::decreasing: return "dec";
    case Direction::constant: return "const";
  }
  return "?";
}

Direction Segment::direction() const {
  if (y1 > y0) return Direction::increasing;
  if (y1 < y0) return Direction::decreasing;
  return Direction::constant;
}

PwaMap::PwaMap(std::vector<Node> nodes, MapKind kind) : nodes_(std::move(nodes)), kind_(kind) {
  if (nodes_.size() < 2) throw ParseError("fewer than 2 nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (i > 0 && !(nodes_[i - 1].x < n.x)) {
      throw ParseError("non-increasing x at " + to_string(n.x));
    }
    const bool first = i == 0;
    const bool last = i + 1 == nodes_.size();
    if (first == n.y_left.has_value()) {
      throw ParseError("left value must be absent exactly at the left endpoint (x=" +
                       to_string(n.x) + ")");
    }
    if (last == n.y_right.has_value()) {
      throw ParseError("right value must be absent exactly at the right endpoint (x=" +
                       to_string(n.x) + ")");
    }
  }
  if (kind_ == MapKind::self_map) {
    for (const Node& n : nodes_) {
      for (const auto& y : {n.y_left, n.y_right}) {
        if (y && (*y < lo() || *y > hi())) {
          throw ParseError("value " + to_string(*y) + " outside domain at x=" + to_string(n.x));
        }
      }
    }
  }
}

PwaMap PwaMap::continuous(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                          MapKind kind) {
  if (xs.size() != ys.size()) throw PreconditionError("xs and ys differ in length");
  std::vector<Node> nodes;
  nodes.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Node n{xs[i], ys[i], ys[i]};
    if (i == 0) n.y_left.reset();
    if (i + 1 == xs.size()) n.y_right.reset();
    nodes.push_back(std::move(n));
  }
  return PwaMap(std::move(nodes), kind);
}

Segment PwaMap::segment(std::size_t i) const {
  const Node& a = nodes_[i];
  const Node& b = nodes_[i + 1];
  return {a.x, b.x, *a.y_right, *b.y_left};
}

std::size_t PwaMap::segment_index(const Rational& x, Side side) const {
  if (x < lo() || x > hi()) {
    throw PreconditionError("x=" + to_string(x) + " outside domain");
  }
  if (side == Side::left && x == lo()) throw PreconditionError("no left limit at left endpoint");
  if (side == Side::right && x == hi()) throw PreconditionError("no right limit at right endpoint");
  // First node with node.x > x (right side) or node.x >= x (left side).
  auto it = side == Side::right
                ? std::upper_bound(nodes_.begin(), nodes_.end(), x,
                                   [](const Rational& v, const Node& n) { return v < n.x; })
                : std::lower_bound(nodes_.begin(), nodes_.end(), x,
                                   [](const Node& n, const Rational& v) { return n.x < v; });
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

Rational PwaMap::eval(const Rational& x, Side side) const {
  const std::size_t i = segment_index(x, side);
  const Node& a = nodes_[i];
  const Node& b = nodes_[i + 1];
  if (x == a.x) return *a.y_right;
  if (x == b.x) return *b.y_left;
  return segment(i).at(x);
}

Real PwaMap::eval(const Real& x, Side side) const {
  const Real lo_r = to_real(lo());
  const Real hi_r = to_real(hi());
  if (x < lo_r || x > hi_r) throw PreconditionError("real argument outside domain");
  if (side == Side::left && x == lo_r) throw PreconditionError("no left limit at left endpoint");
  if (side == Side::right && x == hi_r) throw PreconditionError("no right limit at right endpoint");
  std::size_t lo_idx = 0;
  std::size_t hi_idx = nodes_.size() - 1;
  // Invariant: nodes_[lo_idx].x is left of x (or equal, for the right side),
  // nodes_[hi_idx].x is right of x (or equal, for the left side).
  while (hi_idx - lo_idx > 1) {
    const std::size_t mid = (lo_idx + hi_idx) / 2;
    const Real xm = to_real(nodes_[mid].x);
    const bool go_right = side == Side::right ? xm <= x : xm < x;
    (go_right ? lo_idx : hi_idx) = mid;
  }
  const Segment s = segment(lo_idx);
  const Real x0 = to_real(s.x0);
  const Real x1 = to_real(s.x1);
  const Real y0 = to_real(s.y0);
  const Real y1 = to_real(s.y1);
  if (x == x0) return y0;
  if (x == x1) return y1;
  return y0 + (x - x0) * (y1 - y0) / (x1 - x0);
}

Rational PwaMap::operator()(const Rational& x) const {
  return eval(x, x == hi() ? Side::left : Side::right);
}

bool PwaMap::is_continuous() const {
  return std::none_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_jump(); });
}

bool PwaMap::has_constant_piece() const {
  for (std::size_t i = 0; i < segment_count(); ++i) {
    if (segment(i).direction() == Direction::constant) return true;
  }
  return false;
}

Rational PwaMap::max_abs_slope() const {
  Rational best = 0;
  for (std::size_t i = 0; i < segment_count(); ++i) {
    best = std::max(best, Rational(abs(segment(i).slope())));
  }
  return best;
}

PwaMap simplify(const PwaMap& f) {
  const auto& in = f.nodes();
  std::vector<Node> out;
  out.reserve(in.size());
  out.push_back(in.front());
  for (std::size_t i = 1; i + 1 < in.size(); ++i) {
    const Node& cur = in[i];
    const Node& prev = out.back();
    const Node& next = in[i + 1];
    if (!cur.is_jump()) {
      // prev -> cur and cur -> next collinear?
      const Rational lhs = (*cur.y_left - *prev.y_right) * (next.x - cur.x);
      const Rational rhs = (*next.y_left - *cur.y_right) * (cur.x - prev.x);
      if (lhs == rhs) continue;
    }
    out.push_back(cur);
  }
  out.push_back(in.back());
  return PwaMap(std::move(out), f.kind());
}

std::vector<Lap> laps(const PwaMap& f) {
  std::vector<Lap> out;
  const auto& nodes = f.nodes();
  Rational start = f.lo();
  Direction dir = f.segment(0).direction();
  for (std::size_t i = 1; i < f.segment_count(); ++i) {
    const Direction next = f.segment(i).direction();
    if (nodes[i].is_jump() || next != dir) {
      out.push_back({{start, nodes[i].x}, dir});
      start = nodes[i].x;
      dir = next;
    }
  }
  out.push_back({{start, f.hi()}, dir});
  return out;
}

std::vector<Rational> lap_endpoints(const PwaMap& f) {
  std::vector<Rational> out;
  for (const Lap& lap : laps(f)) out.push_back(lap.interval.lo);
  out.push_back(f.hi());
  return out;
}

PwaMap compose(const PwaMap& outer, const PwaMap& inner, const IterationLimits& limits) {
  struct Piece {
    Rational xa, xb, ya, yb;
  };
  std::vector<Piece> pieces;
  pieces.reserve(inner.segment_count() * 2);
  const auto& outer_nodes = outer.nodes();
  auto node_less = [](const Node& n, const Rational& v) { return n.x < v; };

  for (std::size_t s = 0; s < inner.segment_count(); ++s) {
    const Segment seg = inner.segment(s);
    if (seg.y0 == seg.y1) {
      const Rational c = outer(seg.y0);
      pieces.push_back({seg.x0, seg.x1, c, c});
      continue;
    }
    const bool up = seg.y1 > seg.y0;
    const Rational& ymin = up ? seg.y0 : seg.y1;
    const Rational& ymax = up ? seg.y1 : seg.y0;
    if (ymin < outer.lo() || ymax > outer.hi()) {
      throw PreconditionError("inner map leaves the domain of the outer map");
    }
    auto first = std::upper_bound(outer_nodes.begin(), outer_nodes.end(), ymin,
                                  [](const Rational& v, const Node& n) { return v < n.x; });
    auto last = std::lower_bound(outer_nodes.begin(), outer_nodes.end(), ymax, node_less);
    std::vector<Rational> ys;
    ys.reserve(static_cast<std::size_t>(last - first) + 2);
    ys.push_back(seg.y0);
    if (up) {
      for (auto it = first; it != last; ++it) ys.push_back(it->x);
    } else {
      for (auto it = last; it != first;) ys.push_back((--it)->x);
    }
    ys.push_back(seg.y1);
    Rational xa = seg.x0;
    for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
      const Rational& u = ys[k];
      const Rational& w = ys[k + 1];
      Rational xb = k + 2 == ys.size() ? seg.x1 : seg.preimage(w);
      pieces.push_back({xa, xb, outer.eval(u, up ? Side::right : Side::left),
                        outer.eval(w, up ? Side::left : Side::right)});
      xa = std::move(xb);
    }
    if (pieces.size() > limits.max_nodes) {
      throw BudgetExceeded("composition exceeds " + std::to_string(limits.max_nodes) + " nodes");
    }
  }

  std::vector<Node> nodes;
  nodes.reserve(pieces.size() + 1);
  nodes.push_back({pieces.front().xa, std::nullopt, pieces.front().ya});
  for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
    nodes.push_back({pieces[k].xb, pieces[k].yb, pieces[k + 1].ya});
  }
  nodes.push_back({pieces.back().xb, pieces.back().yb, std::nullopt});
  const MapKind kind = outer.kind() == MapKind::self_map && inner.kind() == MapKind::self_map
                           ? MapKind::self_map
                           : MapKind::function;
  return simplify(PwaMap(std::move(nodes), kind));
}

PwaMap iterate(const PwaMap& f, int k, const IterationLimits& limits) {
  if (k < 1) throw PreconditionError("iterate requires k >= 1");
  PwaMap g = f;
  for (int i = 1; i < k; ++i) g = compose(f, g, limits);
  return g;
}

std::vector<std::size_t> lap_counts(const PwaMap& f, int n, const IterationLimits& limits) {
  if (n < 1) throw PreconditionError("lap counts require n >= 1");
  std::vector<std::size_t> counts;
  counts.reserve(static_cast<std::size_t>(n));
  PwaMap g = f;
  counts.push_back(laps(g).size());
  for (int i = 1; i < n; ++i) {
    g = compose(f, g, limits);
    counts.push_back(laps(g).size());
  }
  return counts;
}

std::size_t lap_count(const PwaMap& f, int n, const IterationLimits& limits) {
  return lap_counts(f, n, limits).back();
}

Rational sup_dist(const PwaMap& f, const PwaMap& g) {
  if (f.lo() != g.lo() || f.hi() != g.hi()) throw PreconditionError("domain mismatch");
  std::vector<Rational> xs;
  xs.reserve(f.nodes().size() + g.nodes().size());
  for (const Node& n : f.nodes()) xs.push_back(n.x);
  for (const Node& n : g.nodes()) xs.push_back(n.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  Rational best = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const Rational a = abs(f.eval(xs[i], Side::right) - g.eval(xs[i], Side::right));
    const Rational b = abs(f.eval(xs[i + 1], Side::left) - g.eval(xs[i + 1], Side::left));
    best = std::max({best, a, b});
  }
  return best;
}

}  // namespace slopeforge

namespace slopeforge {

RealMap::RealMap(const PwaMap& f) {
  const auto& nodes = f.nodes();
  xs_.reserve(nodes.size());
  left_.reserve(nodes.size());
  right_.reserve(nodes.size());
  for (const Node& n : nodes) {
    xs_.push_back(to_real(n.x));
    left_.push_back(n.y_left ? to_real(*n.y_left) : Real(0));
    right_.push_back(n.y_right ? to_real(*n.y_right) : Real(0));
  }
}

std::size_t RealMap::segment_index(const Real& x, Side side) const {
  if (x < lo() || x > hi()) throw PreconditionError("real argument outside domain");
  if (side == Side::left && x == lo()) throw PreconditionError("no left limit at left endpoint");
  if (side == Side::right && x == hi()) throw PreconditionError("no right limit at right endpoint");
  auto it = side == Side::right ? std::upper_bound(xs_.begin(), xs_.end(), x)
                                : std::lower_bound(xs_.begin(), xs_.end(), x);
  return static_cast<std::size_t>(it - xs_.begin()) - 1;
}

Real RealMap::eval(const Real& x, Side side) const {
  const std::size_t i = segment_index(x, side);
  if (x == xs_[i]) return right_[i];
  if (x == xs_[i + 1]) return left_[i + 1];
  return right_[i] + (x - xs_[i]) * (left_[i + 1] - right_[i]) / (xs_[i + 1] - xs_[i]);
}

std::pair<Real, Real> RealMap::hull(const Real& a, const Real& b) const {
  if (a == b) {
    Real lo_v = a == lo() ? eval(a, Side::right) : eval(a, Side::left);
    Real hi_v = lo_v;
    if (a != lo() && a != hi()) {
      const Real r = eval(a, Side::right);
      lo_v = std::min(lo_v, r);
      hi_v = std::max(hi_v, r);
    }
    return {lo_v, hi_v};
  }
  Real lo_v = eval(a, Side::right);
  Real hi_v = lo_v;
  auto take = [&](const Real& y) {
    if (y < lo_v) lo_v = y;
    if (y > hi_v) hi_v = y;
  };
  take(eval(b, Side::left));
  auto first = std::upper_bound(xs_.begin(), xs_.end(), a);
  auto last = std::lower_bound(xs_.begin(), xs_.end(), b);
  for (auto it = first; it < last; ++it) {
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    take(left_[i]);
    take(right_[i]);
  }
  return {lo_v, hi_v};
}

}  // namespace slopeforge
