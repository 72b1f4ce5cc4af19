#include "slopeforge/markov.hpp"

#include "slopeforge/error.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace slopeforge {

std::optional<std::size_t> find_point(const std::vector<Rational>& points, const Rational& x) {
  auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.end() || *it != x) return std::nullopt;
  return static_cast<std::size_t>(it - points.begin());
}

std::size_t locate_cell(const std::vector<Rational>& points, const Rational& x, Side side) {
  if (x < points.front() || x > points.back()) throw PreconditionError("point outside partition");
  auto it = side == Side::right ? std::upper_bound(points.begin(), points.end(), x)
                                : std::lower_bound(points.begin(), points.end(), x);
  std::size_t i = static_cast<std::size_t>(it - points.begin());
  i = i == 0 ? 0 : i - 1;
  return std::min(i, points.size() - 2);
}

namespace {

struct CellShape {
  bool continuous = true;
  bool monotone = true;
  Direction direction = Direction::constant;
  std::optional<Rational> jump_at;
};

CellShape shape_on(const PwaMap& f, const Interval& cell) {
  CellShape shape;
  const std::size_t s0 = f.segment_index(cell.lo, Side::right);
  const std::size_t s1 = f.segment_index(cell.hi, Side::left);
  shape.direction = f.segment(s0).direction();
  for (std::size_t s = s0 + 1; s <= s1; ++s) {
    if (f.nodes()[s].is_jump()) {
      shape.continuous = false;
      shape.jump_at = f.nodes()[s].x;
      return shape;
    }
    if (f.segment(s).direction() != shape.direction) shape.monotone = false;
  }
  return shape;
}

CellImage image_of(const PwaMap& f, const Interval& cell, Direction direction) {
  CellImage img;
  img.direction = direction;
  Rational a = f.eval(cell.lo, Side::right);
  Rational b = f.eval(cell.hi, Side::left);
  if (a > b) std::swap(a, b);
  img.lo = std::move(a);
  img.hi = std::move(b);
  return img;
}

}  // namespace

MarkovCheck is_markov(const PwaMap& f, const std::vector<Rational>& points) {
  if (points.size() < 2 || !std::is_sorted(points.begin(), points.end()) ||
      std::adjacent_find(points.begin(), points.end()) != points.end()) {
    throw PreconditionError("point set must be sorted, distinct, with at least 2 points");
  }
  MarkovCheck check;
  auto fail = [&](std::string condition, std::string message) {
    check.ok = false;
    check.condition = std::move(condition);
    check.message = std::move(message);
    return check;
  };
  if (points.front() != f.lo() || points.back() != f.hi()) {
    check.point = points.front() != f.lo() ? f.lo() : f.hi();
    return fail("endpoints", "endpoint " + to_string(*check.point) + " missing from P");
  }
  for (const Rational& p : points) {
    for (Side side : {Side::left, Side::right}) {
      if ((side == Side::left && p == f.lo()) || (side == Side::right && p == f.hi())) continue;
      const Rational y = f.eval(p, side);
      if (!find_point(points, y)) {
        check.point = p;
        return fail("invariance", "f(" + to_string(p) + (side == Side::left ? "-" : "+") +
                                      ")=" + to_string(y) + " not in P");
      }
    }
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Interval cell{points[i], points[i + 1]};
    const CellShape shape = shape_on(f, cell);
    if (!shape.continuous) {
      check.cell = cell;
      check.point = shape.jump_at;
      return fail("continuity", "jump at " + to_string(*shape.jump_at) + " inside cell [" +
                                    to_string(cell.lo) + "," + to_string(cell.hi) + "]");
    }
    if (!shape.monotone) {
      check.cell = cell;
      return fail("monotonicity", "f not monotone on cell [" + to_string(cell.lo) + "," +
                                      to_string(cell.hi) + "]");
    }
  }
  return check;
}

BinaryMatrix transition_matrix(const PwaMap& f, const std::vector<Interval>& cells) {
  BinaryMatrix m(cells.size());
  std::vector<Rational> los;
  los.reserve(cells.size());
  for (const Interval& c : cells) los.push_back(c.lo);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const CellShape shape = shape_on(f, cells[i]);
    if (!shape.continuous || !shape.monotone) {
      throw PreconditionError("cell [" + to_string(cells[i].lo) + "," + to_string(cells[i].hi) +
                              "] is not a monotone continuity cell");
    }
    if (shape.direction == Direction::constant) continue;
    const CellImage img = image_of(f, cells[i], shape.direction);
    auto it = std::lower_bound(los.begin(), los.end(), img.lo);
    for (std::size_t j = static_cast<std::size_t>(it - los.begin());
         j < cells.size() && cells[j].hi <= img.hi; ++j) {
      m.push(i, j);
    }
  }
  return m;
}

MarkovStructure build_markov_structure(const PwaMap& f, std::vector<Rational> points,
                                       const PerronOptions& options) {
  const MarkovCheck check = is_markov(f, points);
  if (!check.ok) throw PreconditionError("not a Markov set: " + check.message);
  std::vector<Interval> cells;
  std::vector<CellImage> images;
  cells.reserve(points.size() - 1);
  images.reserve(points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    cells.push_back({points[i], points[i + 1]});
    CellImage img = image_of(f, cells.back(), shape_on(f, cells.back()).direction);
    if (!img.singleton()) {
      img.first = *find_point(points, img.lo);
      img.last = *find_point(points, img.hi) - 1;
    }
    images.push_back(std::move(img));
  }
  BinaryMatrix matrix = transition_matrix(f, cells);
  PerronResult pr = perron(matrix, options);
  MarkovStructure s{f, std::move(points), std::move(cells), std::move(images), std::move(matrix),
                    pr.beta, pr.v, std::move(pr)};
  return s;
}

std::optional<MarkovStructure> markov_closure(const PwaMap& f, std::size_t max_points,
                                              const PerronOptions& options) {
  std::set<Rational> seen;
  std::deque<Rational> todo;
  auto add = [&](const Rational& p) {
    if (seen.insert(p).second) todo.push_back(p);
  };
  for (const Rational& p : lap_endpoints(f)) add(p);
  while (!todo.empty()) {
    if (seen.size() > max_points) return std::nullopt;
    const Rational p = todo.front();
    todo.pop_front();
    if (p != f.lo()) add(f.eval(p, Side::left));
    if (p != f.hi()) add(f.eval(p, Side::right));
  }
  if (seen.size() > max_points) return std::nullopt;
  return build_markov_structure(f, std::vector<Rational>(seen.begin(), seen.end()), options);
}

Rational monotone_preimage(const PwaMap& f, const Interval& cell, const Rational& y) {
  const std::size_t s0 = f.segment_index(cell.lo, Side::right);
  const std::size_t s1 = f.segment_index(cell.hi, Side::left);
  const bool up = f.segment(s0).direction() == Direction::increasing;
  // First segment whose far end reaches y.
  std::size_t lo = s0;
  std::size_t hi = s1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const Rational end = f.segment(mid).y1;
    if (up ? end >= y : end <= y) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const Segment seg = f.segment(lo);
  if (y == seg.y0) return seg.x0;
  if (y == seg.y1) return seg.x1;
  return seg.preimage(y);
}

Refinement refine_step(const MarkovStructure& s, const Refinement& current, std::size_t max_cells) {
  Refinement next;
  next.depth = current.depth + 1;
  next.points.reserve(current.points.size() * 2);
  next.image_index.reserve(current.points.size() * 2);
  for (std::size_t b = 0; b < s.cells.size(); ++b) {
    const Interval& base = s.cells[b];
    const CellImage& img = s.images[b];
    if (img.singleton()) {
      next.points.push_back(base.lo);
      next.image_index.push_back(std::nullopt);
      continue;
    }
    const std::size_t i0 = *find_point(current.points, img.lo);
    const std::size_t i1 = *find_point(current.points, img.hi);
    const bool up = img.direction == Direction::increasing;
    for (std::size_t k = 0; k < i1 - i0; ++k) {
      const std::size_t i = up ? i0 + k : i1 - 1 - k;
      const Rational& y = up ? current.points[i] : current.points[i + 1];
      next.points.push_back(k == 0 ? base.lo : monotone_preimage(s.map, base, y));
      next.image_index.push_back(current.image_index[i]);
    }
    if (next.image_index.size() > max_cells) {
      throw BudgetExceeded("refinement exceeds " + std::to_string(max_cells) + " cells");
    }
  }
  next.points.push_back(s.map.hi());
  return next;
}

Refinement refine(const MarkovStructure& s, int n, std::size_t max_cells) {
  if (n < 0) throw PreconditionError("refinement depth must be >= 0");
  Refinement r;
  r.points = s.points;
  for (std::size_t i = 0; i < s.cells.size(); ++i) r.image_index.push_back(i);
  for (int k = 0; k < n; ++k) r = refine_step(s, r, max_cells);
  return r;
}

}  // namespace slopeforge
