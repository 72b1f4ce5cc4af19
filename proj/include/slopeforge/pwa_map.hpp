#pragma once

// Exact piecewise-affine interval maps with one-sided values at every node.

#include "slopeforge/numeric.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace slopeforge {

enum class Side { left, right };
enum class Direction { increasing, decreasing, constant };

const char* to_string(Direction d);

struct Interval {
  Rational lo;
  Rational hi;

  Rational length() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
  bool operator==(const Interval&) const = default;
};

/// A breakpoint with its left and right limits. The left limit is absent only
/// at the left end of the domain, the right limit only at the right end.
struct Node {
  Rational x;
  std::optional<Rational> y_left;
  std::optional<Rational> y_right;

  bool is_jump() const { return y_left && y_right && *y_left != *y_right; }
  bool operator==(const Node&) const = default;
};

/// Affine piece on [x0, x1] running from y0 (right limit at x0) to y1 (left limit at x1).
struct Segment {
  Rational x0, x1, y0, y1;

  Direction direction() const;
  Rational slope() const { return (y1 - y0) / (x1 - x0); }
  Rational at(const Rational& x) const { return y0 + (x - x0) * (y1 - y0) / (x1 - x0); }
  /// Point of [x0, x1] mapped to y; requires a non-constant segment with y in range.
  Rational preimage(const Rational& y) const { return x0 + (y - y0) * (x1 - x0) / (y1 - y0); }
};

struct Lap {
  Interval interval;
  Direction direction;
  bool operator==(const Lap&) const = default;
};

/// `self_map` requires every value to lie in the domain; `function` only checks
/// the node structure (used for factor maps onto [0, 1]).
enum class MapKind { self_map, function };

struct IterationLimits {
  std::size_t max_nodes = 10'000'000;
};

class PwaMap {
 public:
  explicit PwaMap(std::vector<Node> nodes, MapKind kind = MapKind::self_map);

  /// Continuous map through the points (xs[i], ys[i]).
  static PwaMap continuous(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                           MapKind kind = MapKind::self_map);

  const Rational& lo() const { return nodes_.front().x; }
  const Rational& hi() const { return nodes_.back().x; }
  Interval domain() const { return {lo(), hi()}; }
  MapKind kind() const { return kind_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t segment_count() const { return nodes_.size() - 1; }
  Segment segment(std::size_t i) const;

  /// Index of the segment whose closure contains x, approached from `side`.
  std::size_t segment_index(const Rational& x, Side side) const;

  /// Exact one-sided value. Throws PreconditionError outside the domain or for
  /// the missing side at an endpoint.
  Rational eval(const Rational& x, Side side) const;
  Real eval(const Real& x, Side side) const;

  /// Right limit, except at the right endpoint where only the left one exists.
  Rational operator()(const Rational& x) const;

  bool is_continuous() const;
  bool has_constant_piece() const;
  /// Largest |slope| over all segments.
  Rational max_abs_slope() const;

  bool operator==(const PwaMap&) const = default;

 private:
  std::vector<Node> nodes_;
  MapKind kind_ = MapKind::self_map;
};

/// High-precision copy of a PwaMap for fast evaluation at Real arguments.
class RealMap {
 public:
  explicit RealMap(const PwaMap& f);

  const Real& lo() const { return xs_.front(); }
  const Real& hi() const { return xs_.back(); }
  /// Same conventions as PwaMap::eval.
  Real eval(const Real& x, Side side) const;
  /// Index of the segment containing x from `side`.
  std::size_t segment_index(const Real& x, Side side) const;
  /// min and max of the map over [a, b], one-sided at the ends.
  std::pair<Real, Real> hull(const Real& a, const Real& b) const;

 private:
  std::vector<Real> xs_;
  std::vector<Real> left_;   // left_[i]: left limit at xs_[i], i >= 1
  std::vector<Real> right_;  // right_[i]: right limit at xs_[i], i < size-1
};

/// Drops interior nodes where the map is continuous and the adjacent pieces are collinear.
PwaMap simplify(const PwaMap& f);

/// Maximal closed intervals of continuity and monotonicity. Constant pieces form
/// their own laps; flanking monotone laps end at the shared endpoint.
std::vector<Lap> laps(const PwaMap& f);

/// outer ∘ inner, exact. The values of `inner` must lie in the domain of `outer`.
PwaMap compose(const PwaMap& outer, const PwaMap& inner, const IterationLimits& limits = {});

/// f^k for k >= 1.
PwaMap iterate(const PwaMap& f, int k, const IterationLimits& limits = {});

/// Number of laps of f^n.
std::size_t lap_count(const PwaMap& f, int n, const IterationLimits& limits = {});

/// c_1 .. c_n, computed by successive composition.
std::vector<std::size_t> lap_counts(const PwaMap& f, int n, const IterationLimits& limits = {});

/// Exact sup |f - g| over the common domain, one-sided at breakpoints.
Rational sup_dist(const PwaMap& f, const PwaMap& g);

/// Breakpoints that are lap endpoints.
std::vector<Rational> lap_endpoints(const PwaMap& f);

}  // namespace slopeforge
