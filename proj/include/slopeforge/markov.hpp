#pragma once

// Markov partitions: validation, closure search, refinements A_n / P_n and the
// transition matrix with its Perron data.

#include "slopeforge/perron.hpp"
#include "slopeforge/pwa_map.hpp"

#include <optional>
#include <string>
#include <vector>

namespace slopeforge {

/// Image of one partition cell. Non-constant cells cover the consecutive cells
/// first..last; constant cells map to `lo` == `hi`.
struct CellImage {
  Direction direction = Direction::constant;
  Rational lo, hi;
  std::size_t first = 0;
  std::size_t last = 0;

  bool singleton() const { return direction == Direction::constant; }
};

struct MarkovStructure {
  PwaMap map;
  std::vector<Rational> points;
  std::vector<Interval> cells;
  std::vector<CellImage> images;
  BinaryMatrix matrix;
  Real beta;
  std::vector<Real> v;
  PerronResult perron_info;
};

struct MarkovCheck {
  bool ok = true;
  std::string condition;  // "endpoints", "invariance", "continuity", "monotonicity"
  std::optional<Rational> point;
  std::optional<Interval> cell;
  std::string message;
};

/// Checks that P holds the endpoints, f(P) ⊆ P with one-sided values, and that f
/// is continuous and strictly monotone or constant on every induced cell.
MarkovCheck is_markov(const PwaMap& f, const std::vector<Rational>& points);

/// Validates P and assembles cells, matrix and Perron pair. Throws
/// PreconditionError carrying the failed check.
MarkovStructure build_markov_structure(const PwaMap& f, std::vector<Rational> points,
                                       const PerronOptions& options = {});

/// Closes the lap endpoints of f under one-sided images. Returns nullopt when
/// more than `max_points` points would be needed.
std::optional<MarkovStructure> markov_closure(const PwaMap& f, std::size_t max_points,
                                              const PerronOptions& options = {});

/// 0/1 matrix with m_AB = 1 iff f(A) ⊇ B. Cells must be monotone-or-constant
/// continuity cells of f.
BinaryMatrix transition_matrix(const PwaMap& f, const std::vector<Interval>& cells);

/// Cells of A_n (the common refinement of f^{-i}(A), i <= n) with P_n.
struct Refinement {
  int depth = 0;
  std::vector<Rational> points;  // P_n, cell endpoints
  /// Index into the base partition of f^n(cell i), or nullopt when f^n collapses it.
  std::vector<std::optional<std::size_t>> image_index;

  std::size_t cell_count() const { return points.size() - 1; }
  Interval cell(std::size_t i) const { return {points[i], points[i + 1]}; }
};

inline constexpr std::size_t kDefaultRefineBudget = std::size_t{1} << 22;

Refinement refine(const MarkovStructure& s, int n, std::size_t max_cells = kDefaultRefineBudget);

/// One refinement step: A_{n+1} from A_n.
Refinement refine_step(const MarkovStructure& s, const Refinement& current,
                       std::size_t max_cells = kDefaultRefineBudget);

/// Point of the monotone continuous piece `cell` mapped to y by f.
Rational monotone_preimage(const PwaMap& f, const Interval& cell, const Rational& y);

/// Index i with points[i] == x, or nullopt.
std::optional<std::size_t> find_point(const std::vector<Rational>& points, const Rational& x);

/// Index of the cell [points[i], points[i+1]] containing x; at a shared endpoint
/// `side` selects the cell on that side.
std::size_t locate_cell(const std::vector<Rational>& points, const Rational& x, Side side);

}  // namespace slopeforge
