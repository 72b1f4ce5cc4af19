#pragma once

// Itineraries through the laps of f and the finite-depth quotient that turns a
// piecewise monotone map with flat pieces into a strictly monotone one.

#include "slopeforge/pwa_map.hpp"

#include <string>
#include <vector>

namespace slopeforge {

struct Itinerary {
  std::vector<std::size_t> word;          // lap index of f^k(x), k = 0..n-1
  std::vector<std::size_t> ambiguous_at;  // k where f^k(x) is shared by two laps

  /// Laps as letters: A for the first lap, B for the second, ...
  std::string letters() const;
};

/// Lap index containing y; a shared endpoint goes to the left lap.
std::size_t lap_of(const std::vector<Lap>& laps, const Rational& y);

/// Follows the exact orbit of x. At a shared endpoint the left lap is taken and
/// the orbit continues with the one-sided value of that lap.
Itinerary itinerary(const PwaMap& f, const Rational& x, int n);

inline constexpr int kDefaultCodingDepth = 16;

struct QuotientResult {
  int depth = 0;
  /// Cells of constant depth-d code on which f^d is constant.
  std::vector<Interval> collapse_intervals;
  /// Maximal unions of adjacent collapse intervals; psi0 is constant on each.
  std::vector<Interval> collapsed_runs;
  PwaMap psi0;  // increasing, continuous, onto [0, 1]
  PwaMap fhat;  // on [0, 1], no constant pieces
  /// Exact sup |fhat(psi0(x)) - psi0(f(x))|. Nonzero only where f maps onto a
  /// plateau that is first resolved beyond depth d.
  Rational factor_residual;
};

/// Quotient by equality of depth-d codes on the flat part of f^d. Throws
/// PreconditionError when the lap-count entropy estimate is not positive and
/// BudgetExceeded when f^d outgrows the node budget.
QuotientResult psm_reduce(const PwaMap& f, int depth = kDefaultCodingDepth,
                          const IterationLimits& limits = {});

/// TSV `lo hi` with exact rationals.
std::string collapse_tsv(const std::vector<Interval>& intervals);

}  // namespace slopeforge
