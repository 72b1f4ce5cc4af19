#pragma once

// The increasing semiconjugacy psi built from Perron data, and the
// constant-slope map g with psi ∘ f = g ∘ psi.

#include "slopeforge/markov.hpp"
#include "slopeforge/pwa_map.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slopeforge {

/// Closed interval known to contain psi(x).
struct PsiEnclosure {
  Real lo;
  Real hi;

  Real mid() const { return (lo + hi) / 2; }
  Real width() const { return hi - lo; }
};

/// Evaluates psi at arbitrary points of I by following the orbit through the
/// Markov cells: on a cell C with image cells first..last,
///   psi(x) = S(C) + beta^{-1} (psi(f x) - S(first))      (f increasing on C)
///   psi(x) = S(C) + beta^{-1} (S(last + 1) - psi(f x))   (f decreasing on C)
/// where S is the prefix sum of v. The orbit stays exact while its rationals
/// are small and continues in high precision afterwards.
class PsiEvaluator {
 public:
  explicit PsiEvaluator(std::shared_ptr<const MarkovStructure> s, double tolerance = 1e-24);

  PsiEnclosure enclose(const Rational& x) const;
  PsiEnclosure enclose(const Real& x) const;

  const MarkovStructure& structure() const { return *s_; }
  /// psi on P.
  const std::vector<Real>& prefix() const { return prefix_; }

 private:
  PsiEnclosure finish_real(Real x, Real offset, Real scale, int sign, std::size_t steps) const;

  std::shared_ptr<const MarkovStructure> s_;
  RealMap real_map_;
  std::vector<Real> real_points_;
  std::vector<Real> prefix_;
  Real inv_beta_;
  Real tolerance_;
  Real snap_;
};

struct PsiTable {
  int depth = 0;                  // values are within error_bound of psi
  int table_depth = 0;            // depth of the materialized points P_m, m <= depth
  std::vector<Rational> xs;
  std::vector<Real> ys;
  Real beta;
  Real error_bound;               // beta^{-depth} * max v
  Real value_tolerance = 0;       // rounding slack of ys (tables read from text)
  std::vector<Interval> collapse_intervals;
  std::shared_ptr<const PsiEvaluator> evaluator;  // absent for tables read from text

  /// With an evaluator the enclosure is narrow; otherwise it is the bracket of
  /// neighbouring table values.
  PsiEnclosure enclose(const Rational& x) const;
  PsiEnclosure enclose(const Real& x) const;
  /// Best estimate: evaluator midpoint or linear interpolation of the table.
  Real operator()(const Rational& x) const;
  Real value(const Real& x) const;
  const Rational& lo() const { return xs.front(); }
  const Rational& hi() const { return xs.back(); }
};

inline constexpr double kCollapseThreshold = 1e-12;
inline constexpr std::size_t kDefaultPsiPointBudget = std::size_t{1} << 16;

/// The displayed formula psi(x) = beta^{-n} sum_{A in A_n, A <= x} v_{f^n(A)} on P_n,
/// cells collapsed by f^n omitted.
PsiTable psi_on_points(const MarkovStructure& s, int depth,
                       std::size_t max_points = kDefaultRefineBudget);

/// Chooses the smallest depth with beta^{-n} < target_err and materializes as
/// much of P_n as the point budget allows; the evaluator covers the rest and
/// stops refining an orbit once its enclosure is narrower than `eval_tolerance`
/// (default: target_err * 1e-6).
PsiTable build_psi(std::shared_ptr<const MarkovStructure> s, double target_err,
                   std::size_t max_points = kDefaultPsiPointBudget,
                   double eval_tolerance = 0);

/// Maximal runs of consecutive table points whose values agree within the threshold.
std::vector<Interval> detect_collapse(const std::vector<Rational>& xs, const std::vector<Real>& ys,
                                      double threshold = kCollapseThreshold);

struct ConstantSlopeMap {
  PwaMap map;
  Real slope;
  std::string provenance;
};

/// g on [0,1] with nodes psi(p), p in P, and one-sided values psi(f(p±)). Node
/// data are the high-precision values rounded to dyadic rationals. Throws
/// VerificationError when a piece deviates from slope ±beta by more than
/// `slope_tol` relative.
ConstantSlopeMap build_constant_slope(const MarkovStructure& s, const PsiTable& psi,
                                      double slope_tol = 1e-9);

struct Eq4a1Report {
  Real max_residual;
  Real tolerance;  // contribution of the psi enclosure widths
  std::size_t samples = 0;
};

/// Max over random same-lap pairs of ||psi(f y) - psi(f x)| - beta |psi(y) - psi(x)||.
Eq4a1Report check_eq4a1(const PwaMap& f, const PsiTable& psi, const Real& beta,
                        std::size_t samples, std::uint64_t seed = 1);

struct CompatibilityReport {
  bool ok = true;
  std::vector<Lap> violations;
};

/// Every lap collapsed by psi must have a collapsed image.
CompatibilityReport check_compatibility(const PwaMap& f, const PsiTable& psi,
                                        double threshold = kCollapseThreshold);

/// TSV `x psi x_exact`: decimal x and psi, then the exact rational x.
std::string psi_tsv(const PsiTable& psi, int digits = 15);
/// Reads psi_tsv output back; the table has no evaluator. Values in [0, 1]
/// printed with `digits` significant digits are off by at most 10^-digits.
PsiTable parse_psi_tsv(std::string_view text, int digits = 15);

/// Slopes of g's pieces, rendered with 10 significant digits, with counts.
std::map<std::string, std::size_t> slope_histogram(const PwaMap& g);

}  // namespace slopeforge
