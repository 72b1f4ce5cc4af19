#pragma once

// Markov approximation of a piecewise strictly monotone map and the
// normalization pipeline that converges the semiconjugacies of the
// approximations.

#include "slopeforge/markov.hpp"
#include "slopeforge/pwa_map.hpp"
#include "slopeforge/semiconjugacy.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slopeforge {

struct ApproxConfig {
  int n = 1;
  Rational delta;                // < 1/(2n); adjacent points of P are closer
  Integer grid;                  // P contains lo + k (hi - lo) / grid
  int shadow_depth = 0;          // P holds f^i(Q_k) for i <= k <= shadow_depth
  int orbit_length = 0;          // ... and f^i(Q_1) for i <= orbit_length
  std::vector<Rational> points;  // P
};

struct MarkovApprox {
  PwaMap g;
  ApproxConfig config;
};

inline constexpr int kMaxShadowDepth = 6;
inline constexpr int kMaxCriticalOrbit = 64;

/// g(p±) = max{y in P : y <= f(p±)} on P, affine in between. Throws
/// PreconditionError when f has a constant piece and VerificationError if
/// the result is not Markov on P or sup_dist(f, g) >= 1/n.
MarkovApprox markov_approx(const PwaMap& f, int n);

struct ShadowReport {
  bool ok = true;
  std::optional<Interval> lap;  // first failing lap of f^k
  std::string message;
};

/// On every lap [a, b] of f^k: g^i(a+) = f^i(a+) and g^i(b-) = f^i(b-) for
/// i <= k, and g^k is monotone in the same direction as f^k.
ShadowReport check_shadowing(const PwaMap& f, const PwaMap& g, int k);

/// Equispaced points lo + k (hi - lo) / m, k = 0..m, merged with the nodes of f.
std::vector<Rational> check_grid(const PwaMap& f, std::size_t m);

struct VerifyReport {
  Real residual;    // sup |psi(f x) - g(psi x)| with psi at its best estimate
  Real lower;       // certified: enclosures of both sides stay this far apart
  Real upper;
  Real resolution;  // widest psi enclosure met
  std::size_t samples = 0;
  std::optional<Rational> worst;
  std::map<std::string, std::size_t> slope_histogram;
};

/// Checks psi ∘ f = g ∘ psi on check_grid(f, grid), one-sided at nodes. Tables
/// without an evaluator are checked on their own points (at most grid + 1 of
/// them), where psi is known up to rounding.
VerifyReport verify_semiconjugacy(const PwaMap& f, const PwaMap& g, const PsiTable& psi,
                                  std::size_t grid);

struct NormalizeOptions {
  double target = 1e-6;
  std::vector<int> schedule = {2, 4, 8, 16, 32};
  std::size_t grid = 4096;
  int entropy_depth = 14;
  std::size_t closure_budget = 1000;
};

struct PipelineTrace {
  std::vector<int> indices;
  std::vector<Real> betas;
  std::vector<std::size_t> point_counts;
  std::vector<PsiTable> psis;
  std::vector<std::optional<Real>> cauchy_gaps;  // none for the first step
  std::vector<Real> residuals;
  bool converged = false;
  bool markov_exact = false;  // f itself is Markov; one exact step
  bool betas_monotone = true;
  double entropy_estimate = 0;
  std::shared_ptr<const MarkovStructure> structure;  // of the final step
  PsiTable psi;
  std::optional<ConstantSlopeMap> g;
  Real gamma;
  std::vector<std::string> warnings;

  double log_gamma_gap() const;
};

/// Runs Markov approximation, Perron data, psi and g along the schedule and
/// stops once successive psi differ by less than the target on the grid. A map
/// that is Markov already takes a single exact step. Throws PreconditionError
/// for non-positive entropy or constant pieces, ConvergenceError when no step
/// reaches beta > 1; an exhausted schedule returns converged = false.
PipelineTrace normalize(const PwaMap& f, const NormalizeOptions& options = {});

/// TSV `i beta_i cauchy_gap residual`.
std::string trace_tsv(const PipelineTrace& trace);

}  // namespace slopeforge
