#pragma once

// The normal-form operator on continuous transitive maps and the slope-gap
// lower bound for constant-slope maps.

#include "slopeforge/approximation.hpp"
#include "slopeforge/coding.hpp"

#include <optional>
#include <string>
#include <vector>

namespace slopeforge {

enum class TransitivityEvidence { matrix_primitive, dense_orbit_sample, unknown };

const char* to_string(TransitivityEvidence e);

struct NormalForm {
  PsiTable psi;  // semiconjugacy of the strictly monotone map that was normalized
  ConstantSlopeMap g;
  bool conjugacy = false;
  TransitivityEvidence evidence = TransitivityEvidence::unknown;
  std::size_t input_modality = 0;
  std::size_t output_modality = 0;
  Real residual;
  std::optional<QuotientResult> quotient;  // present when f had flat pieces
  PipelineTrace trace;
  std::vector<std::string> notes;
};

struct PhiOptions {
  NormalizeOptions normalize;
  int coding_depth = kDefaultCodingDepth;
  double residual_tolerance = 1e-6;
  std::size_t orbit_samples = 4000;
  std::size_t orbit_bins = 64;
};

/// psm_reduce when f has flat pieces, then normalize. conjugacy requires a
/// strictly increasing psi table, no collapse anywhere and a residual within
/// tolerance. Throws PreconditionError for discontinuous input or zero entropy.
NormalForm phi(const PwaMap& f, const PhiOptions& options = {});

/// Fraction of bins of the domain visited by a high-precision orbit of a fixed
/// irrational starting point.
double orbit_coverage(const PwaMap& f, std::size_t samples, std::size_t bins);

/// (alpha - beta) / (2n + 2); throws PreconditionError unless alpha > beta and n >= 1.
Real slope_gap_bound(const Real& alpha, const Real& beta, int modality);

struct GapCheck {
  bool holds = false;
  Rational distance;  // exact sup_dist(f, g)
  Rational bound;     // exact (alpha - beta) / (2n + 2)
  Rational alpha, beta;
  std::size_t modality = 0;
};

/// Common |slope| of a continuous map whose pieces all have the same nonzero
/// |slope|; nullopt otherwise.
std::optional<Rational> exact_constant_slope(const PwaMap& f);

/// Verifies sup_dist(f, g) >= (alpha - beta) / (2n + 2) exactly, n the modality
/// of f. Throws PreconditionError unless both are continuous constant-slope
/// maps on [0, 1] with alpha > beta.
GapCheck check_gap_bound(const PwaMap& f, const PwaMap& g);
GapCheck check_gap_bound(const ConstantSlopeMap& f, const ConstantSlopeMap& g);

/// Continuous map on [0, 1] through the turning values y_0, ..., y_{n+1}
/// (alternating), with |slope| equal to their total variation.
PwaMap constant_slope_from_turning_values(const std::vector<Rational>& values);

}  // namespace slopeforge
