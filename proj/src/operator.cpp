#include "slopeforge/operator.hpp"

#include "slopeforge/error.hpp"

#include <algorithm>
#include <cmath>

namespace slopeforge {

const char* to_string(TransitivityEvidence e) {
  switch (e) {
    case TransitivityEvidence::matrix_primitive:
      return "matrix_primitive";
    case TransitivityEvidence::dense_orbit_sample:
      return "dense_orbit_sample";
    case TransitivityEvidence::unknown:
      break;
  }
  return "unknown";
}

double orbit_coverage(const PwaMap& f, std::size_t samples, std::size_t bins) {
  if (bins == 0 || samples == 0) return 0;
  constexpr std::size_t burn_in = 100;
  // Each step can shift out log2(max slope) bits; carry enough that the whole
  // orbit stays accurate.
  const double expansion = std::max(1.0, std::log2(f.max_abs_slope().convert_to<double>()));
  const unsigned saved = precision_bits();
  set_precision_bits(64 + static_cast<unsigned>(std::ceil(expansion * static_cast<double>(burn_in + samples))));
  std::vector<bool> seen(bins, false);
  {
    const RealMap fr(f);
    const Real len = fr.hi() - fr.lo();
    Real x = fr.lo() + (sqrt(Real(2)) - 1) * len;
    for (std::size_t i = 0; i < burn_in + samples; ++i) {
      if (i >= burn_in) {
        const double t = ((x - fr.lo()) / len).convert_to<double>();
        seen[std::min(bins - 1, static_cast<std::size_t>(t * static_cast<double>(bins)))] = true;
      }
      x = fr.eval(x, x == fr.hi() ? Side::left : Side::right);
    }
  }
  set_precision_bits(saved);
  return static_cast<double>(std::count(seen.begin(), seen.end(), true)) / static_cast<double>(bins);
}

NormalForm phi(const PwaMap& f, const PhiOptions& options) {
  if (!f.is_continuous()) throw PreconditionError("discontinuous input");
  std::optional<QuotientResult> quotient;
  if (f.has_constant_piece()) quotient = psm_reduce(f, options.coding_depth);
  const PwaMap& work = quotient ? quotient->fhat : f;

  PipelineTrace trace = normalize(work, options.normalize);
  NormalForm out{trace.psi, *trace.g, false, TransitivityEvidence::unknown,
                 laps(f).size() - 1, laps(trace.g->map).size() - 1,
                 trace.residuals.back(), std::move(quotient), std::move(trace), {}};

  bool strictly_increasing = out.psi.collapse_intervals.empty();
  for (std::size_t i = 0; strictly_increasing && i + 1 < out.psi.ys.size(); ++i) {
    strictly_increasing = out.psi.ys[i + 1] > out.psi.ys[i];
  }
  const bool collapsed_quotient = out.quotient && !out.quotient->collapse_intervals.empty();
  const bool small_residual = out.residual < Real(options.residual_tolerance);
  out.conjugacy = strictly_increasing && !collapsed_quotient && small_residual;
  if (!strictly_increasing) out.notes.push_back("psi collapses intervals");
  if (collapsed_quotient) out.notes.push_back("flat pieces of f were collapsed before normalizing");
  if (!small_residual) out.notes.push_back("semiconjugacy residual above tolerance");
  if (out.output_modality < out.input_modality) out.notes.push_back("normalization reduced the modality");

  if (out.trace.markov_exact && is_mixing_matrix(out.trace.structure->matrix).primitive) {
    out.evidence = TransitivityEvidence::matrix_primitive;
  } else if (orbit_coverage(work, options.orbit_samples, options.orbit_bins) == 1.0) {
    out.evidence = TransitivityEvidence::dense_orbit_sample;
  }
  return out;
}

Real slope_gap_bound(const Real& alpha, const Real& beta, int modality) {
  if (!(alpha > beta)) throw PreconditionError("slope gap bound requires alpha > beta");
  if (modality < 1) throw PreconditionError("modality must be >= 1");
  return (alpha - beta) / (2 * modality + 2);
}

std::optional<Rational> exact_constant_slope(const PwaMap& f) {
  if (!f.is_continuous()) return std::nullopt;
  std::optional<Rational> slope;
  for (std::size_t i = 0; i < f.segment_count(); ++i) {
    const Rational s = abs(f.segment(i).slope());
    if (s == 0 || (slope && *slope != s)) return std::nullopt;
    slope = s;
  }
  return slope;
}

GapCheck check_gap_bound(const PwaMap& f, const PwaMap& g) {
  const Interval unit{Rational(0), Rational(1)};
  if (f.domain() != unit || g.domain() != unit) throw PreconditionError("maps must live on [0,1]");
  const auto alpha = exact_constant_slope(f);
  const auto beta = exact_constant_slope(g);
  if (!alpha || !beta) throw PreconditionError("maps must be continuous with constant slope");
  if (*alpha <= *beta) throw PreconditionError("slope gap bound requires alpha > beta");
  GapCheck out;
  out.alpha = *alpha;
  out.beta = *beta;
  out.modality = laps(f).size() - 1;
  if (out.modality < 1) throw PreconditionError("modality must be >= 1");
  out.bound = (out.alpha - out.beta) / (2 * static_cast<long>(out.modality) + 2);
  out.distance = sup_dist(f, g);
  out.holds = out.distance >= out.bound;
  return out;
}

GapCheck check_gap_bound(const ConstantSlopeMap& f, const ConstantSlopeMap& g) {
  return check_gap_bound(f.map, g.map);
}

PwaMap constant_slope_from_turning_values(const std::vector<Rational>& values) {
  if (values.size() < 2) throw PreconditionError("need at least two turning values");
  Rational total = 0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const Rational step = values[i + 1] - values[i];
    if (step == 0) throw PreconditionError("turning values must differ");
    if (i > 0 && (step > 0) == (values[i] - values[i - 1] > 0)) {
      throw PreconditionError("turning values must alternate");
    }
    total += abs(step);
  }
  std::vector<Rational> xs{Rational(0)};
  Rational run = 0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    run += abs(values[i + 1] - values[i]);
    xs.push_back(run / total);
  }
  return PwaMap::continuous(xs, values, MapKind::function);
}

}  // namespace slopeforge
