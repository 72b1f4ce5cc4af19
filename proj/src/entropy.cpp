#include "slopeforge/entropy.hpp"

#include "slopeforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slopeforge {

double lap_trend(const std::vector<std::size_t>& counts) {
  const std::size_t n = counts.size();
  if (n == 0) throw PreconditionError("no lap counts");
  auto ln = [](std::size_t c) { return std::log(static_cast<double>(c)); };
  if (n == 1) return ln(counts[0]);
  if (n == 2) return ln(counts[1]) - ln(counts[0]);
  return (ln(counts[n - 1]) - ln(counts[n - 3])) / 2;
}

EntropyReport entropy_lapcount(const PwaMap& f, int depth, const IterationLimits& limits) {
  if (depth < 1) throw PreconditionError("entropy depth must be >= 1");
  EntropyReport report;
  PwaMap g = f;
  for (int n = 1; n <= depth; ++n) {
    if (n > 1) {
      try {
        g = compose(f, g, limits);
      } catch (const BudgetExceeded&) {
        report.truncated = true;
        report.warnings.push_back("node budget exceeded at depth " + std::to_string(n) +
                                  "; report truncated");
        break;
      }
    }
    const std::size_t c = laps(g).size();
    report.lap_counts.push_back(c);
    report.lap_estimates.push_back(std::log(static_cast<double>(c)) / n);
  }
  report.fekete_bound =
      *std::min_element(report.lap_estimates.begin(), report.lap_estimates.end());
  report.trend = std::max(0.0, lap_trend(report.lap_counts));
  if (!report.positive()) {
    report.warnings.push_back("no positive entropy; normalization undefined");
  }
  return report;
}

double entropy_spectral(const MarkovStructure& s) {
  if (s.beta <= 1) return 0.0;
  return log(s.beta).convert_to<double>();
}

EntropyReport entropy(const PwaMap& f, const EntropyOptions& options) {
  EntropyReport report = entropy_lapcount(f, options.depth, options.limits);
  std::optional<MarkovStructure> s;
  try {
    s = markov_closure(f, options.closure_budget);
  } catch (const ConvergenceError& e) {
    report.warnings.push_back(std::string("Perron solver failed: ") + e.what());
  }
  if (s) {
    report.spectral = entropy_spectral(*s);
    report.gap = std::abs(report.trend - *report.spectral);
    report.agreed = report.gap < options.agreement;
  }
  return report;
}

std::string entropy_tsv(const EntropyReport& report) {
  std::ostringstream out;
  out.precision(15);
  out << "n\tc_n\testimate\n";
  for (std::size_t i = 0; i < report.lap_counts.size(); ++i) {
    out << i + 1 << '\t' << report.lap_counts[i] << '\t' << report.lap_estimates[i] << '\n';
  }
  out << "trend\t\t" << report.trend << '\n';
  out << "fekete\t\t" << report.fekete_bound << '\n';
  if (report.spectral) {
    out << "spectral\t\t" << *report.spectral << '\n';
    out << "agreed\t\t" << (report.agreed ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace slopeforge
