#pragma once

// Topological entropy from lap growth, and from the spectral radius when a
// Markov partition is available.

#include "slopeforge/markov.hpp"
#include "slopeforge/pwa_map.hpp"

#include <optional>
#include <string>
#include <vector>

namespace slopeforge {

struct EntropyReport {
  std::vector<std::size_t> lap_counts;  // c_1 .. c_N
  std::vector<double> lap_estimates;    // (1/n) log c_n
  double fekete_bound = 0;              // min over n of (1/n) log c_n
  double trend = 0;                     // growth rate of the last two steps
  std::optional<double> spectral;       // max(log beta, 0)
  bool agreed = false;
  double gap = 0;                       // |trend - spectral| when spectral is present
  bool truncated = false;               // node budget hit before depth N
  std::vector<std::string> warnings;

  int depth() const { return static_cast<int>(lap_counts.size()); }
  bool positive() const { return trend > kPositiveThreshold; }

  static constexpr double kPositiveThreshold = 1e-9;
};

struct EntropyOptions {
  int depth = 12;
  double agreement = 0.02;
  std::size_t closure_budget = 1000;
  IterationLimits limits;
};

/// log(c_N / c_{N-2}) / 2 for N >= 3, log(c_2 / c_1) for N = 2, log c_1 for N = 1.
/// Removes the subexponential prefactor that biases (1/N) log c_N upward.
double lap_trend(const std::vector<std::size_t>& counts);

EntropyReport entropy_lapcount(const PwaMap& f, int depth, const IterationLimits& limits = {});

/// max(log beta, 0).
double entropy_spectral(const MarkovStructure& s);

/// Lap counting plus the spectral value when markov_closure succeeds.
EntropyReport entropy(const PwaMap& f, const EntropyOptions& options = {});

/// TSV with header `n c_n estimate` and footer rows for the summary values.
std::string entropy_tsv(const EntropyReport& report);

}  // namespace slopeforge
