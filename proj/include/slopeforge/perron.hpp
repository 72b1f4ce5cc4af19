#pragma once

// Sparse 0/1 transition matrices and their Perron eigenpair.

#include "slopeforge/numeric.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace slopeforge {

/// Square 0/1 matrix stored as sorted column indices per row.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  explicit BinaryMatrix(std::size_t n) : rows_(n) {}
  static BinaryMatrix from_dense(const std::vector<std::vector<int>>& rows);

  std::size_t size() const { return rows_.size(); }
  std::size_t nonzeros() const;
  /// Columns must be added in increasing order within a row.
  void push(std::size_t row, std::size_t col) { rows_[row].push_back(col); }
  const std::vector<std::size_t>& row(std::size_t i) const { return rows_[i]; }
  bool at(std::size_t i, std::size_t j) const;

  /// Sum of all entries of M^n, exact.
  Integer power_entry_sum(int n) const;

  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::vector<std::vector<std::size_t>> rows_;
};

/// `matrix <n>` followed by n rows of n space-separated 0/1 digits.
BinaryMatrix parse_matrix(std::string_view text);
std::string serialize_matrix(const BinaryMatrix& m);

struct PerronOptions {
  double tol = 1e-12;
  std::size_t max_iterations = 200000;
};

struct PerronResult {
  Real beta;
  std::vector<Real> v;  // nonnegative, sums to 1
  Real residual;        // ||Mv - beta v||_inf
  std::size_t iterations = 0;
  bool used_components = false;
  bool low_entropy = false;  // beta <= 1
};

/// Power iteration on M + I, falling back to a strongly connected component
/// decomposition when it stalls. Throws ConvergenceError if both fail.
PerronResult perron(const BinaryMatrix& m, const PerronOptions& options = {});

/// Components in reverse topological order (sinks first), as Tarjan emits them.
std::vector<std::vector<std::size_t>> strongly_connected_components(const BinaryMatrix& m);

struct MixingReport {
  bool irreducible = false;
  bool primitive = false;
  std::size_t period = 0;  // 0 when reducible
};

MixingReport is_mixing_matrix(const BinaryMatrix& m);

}  // namespace slopeforge
