#include "slopeforge/perron.hpp"

#include "slopeforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace slopeforge {

BinaryMatrix BinaryMatrix::from_dense(const std::vector<std::vector<int>>& rows) {
  BinaryMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw PreconditionError("matrix is not square");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (rows[i][j] != 0 && rows[i][j] != 1) throw PreconditionError("matrix entry not 0/1");
      if (rows[i][j] == 1) m.push(i, j);
    }
  }
  return m;
}

std::size_t BinaryMatrix::nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

bool BinaryMatrix::at(std::size_t i, std::size_t j) const {
  return std::binary_search(rows_[i].begin(), rows_[i].end(), j);
}

Integer BinaryMatrix::power_entry_sum(int n) const {
  std::vector<Integer> u(size(), Integer(1));
  for (int k = 0; k < n; ++k) {
    std::vector<Integer> next(size(), Integer(0));
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j : rows_[i]) next[i] += u[j];
    }
    u = std::move(next);
  }
  Integer total = 0;
  for (const auto& x : u) total += x;
  return total;
}

BinaryMatrix parse_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string word;
  std::size_t n = 0;
  if (!(in >> word >> n) || word != "matrix") throw ParseError("expected 'matrix <n>'");
  std::vector<std::vector<int>> rows(n, std::vector<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(in >> rows[i][j]) || (rows[i][j] != 0 && rows[i][j] != 1)) {
        throw ParseError("bad matrix entry at row " + std::to_string(i + 1));
      }
    }
  }
  if (in >> word) throw ParseError("trailing content after matrix");
  return BinaryMatrix::from_dense(rows);
}

std::string serialize_matrix(const BinaryMatrix& m) {
  std::ostringstream out;
  out << "matrix " << m.size() << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<char> row(m.size(), '0');
    for (std::size_t j : m.row(i)) row[j] = '1';
    for (std::size_t j = 0; j < m.size(); ++j) out << (j ? " " : "") << row[j];
    out << '\n';
  }
  return out.str();
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const BinaryMatrix& m) {
  const std::size_t n = m.size();
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& fr = call.back();
      const auto& edges = m.row(fr.v);
      if (fr.next_edge < edges.size()) {
        const std::size_t w = edges[fr.next_edge++];
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
        continue;
      }
      const std::size_t v = fr.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

MixingReport is_mixing_matrix(const BinaryMatrix& m) {
  MixingReport report;
  if (m.size() == 0 || m.nonzeros() == 0) return report;
  if (strongly_connected_components(m).size() != 1) return report;
  report.irreducible = true;
  std::vector<long> level(m.size(), -1);
  std::queue<std::size_t> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop();
    for (std::size_t w : m.row(u)) {
      if (level[w] < 0) {
        level[w] = level[u] + 1;
        queue.push(w);
      }
    }
  }
  long g = 0;
  for (std::size_t u = 0; u < m.size(); ++u) {
    for (std::size_t w : m.row(u)) g = std::gcd(g, std::labs(level[u] + 1 - level[w]));
  }
  report.period = static_cast<std::size_t>(g);
  report.primitive = g == 1;
  return report;
}

namespace {

// Submatrix on `vertices`, reindexed in the given order.
BinaryMatrix restrict_to(const BinaryMatrix& m, const std::vector<std::size_t>& vertices) {
  std::vector<std::size_t> local(m.size(), static_cast<std::size_t>(-1));
  for (std::size_t k = 0; k < vertices.size(); ++k) local[vertices[k]] = k;
  BinaryMatrix sub(vertices.size());
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    for (std::size_t j : m.row(vertices[k])) {
      if (local[j] != static_cast<std::size_t>(-1)) sub.push(k, local[j]);
    }
  }
  return sub;
}

struct DoublePower {
  bool converged = false;
  double beta = 0;
  std::vector<double> v;
  std::size_t iterations = 0;
};

// Power iteration on M + I with l1 normalization.
DoublePower power_double(const BinaryMatrix& m, double tol, std::size_t max_iterations) {
  const std::size_t n = m.size();
  DoublePower out;
  out.v.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> y(n);
  double prev = -1;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = out.v[i];
      for (std::size_t j : m.row(i)) s += out.v[j];
      y[i] = s;
      total += s;
    }
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= total;
      change = std::max(change, std::abs(y[i] - out.v[i]));
    }
    out.v.swap(y);
    const double lambda = total - 1;
    out.iterations = it;
    if (prev >= 0 && std::abs(lambda - prev) <= tol * std::max(lambda, 1.0) && change <= tol) {
      out.converged = true;
      out.beta = lambda;
      return out;
    }
    prev = lambda;
  }
  out.beta = prev;
  return out;
}

std::vector<Real> multiply(const BinaryMatrix& m, const std::vector<Real>& x) {
  std::vector<Real> y(m.size(), Real(0));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j : m.row(i)) y[i] += x[j];
  }
  return y;
}

Real residual_of(const BinaryMatrix& m, const std::vector<Real>& v, const Real& beta) {
  const auto mv = multiply(m, v);
  Real r = 0;
  for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, Real(abs(mv[i] - beta * v[i])));
  return r;
}

Real polish_epsilon() { return pow(Real(2), -static_cast<int>(precision_bits()) + 8); }

// High-precision continuation of a converged double iteration.
std::pair<Real, std::vector<Real>> polish(const BinaryMatrix& m, const std::vector<double>& start,
                                          std::size_t max_iterations) {
  const std::size_t n = m.size();
  std::vector<Real> x(start.begin(), start.end());
  const Real eps = polish_epsilon();
  Real beta = 0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    auto y = multiply(m, x);
    Real total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += x[i];
      total += y[i];
    }
    Real change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= total;
      change = std::max(change, Real(abs(y[i] - x[i])));
    }
    x.swap(y);
    beta = total - 1;
    if (change <= eps) break;
  }
  return {beta, x};
}

std::size_t polish_budget(const BinaryMatrix& m) {
  // Keep the high-precision phase within a few times 10^7 multiply-adds.
  const std::size_t work = std::max<std::size_t>(m.nonzeros() + m.size(), 1);
  return std::clamp<std::size_t>(30'000'000 / work, 20, 2000);
}

PerronResult finish(const BinaryMatrix& m, Real beta, std::vector<Real> v, std::size_t iterations,
                    bool components, const PerronOptions& options) {
  Real total = 0;
  for (auto& x : v) {
    if (x < 0) x = 0;
    total += x;
  }
  for (auto& x : v) x /= total;
  PerronResult out;
  out.residual = residual_of(m, v, beta);
  out.beta = std::move(beta);
  out.v = std::move(v);
  out.iterations = iterations;
  out.used_components = components;
  out.low_entropy = out.beta <= Real(1) + Real(options.tol);
  if (out.residual > Real(options.tol) * std::max(out.beta, Real(1))) {
    throw ConvergenceError("Perron residual " + format_decimal(out.residual, 6) +
                           " above tolerance");
  }
  return out;
}

PerronResult perron_by_components(const BinaryMatrix& m, const PerronOptions& options,
                                  std::size_t iterations_so_far) {
  const std::size_t n = m.size();
  const auto comps = strongly_connected_components(m);
  std::vector<std::size_t> comp_of(n);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t v : comps[c]) comp_of[v] = c;
  }

  std::vector<double> rho(comps.size(), 0.0);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (comps[c].size() == 1) {
      rho[c] = m.at(comps[c][0], comps[c][0]) ? 1.0 : 0.0;
      continue;
    }
    const auto sub = power_double(restrict_to(m, comps[c]), options.tol, options.max_iterations);
    if (!sub.converged) throw ConvergenceError("power iteration stalled on a strong component");
    rho[c] = sub.beta;
  }
  const double top = *std::max_element(rho.begin(), rho.end());

  // Component-level reachability in the condensation.
  std::vector<std::vector<std::size_t>> succ(comps.size());
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t w : m.row(u)) {
      if (comp_of[u] != comp_of[w]) succ[comp_of[u]].push_back(comp_of[w]);
    }
  }
  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<bool> seen(comps.size(), false);
    std::vector<std::size_t> todo{from};
    seen[from] = true;
    while (!todo.empty()) {
      const std::size_t c = todo.back();
      todo.pop_back();
      if (c == to) return true;
      for (std::size_t d : succ[c]) {
        if (!seen[d]) {
          seen[d] = true;
          todo.push_back(d);
        }
      }
    }
    return false;
  };
  const double slack = 1e-9 * std::max(top, 1.0);
  std::vector<std::size_t> dominant;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (rho[c] >= top - slack) dominant.push_back(c);
  }
  // A dominant class that no other dominant class can reach carries a
  // nonnegative eigenvector supported on the classes upstream of it.
  std::size_t chosen = dominant.front();
  for (std::size_t c : dominant) {
    bool reached = false;
    for (std::size_t d : dominant) reached = reached || (d != c && reaches(d, c));
    if (!reached) {
      chosen = c;
      break;
    }
  }

  std::vector<Real> v(n, Real(0));
  Real beta;
  std::size_t iterations = iterations_so_far;
  {
    const BinaryMatrix sub = restrict_to(m, comps[chosen]);
    if (comps[chosen].size() == 1) {
      beta = rho[chosen];
      v[comps[chosen][0]] = 1;
    } else {
      const auto start = power_double(sub, options.tol, options.max_iterations);
      auto [b, x] = polish(sub, start.v, polish_budget(sub));
      beta = b;
      iterations += start.iterations;
      for (std::size_t k = 0; k < x.size(); ++k) v[comps[chosen][k]] = x[k];
    }
  }

  // Tarjan order lists sinks first, so everything a class reaches is solved before it.
  std::vector<bool> in_support(comps.size(), false);
  in_support[chosen] = true;
  const Real eps = polish_epsilon();
  for (std::size_t c = chosen + 1; c < comps.size(); ++c) {
    for (std::size_t d : succ[c]) in_support[c] = in_support[c] || in_support[d];
    if (!in_support[c]) continue;
    const auto& members = comps[c];
    std::vector<Real> b(members.size(), Real(0));
    for (std::size_t k = 0; k < members.size(); ++k) {
      for (std::size_t j : m.row(members[k])) {
        if (comp_of[j] != c) b[k] += v[j];
      }
    }
    if (rho[c] >= top - slack) {
      throw ConvergenceError("two dominant classes in series; no nonnegative eigenvector");
    }
    // Fixed point of v = (M_cc v + b) / beta, contraction factor rho_c / beta.
    for (std::size_t it = 0;; ++it) {
      Real change = 0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        Real s = b[k];
        for (std::size_t j : m.row(members[k])) {
          if (comp_of[j] == c) s += v[j];
        }
        s /= beta;
        change = std::max(change, Real(abs(s - v[members[k]])));
        v[members[k]] = s;
      }
      if (change <= eps * (v[members[0]] + 1)) break;
      if (it > options.max_iterations) {
        throw ConvergenceError("upstream component did not converge");
      }
    }
  }
  return finish(m, std::move(beta), std::move(v), iterations, true, options);
}

}  // namespace

PerronResult perron(const BinaryMatrix& m, const PerronOptions& options) {
  if (m.size() == 0) throw PreconditionError("empty matrix");
  const auto start = power_double(m, options.tol, options.max_iterations);
  if (start.converged) {
    auto [beta, v] = polish(m, start.v, polish_budget(m));
    try {
      return finish(m, std::move(beta), std::move(v), start.iterations, false, options);
    } catch (const ConvergenceError&) {
      // Fall through to the component solver.
    }
  }
  return perron_by_components(m, options, start.iterations);
}

}  // namespace slopeforge
