#include <doctest.h>

#include "slopeforge/error.hpp"
#include "slopeforge/markov.hpp"
#include "slopeforge/perron.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace slopeforge;
using testing_support::fixture;
using testing_support::q;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

// Characteristic polynomial by Faddeev-LeVerrier, exact.
std::vector<Rational> char_poly(const BinaryMatrix& m) {
  const std::size_t n = m.size();
  using Mat = std::vector<std::vector<Rational>>;
  Mat a(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : m.row(i)) a[i][j] = 1;
  }
  auto mul = [&](const Mat& x, const Mat& y) {
    Mat z(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) z[i][j] += x[i][k] * y[k][j];
    return z;
  };
  std::vector<Rational> c(n + 1, Rational(0));  // c[k] is the coefficient of x^(n-k)
  c[0] = 1;
  Mat mk(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t i = 0; i < n; ++i) mk[i][i] += c[k - 1];
    mk = mul(a, mk);
    Rational trace = 0;
    for (std::size_t i = 0; i < n; ++i) trace += mk[i][i];
    c[k] = -trace / Rational(static_cast<long>(k));
  }
  return c;
}

// Polynomials as coefficient lists, highest degree first.
using Poly = std::vector<Rational>;

void trim(Poly& p) {
  while (p.size() > 1 && p.front() == 0) p.erase(p.begin());
  if (p.empty()) p.push_back(0);
}

Poly poly_mod(Poly a, const Poly& b) {
  while (a.size() >= b.size() && !(a.size() == 1 && a[0] == 0)) {
    const Rational factor = a[0] / b[0];
    for (std::size_t i = 0; i < b.size(); ++i) a[i] -= factor * b[i];
    a.erase(a.begin());
    trim(a);
  }
  return a;
}

Poly poly_div(Poly a, const Poly& b) {
  Poly quotient;
  while (a.size() >= b.size()) {
    const Rational factor = a[0] / b[0];
    quotient.push_back(factor);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] -= factor * b[i];
    a.erase(a.begin());
  }
  return quotient;
}

// p / gcd(p, p') has the same roots as p, all simple, so bisection finds them.
Poly square_free(const Poly& p) {
  Poly d;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    d.push_back(p[i] * Rational(static_cast<long>(p.size() - 1 - i)));
  }
  Poly a = p;
  Poly b = d;
  trim(b);
  while (!(b.size() == 1 && b[0] == 0)) {
    Poly r = poly_mod(a, b);
    a = b;
    b = r;
  }
  return poly_div(p, a);
}

double largest_real_root(const std::vector<Rational>& full) {
  const Poly c = square_free(full);
  auto p = [&](double x) {
    double s = 0;
    for (const auto& ck : c) s = s * x + ck.convert_to<double>();
    return s;
  };
  const double n = static_cast<double>(full.size() - 1);
  double hi = n + 1;
  double step = 1e-3;
  double x = hi;
  while (x > -1 && (p(x) > 0) == (p(hi) > 0)) x -= step;
  double lo = x;
  hi = x + step;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    ((p(mid) > 0) == (p(hi) > 0) ? hi : lo) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("perron on small matrices") {
  auto ones = perron(BinaryMatrix::from_dense({{1, 1}, {1, 1}}));
  CHECK(abs(ones.beta - 2) < Real("1e-30"));
  CHECK(abs(ones.v[0] - Real(1) / 2) < Real("1e-30"));

  auto golden = perron(BinaryMatrix::from_dense({{0, 1}, {1, 1}}));
  const Real phi = (1 + sqrt(Real(5))) / 2;
  CHECK(abs(golden.beta - phi) < Real("1e-30"));
  CHECK(abs(golden.v[0] - (3 - sqrt(Real(5))) / 2) < Real("1e-30"));
  CHECK(abs(golden.v[1] - (sqrt(Real(5)) - 1) / 2) < Real("1e-30"));

  auto one = perron(BinaryMatrix::from_dense({{1}}));
  CHECK(one.beta == 1);
  CHECK(one.low_entropy);
  CHECK(one.v[0] == 1);
}

TEST_CASE("perron falls back to components on reducible matrices") {
  // Dominant class {0,1} (golden) upstream of a fixed cell 2.
  const auto m = BinaryMatrix::from_dense({{0, 1, 1}, {1, 1, 0}, {0, 0, 1}});
  const auto r = perron(m);
  CHECK(abs(r.beta - Real(kPhi)) < Real("1e-12"));
  CHECK(r.v[2] < Real("1e-30"));
  CHECK(r.residual < Real("1e-20"));

  // Two equal classes in series, 0 -> 1, both with loops: the only nonnegative
  // eigenvector lives on the class nothing else reaches.
  const auto chain = perron(BinaryMatrix::from_dense({{1, 1}, {0, 1}}));
  CHECK(chain.used_components);
  CHECK(chain.beta == 1);
  CHECK(chain.v[0] == 1);
  CHECK(chain.v[1] == 0);

  const auto nil = perron(BinaryMatrix::from_dense({{0, 1}, {0, 0}}));
  CHECK(nil.beta == 0);
  CHECK(nil.v[0] == 1);
}

TEST_CASE("perron agrees with characteristic polynomial roots") {
  std::mt19937 rng(2024);
  std::bernoulli_distribution bit(0.45);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + t % 5;
    std::vector<std::vector<int>> rows(n, std::vector<int>(n));
    for (auto& r : rows)
      for (auto& x : r) x = bit(rng) ? 1 : 0;
    const auto m = BinaryMatrix::from_dense(rows);
    const double oracle = largest_real_root(char_poly(m));
    PerronResult r;
    try {
      r = perron(m);
    } catch (const ConvergenceError&) {
      continue;
    }
    ++checked;
    CAPTURE(serialize_matrix(m));
    CHECK(std::abs(r.beta.convert_to<double>() - oracle) < 1e-9);
    CHECK(r.residual <= Real("1e-12") * std::max(r.beta, Real(1)));
    for (const auto& x : r.v) CHECK(x >= 0);
  }
  CHECK(checked >= 50);
}

TEST_CASE("mixing classification") {
  auto a = is_mixing_matrix(BinaryMatrix::from_dense({{1, 1}, {1, 1}}));
  CHECK(a.irreducible);
  CHECK(a.primitive);
  auto b = is_mixing_matrix(BinaryMatrix::from_dense({{0, 1}, {1, 0}}));
  CHECK(b.irreducible);
  CHECK_FALSE(b.primitive);
  CHECK(b.period == 2);
  auto c = is_mixing_matrix(BinaryMatrix::from_dense({{1, 0}, {1, 1}}));
  CHECK_FALSE(c.irreducible);
  CHECK_FALSE(c.primitive);
}

TEST_CASE("matrix text format") {
  const auto m = parse_matrix("matrix 2\n0 1\n1 1\n");
  CHECK(m == BinaryMatrix::from_dense({{0, 1}, {1, 1}}));
  CHECK(serialize_matrix(m) == "matrix 2\n0 1\n1 1\n");
  CHECK_THROWS_AS(parse_matrix("matrix 2\n0 2\n1 1\n"), ParseError);
}

TEST_CASE("is_markov") {
  const PwaMap tent = fixture("tent");
  CHECK(is_markov(tent, {0, q("1/2"), 1}).ok);
  const auto bad = is_markov(tent, {0, q("1/3"), 1});
  CHECK_FALSE(bad.ok);
  CHECK(bad.condition == "invariance");
  CHECK(*bad.point == q("1/3"));
  CHECK(is_markov(fixture("golden"), {0, q("1/2"), 1}).ok);
  CHECK(is_markov(fixture("doubling"), {0, q("1/2"), 1}).ok);
  const auto jump = is_markov(fixture("doubling"), {0, 1});
  CHECK_FALSE(jump.ok);
  CHECK(jump.condition == "continuity");
  CHECK(is_markov(tent, {q("1/2"), 1}).condition == "endpoints");
}

TEST_CASE("markov_closure") {
  auto tent = markov_closure(fixture("tent"), 100);
  REQUIRE(tent);
  CHECK(tent->points == std::vector<Rational>{0, q("1/2"), 1});
  auto skew = markov_closure(fixture("skewtent"), 100);
  REQUIRE(skew);
  CHECK(skew->points == std::vector<Rational>{0, q("5/12"), 1});
  CHECK(abs(skew->beta - 2) < Real("1e-30"));
  CHECK_FALSE(markov_closure(fixture("tent32"), 50));
  CHECK_FALSE(markov_closure(fixture("bimodal"), 200));
  CHECK_FALSE(markov_closure(fixture("gapped_lorenz"), 200));

  auto trap = markov_closure(fixture("trapezoid"), 100);
  REQUIRE(trap);
  CHECK(trap->points == std::vector<Rational>{0, q("2/5"), q("3/5"), q("4/5"), 1});
  CHECK(abs(trap->beta - 1) < Real("1e-12"));
}

TEST_CASE("transition matrices") {
  CHECK(markov_closure(fixture("tent"), 10)->matrix == BinaryMatrix::from_dense({{1, 1}, {1, 1}}));
  CHECK(markov_closure(fixture("golden"), 10)->matrix ==
        BinaryMatrix::from_dense({{0, 1}, {1, 1}}));
  const PwaMap trap = fixture("trapezoid");
  const auto m = transition_matrix(trap, {{0, q("2/5")}, {q("2/5"), q("3/5")}, {q("3/5"), 1}});
  CHECK(m.row(1).empty());
  CHECK(m.row(0).size() == 2);  // [0,2/5] -> [0,4/5] covers the first two cells
  CHECK(m.row(2).size() == 2);
  CHECK_THROWS_AS(transition_matrix(fixture("tent"), {{0, 1}}), PreconditionError);
}

TEST_CASE("refinements") {
  const auto golden = *markov_closure(fixture("golden"), 10);
  CHECK(refine(golden, 1).points == std::vector<Rational>{0, q("1/2"), q("3/4"), 1});
  const auto r0 = refine(golden, 0);
  CHECK(r0.points == golden.points);

  const auto tent = *markov_closure(fixture("tent"), 10);
  const auto r2 = refine(tent, 2);
  REQUIRE(r2.cell_count() == 8);
  for (std::size_t k = 0; k <= 8; ++k) CHECK(r2.points[k] == Rational(static_cast<long>(k), 8));
}

TEST_CASE("refinement invariants on Markov fixtures") {
  for (const char* name : {"tent", "golden", "skewtent", "doubling", "full_trapezoid", "zigzag3"}) {
    CAPTURE(name);
    const auto s = *markov_closure(fixture(name), 100);
    Refinement prev = refine(s, 0);
    for (int n = 1; n <= 8; ++n) {
      const Refinement cur = refine_step(s, prev);
      // P_n ⊆ P_{n+1} and f(P_{n+1}) ⊆ P_n, one-sided at jumps.
      for (const auto& p : prev.points) CHECK(find_point(cur.points, p));
      for (const auto& p : cur.points) {
        if (p != s.map.lo()) CHECK(find_point(prev.points, s.map.eval(p, Side::left)));
        if (p != s.map.hi()) CHECK(find_point(prev.points, s.map.eval(p, Side::right)));
      }
      bool has_constant = false;
      for (const auto& img : s.images) has_constant = has_constant || img.singleton();
      if (!has_constant) {
        CHECK(s.matrix.power_entry_sum(n) == Integer(static_cast<long>(cur.cell_count())));
      }
      prev = cur;
    }
  }
}

TEST_CASE("eigenvector identity on A_1") {
  for (const char* name : {"tent", "golden", "skewtent", "full_trapezoid", "zigzag3"}) {
    CAPTURE(name);
    const auto s = *markov_closure(fixture(name), 100);
    const auto r1 = refine(s, 1);
    for (std::size_t c = 0; c < s.cells.size(); ++c) {
      Real sum = 0;
      for (std::size_t d = 0; d < r1.cell_count(); ++d) {
        if (s.cells[c].contains(r1.cell(d)) && r1.image_index[d]) sum += s.v[*r1.image_index[d]];
      }
      CHECK(abs(s.v[c] - sum / s.beta) < Real("1e-9"));
    }
  }
}
