#include <doctest.h>

#include "slopeforge/entropy.hpp"
#include "slopeforge/error.hpp"
#include "slopeforge/semiconjugacy.hpp"
#include "support.hpp"

#include <cmath>
#include <memory>

using namespace slopeforge;
using testing_support::fixture;
using testing_support::q;

namespace {

std::shared_ptr<const MarkovStructure> structure(const char* name) {
  return std::make_shared<const MarkovStructure>(*markov_closure(fixture(name), 1000));
}

Real real(const char* text) { return Real(text); }

bool near(const Real& a, const Real& b, double tol) { return abs(a - b) <= Real(tol); }

}  // namespace

TEST_CASE("golden map psi values") {
  const auto s = structure("golden");
  const Real sqrt5 = sqrt(Real(5));
  const Real phi = (1 + sqrt5) / 2;
  const Real va = (3 - sqrt5) / 2;
  const Real vb = 1 - va;

  const PsiTable t = build_psi(s, 1e-6);
  CHECK(t.depth == 29);
  CHECK(near(t(q("1/2")), va, 1e-30));
  CHECK(near(t(q("3/4")), 2 * vb / phi, 1e-30));
  CHECK(t(q("0")) == 0);
  CHECK(t(q("1")) == 1);

  const PsiEnclosure e = t.enclose(q("1/3"));
  CHECK(e.width() < Real(1e-12));
  CHECK(e.lo <= t(q("1/3")));
}

TEST_CASE("tent psi is the identity") {
  const auto s = structure("tent");
  const PsiTable t = build_psi(s, 1e-9);
  for (int k = 0; k <= 30; ++k) {
    const Rational x(k, 30);
    CHECK(near(t(x), to_real(x), 1e-14));
  }
  const PsiTable t3 = build_psi(s, 1e-3);
  CHECK(t3.depth == 10);
  CHECK(t3.table_depth == 10);
  for (std::size_t i = 0; i < t3.xs.size(); ++i) CHECK(t3.ys[i] == to_real(t3.xs[i]));
  const PsiTable coarse = psi_on_points(*s, 4);
  REQUIRE(coarse.xs.size() == 33);
  for (std::size_t i = 0; i < coarse.xs.size(); ++i) CHECK(near(coarse.ys[i], to_real(coarse.xs[i]), 1e-30));
}

TEST_CASE("skew tent normalizes to the tent") {
  const auto s = structure("skewtent");
  const PsiTable t = build_psi(s, 1e-9);
  CHECK(near(t(q("5/12")), real("0.5"), 1e-30));
  const ConstantSlopeMap g = build_constant_slope(*s, t);
  CHECK(g.map == fixture("tent"));
  CHECK(near(g.slope, Real(2), 1e-30));
}

TEST_CASE("golden map constant-slope model") {
  const auto s = structure("golden");
  const PsiTable t = build_psi(s, 1e-9);
  const ConstantSlopeMap g = build_constant_slope(*s, t);
  const auto hist = slope_histogram(g.map);
  REQUIRE(hist.size() == 2);
  CHECK(hist.begin()->first == "-1.618033989");
  CHECK(hist.rbegin()->first == "1.618033989");
  // Directions of the laps are preserved.
  const auto fl = laps(s->map);
  const auto gl = laps(g.map);
  REQUIRE(fl.size() == gl.size());
  for (std::size_t i = 0; i < fl.size(); ++i) CHECK(fl[i].direction == gl[i].direction);
  const auto r = entropy_lapcount(g.map, 12);
  CHECK(std::abs(r.trend - std::log((1 + std::sqrt(5.0)) / 2)) < 0.05);
}

TEST_CASE("slopes are uniform across the Markov fixtures") {
  for (const char* name : {"tent", "golden", "skewtent", "doubling", "full_trapezoid", "zigzag3",
                           "reflected_tent"}) {
    CAPTURE(name);
    const auto s = structure(name);
    const PsiTable t = build_psi(s, 1e-8);
    const ConstantSlopeMap g = build_constant_slope(*s, t);
    for (std::size_t i = 0; i < g.map.segment_count(); ++i) {
      const Segment seg = g.map.segment(i);
      if (seg.direction() == Direction::constant) continue;
      CHECK(near(abs(to_real(seg.slope())), s->beta, 1e-9 * s->beta.convert_to<double>()));
    }
    const Eq4a1Report rep = check_eq4a1(s->map, t, s->beta, 200, 7);
    CHECK(rep.max_residual <= rep.tolerance + Real(1e-20));
  }
}

TEST_CASE("psi is consistent across depths") {
  for (const char* name : {"golden", "skewtent", "zigzag3", "full_trapezoid"}) {
    CAPTURE(name);
    const auto s = structure(name);
    const PsiEvaluator eval(s);
    PsiTable prev = psi_on_points(*s, 1);
    for (int n = 2; n <= 12; ++n) {
      const PsiTable cur = psi_on_points(*s, n);
      std::size_t j = 0;
      for (std::size_t i = 0; i < prev.xs.size(); ++i) {
        while (cur.xs[j] != prev.xs[i]) ++j;
        CHECK(near(cur.ys[j], prev.ys[i], 1e-12));
      }
      prev = cur;
    }
    // The orbit evaluator reproduces the table exactly on P_n.
    for (std::size_t i = 0; i < prev.xs.size(); i += 37) {
      const PsiEnclosure e = eval.enclose(prev.xs[i]);
      CHECK(near(e.mid(), prev.ys[i], 1e-25));
    }
  }
}

TEST_CASE("collapse of the full trapezoid") {
  const auto s = structure("full_trapezoid");
  const PsiTable t = build_psi(s, 1e-6);
  REQUIRE_FALSE(t.collapse_intervals.empty());
  bool plateau = false;
  for (const Interval& c : t.collapse_intervals) plateau = plateau || c == Interval{q("1/3"), q("2/3")};
  CHECK(plateau);
  CHECK(near(t(q("1/2")), real("0.5"), 1e-25));
  CHECK(near(t(q("1/9")), real("0.25"), 1e-25));
  CHECK(check_compatibility(s->map, t).ok);

  const ConstantSlopeMap g = build_constant_slope(*s, t);
  CHECK(g.map == fixture("tent"));
}

TEST_CASE("incompatible psi is rejected") {
  PsiTable t;
  t.xs = {q("0"), q("1/2"), q("1")};
  t.ys = {Real(0), Real(0), Real(1)};
  const auto report = check_compatibility(fixture("tent"), t);
  CHECK_FALSE(report.ok);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].interval == Interval{q("0"), q("1/2")});
}

TEST_CASE("psi requires positive entropy") {
  const auto s = std::make_shared<const MarkovStructure>(*markov_closure(fixture("identity"), 10));
  CHECK_THROWS_AS(build_psi(s, 1e-6), PreconditionError);
}

TEST_CASE("psi TSV round trip") {
  const auto s = structure("skewtent");
  const PsiTable t = psi_on_points(*s, 3);
  const std::string text = psi_tsv(t);
  CHECK(text.rfind("x\tpsi\tx_exact\n0\t0\t0\n", 0) == 0);
  const PsiTable back = parse_psi_tsv(text);
  CHECK(back.xs == t.xs);
  CHECK(!back.evaluator);
  CHECK(back.value_tolerance < Real(1e-14));
  for (std::size_t i = 0; i < t.ys.size(); ++i) CHECK(near(back.ys[i], t.ys[i], 1e-15));
  CHECK_THROWS_AS(parse_psi_tsv("x\ty\n"), ParseError);
  CHECK_THROWS_AS(parse_psi_tsv("x\tpsi\n0\t0.5\n1\t0.25\n"), ParseError);
}
