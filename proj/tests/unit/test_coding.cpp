#include <doctest.h>

#include "slopeforge/coding.hpp"
#include "slopeforge/entropy.hpp"
#include "slopeforge/error.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace slopeforge;
using testing_support::fixture;
using testing_support::q;

namespace {

bool covered(const std::vector<Interval>& runs, const Interval& c) {
  return std::any_of(runs.begin(), runs.end(), [&](const Interval& r) { return r.contains(c); });
}

}  // namespace

TEST_CASE("itineraries") {
  const PwaMap tent = fixture("tent");
  const Itinerary third = itinerary(tent, q("1/3"), 4);
  CHECK(third.letters() == "A,B,B,B");
  CHECK(third.ambiguous_at.empty());

  const Itinerary half = itinerary(tent, q("1/2"), 2);
  CHECK(half.ambiguous_at == std::vector<std::size_t>{0});
  CHECK(half.letters() == "A,B");

  // Orbit 0, 1/2, 1: the middle point is shared and resolves to the left lap.
  const Itinerary golden = itinerary(fixture("golden"), q("0"), 3);
  CHECK(golden.letters() == "A,A,B");
  CHECK(golden.ambiguous_at == std::vector<std::size_t>{1});
}

TEST_CASE("itinerary agrees with brute-force lap membership") {
  for (const char* name : {"tent", "golden", "zigzag3", "bimodal", "gapped_lorenz"}) {
    CAPTURE(name);
    const PwaMap f = fixture(name);
    const auto lap_list = laps(f);
    for (int k = 0; k <= 40; ++k) {
      Rational x(2 * k + 1, 83);
      const Itinerary it = itinerary(f, x, 6);
      for (std::size_t i = 0; i < it.word.size(); ++i) {
        CHECK(lap_list[it.word[i]].interval.contains(x));
        x = f(x);
      }
    }
  }
}

TEST_CASE("reduction of a strictly monotone map is trivial") {
  const QuotientResult r = psm_reduce(fixture("tent"), 8);
  CHECK(r.collapse_intervals.empty());
  CHECK(r.psi0 == PwaMap::continuous({q("0"), q("1")}, {q("0"), q("1")}, MapKind::function));
  CHECK(r.fhat == fixture("tent"));
  CHECK(r.factor_residual == 0);
}

TEST_CASE("trapezoid plateau collapses") {
  const PwaMap f = fixture("trapezoid");
  const QuotientResult r = psm_reduce(f, 8);
  const Interval plateau{q("2/5"), q("3/5")};
  CHECK(std::find(r.collapse_intervals.begin(), r.collapse_intervals.end(), plateau) !=
        r.collapse_intervals.end());
  // First preimages of the plateau.
  for (const Interval& pre : {Interval{q("1/5"), q("3/10")}, Interval{q("7/10"), q("4/5")}}) {
    CHECK(std::find(r.collapse_intervals.begin(), r.collapse_intervals.end(), pre) !=
          r.collapse_intervals.end());
  }
  CHECK_FALSE(r.fhat.has_constant_piece());
  CHECK(r.fhat.domain() == Interval{q("0"), q("1")});
  const double hf = entropy_lapcount(f, 10).trend;
  const double hg = entropy_lapcount(r.fhat, 10).trend;
  CHECK(std::abs(hf - hg) < 0.05);
  CHECK(r.factor_residual < Rational(1, 10));
}

TEST_CASE("collapse grows with depth and the factor error shrinks") {
  for (const char* name : {"trapezoid", "full_trapezoid"}) {
    CAPTURE(name);
    const PwaMap f = fixture(name);
    QuotientResult prev = psm_reduce(f, 2);
    for (int d = 3; d <= 10; ++d) {
      CAPTURE(d);
      const QuotientResult cur = psm_reduce(f, d);
      for (const Interval& c : prev.collapse_intervals) CHECK(covered(cur.collapsed_runs, c));
      CHECK(cur.factor_residual <= prev.factor_residual);
      CHECK_FALSE(cur.fhat.has_constant_piece());
      prev = cur;
    }
  }
}

TEST_CASE("full trapezoid reduces to the tent") {
  const QuotientResult r = psm_reduce(fixture("full_trapezoid"), 8);
  CHECK(r.fhat == fixture("tent"));
  CHECK(r.psi0(q("1/2")) == q("1/2"));
}

TEST_CASE("reduction requires positive entropy") {
  try {
    psm_reduce(fixture("identity"), 4);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()) == "entropy not positive");
  }
}

TEST_CASE("collapse TSV") {
  CHECK(collapse_tsv({{q("2/5"), q("3/5")}}) == "lo\thi\n2/5\t3/5\n");
}
