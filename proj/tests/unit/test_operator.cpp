#include <doctest.h>

#include "slopeforge/error.hpp"
#include "slopeforge/operator.hpp"
#include "support.hpp"

#include <random>

using namespace slopeforge;
using testing_support::fixture;
using testing_support::q;

namespace {

template <class F>
std::string precondition_message(F&& f) {
  try {
    f();
  } catch (const PreconditionError& e) {
    return e.what();
  }
  return "";
}

PwaMap truncated_tent(const Rational& slope) {
  return PwaMap::continuous({q("0"), q("1/2"), q("1")}, {q("0"), slope / 2, q("0")},
                            MapKind::function);
}

std::vector<Rational> random_turning_values(std::mt19937_64& rng, int modality) {
  int k = std::uniform_int_distribution<int>(1, 63)(rng);
  std::vector<Rational> ys{Rational(k, 64)};
  bool up = rng() & 1;
  while (ys.size() < static_cast<std::size_t>(modality) + 2) {
    k = up ? std::uniform_int_distribution<int>(k + 1, 64)(rng)
           : std::uniform_int_distribution<int>(0, k - 1)(rng);
    ys.emplace_back(k, 64);
    up = !up;
  }
  return ys;
}

}  // namespace

TEST_CASE("slope gap bound formula") {
  CHECK(slope_gap_bound(Real(2), Real("1.5"), 1) == Real("0.125"));
  CHECK(abs(slope_gap_bound(Real(3), Real(2), 2) - Real(1) / 6) < Real("1e-30"));
  const Real phi_ratio = (1 + sqrt(Real(5))) / 2;
  CHECK_THROWS_AS(slope_gap_bound(phi_ratio, phi_ratio, 1), PreconditionError);
  CHECK_THROWS_AS(slope_gap_bound(Real(3), Real(2), 0), PreconditionError);
}

TEST_CASE("gap bound against a truncated tent") {
  const GapCheck c = check_gap_bound(fixture("tent"), truncated_tent(q("3/2")));
  CHECK(c.holds);
  CHECK(c.alpha == 2);
  CHECK(c.beta == q("3/2"));
  CHECK(c.modality == 1);
  CHECK(c.bound == q("1/8"));
  CHECK(c.distance == q("1/4"));
}

TEST_CASE("gap bound preconditions") {
  CHECK(precondition_message([] { check_gap_bound(fixture("tent"), fixture("reflected_tent")); }) ==
        "slope gap bound requires alpha > beta");
  CHECK_THROWS_AS(check_gap_bound(fixture("tent"), fixture("skewtent")), PreconditionError);
  CHECK_THROWS_AS(check_gap_bound(fixture("doubling"), truncated_tent(q("1"))), PreconditionError);
}

TEST_CASE("turning values give constant slope") {
  const PwaMap f = constant_slope_from_turning_values({q("0"), q("1"), q("1/4"), q("3/4")});
  CHECK(exact_constant_slope(f) == Rational(q("9/4")));
  CHECK(laps(f).size() == 3);
  CHECK_THROWS_AS(constant_slope_from_turning_values({q("0"), q("1/2"), q("1")}), PreconditionError);
}

TEST_CASE("gap bound holds on random constant-slope pairs") {
  std::mt19937_64 rng(20261016);
  std::uniform_int_distribution<int> modality(1, 5);
  int checked = 0;
  while (checked < 100) {
    PwaMap f = constant_slope_from_turning_values(random_turning_values(rng, modality(rng)));
    PwaMap g = constant_slope_from_turning_values(random_turning_values(rng, modality(rng)));
    if (*exact_constant_slope(f) == *exact_constant_slope(g)) continue;
    if (*exact_constant_slope(f) < *exact_constant_slope(g)) std::swap(f, g);
    const GapCheck c = check_gap_bound(f, g);
    CAPTURE(to_string(c.distance));
    CAPTURE(to_string(c.bound));
    CHECK(c.holds);
    ++checked;
  }
}

TEST_CASE("phi of the skew tent") {
  const NormalForm nf = phi(fixture("skewtent"));
  CHECK(nf.g.map == fixture("tent"));
  CHECK(nf.conjugacy);
  CHECK(nf.evidence == TransitivityEvidence::matrix_primitive);
  CHECK(abs(nf.psi(q("5/12")) - Real("0.5")) < Real("1e-12"));
  CHECK(nf.input_modality == 1);
  CHECK(nf.output_modality == 1);
}

TEST_CASE("phi fixes constant-slope maps") {
  for (const char* name : {"tent", "reflected_tent", "zigzag3"}) {
    CAPTURE(name);
    const PwaMap f = fixture(name);
    const NormalForm nf = phi(f);
    CHECK(nf.conjugacy);
    CHECK(sup_dist(nf.g.map, f) < Rational(1, 1000000));
    Real worst = 0;
    for (std::size_t i = 0; i < nf.psi.xs.size(); ++i) {
      const Real d = abs(nf.psi.ys[i] - Real(nf.psi.xs[i]));
      if (d > worst) worst = d;
    }
    CHECK(worst < Real("1e-6"));
  }
}

TEST_CASE("phi collapses flat pieces and reports a semiconjugacy") {
  const NormalForm nf = phi(fixture("full_trapezoid"));
  REQUIRE(nf.quotient);
  CHECK_FALSE(nf.quotient->collapse_intervals.empty());
  CHECK(nf.g.map == fixture("tent"));
  CHECK_FALSE(nf.conjugacy);
}

TEST_CASE("phi preconditions") {
  CHECK(precondition_message([] { phi(fixture("doubling")); }) == "discontinuous input");
  CHECK(precondition_message([] { phi(fixture("identity")); }) == "entropy not positive");
}

TEST_CASE("orbit coverage") {
  CHECK(orbit_coverage(fixture("tent"), 4000, 64) == 1.0);
  CHECK(orbit_coverage(fixture("golden"), 4000, 64) == 1.0);
  CHECK(orbit_coverage(fixture("identity"), 1000, 32) < 0.1);
}
