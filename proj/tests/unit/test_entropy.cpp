#include <doctest.h>

#include "slopeforge/entropy.hpp"
#include "support.hpp"

#include <cmath>

using namespace slopeforge;
using testing_support::fixture;

namespace {
const double kLogPhi = std::log((1 + std::sqrt(5.0)) / 2);
}

TEST_CASE("lap-count entropy of the tent map") {
  const auto r = entropy_lapcount(fixture("tent"), 10);
  for (int n = 1; n <= 10; ++n) {
    CHECK(r.lap_counts[n - 1] == (std::size_t{1} << n));
    CHECK(std::abs(r.lap_estimates[n - 1] - std::log(2.0)) < 1e-15);
  }
  CHECK(std::abs(r.trend - std::log(2.0)) < 1e-15);
}

TEST_CASE("lap-count entropy of the golden map") {
  const auto r = entropy_lapcount(fixture("golden"), 10);
  CHECK(r.lap_counts.back() == 144);
  CHECK(std::abs(r.lap_estimates.back() - std::log(144.0) / 10) < 1e-15);
  CHECK(r.lap_estimates.back() == doctest::Approx(0.4970).epsilon(1e-4));
  for (std::size_t n = 1; n < r.lap_estimates.size(); ++n) {
    CHECK(r.lap_estimates[n] < r.lap_estimates[n - 1]);
    CHECK(r.lap_estimates[n] > kLogPhi);
  }
  CHECK(r.fekete_bound == r.lap_estimates.back());
  CHECK(std::abs(r.trend - kLogPhi) < 0.005);
}

TEST_CASE("zero entropy maps") {
  const auto id = entropy_lapcount(fixture("identity"), 8);
  for (auto c : id.lap_counts) CHECK(c == 1);
  CHECK(id.trend == 0);
  CHECK_FALSE(id.positive());

  const auto flat = entropy(fixture("constant"));
  CHECK_FALSE(flat.positive());
  REQUIRE(flat.spectral);
  CHECK(*flat.spectral == 0);
  REQUIRE_FALSE(flat.warnings.empty());
  CHECK(flat.warnings.front() == "no positive entropy; normalization undefined");
}

TEST_CASE("spectral entropy") {
  CHECK(std::abs(entropy_spectral(*markov_closure(fixture("tent"), 10)) - std::log(2.0)) < 1e-12);
  CHECK(std::abs(entropy_spectral(*markov_closure(fixture("golden"), 10)) - kLogPhi) < 1e-12);

  const auto tent = entropy(fixture("tent"));
  REQUIRE(tent.spectral);
  CHECK(tent.agreed);

  const auto golden = entropy(fixture("golden"));
  REQUIRE(golden.spectral);
  CHECK(golden.agreed);

  const auto slope32 = entropy(fixture("tent32"), {12, 0.02, 50, {}});
  CHECK_FALSE(slope32.spectral);
  CHECK(std::abs(slope32.trend - std::log(1.5)) < 0.02);
}

TEST_CASE("refinement growth matches the spectral value") {
  // (1/n) log #A_n overshoots by the prefactor; the two-step ratio does not.
  for (const char* name : {"tent", "golden", "skewtent", "doubling", "full_trapezoid", "zigzag3"}) {
    CAPTURE(name);
    const auto s = *markov_closure(fixture(name), 100);
    std::vector<std::size_t> cells;
    Refinement r = refine(s, 0);
    for (int n = 1; n <= 12; ++n) {
      r = refine_step(s, r);
      cells.push_back(r.cell_count());
    }
    CHECK(std::abs(lap_trend(cells) - entropy_spectral(s)) < 0.05);
  }
}

TEST_CASE("entropy of iterates") {
  for (const char* name : {"golden", "tent32", "bimodal", "gapped_lorenz"}) {
    CAPTURE(name);
    const PwaMap f = fixture(name);
    const auto base = entropy_lapcount(f, 12);
    for (int k : {2, 3, 4}) {
      const auto iter = entropy_lapcount(iterate(f, k), 12 / k);
      for (int m = 1; m <= 12 / k; ++m) CHECK(iter.lap_counts[m - 1] == base.lap_counts[m * k - 1]);
      CHECK(std::abs(iter.lap_estimates.back() - k * base.lap_estimates.back()) < 0.05);
    }
  }
}

TEST_CASE("report truncates at the node budget") {
  const auto r = entropy_lapcount(fixture("tent"), 12, IterationLimits{300});
  CHECK(r.truncated);
  CHECK(r.depth() < 12);
  CHECK(r.depth() >= 7);
}

TEST_CASE("entropy TSV layout") {
  const auto r = entropy(fixture("tent"), {3, 0.02, 10, {}});
  const std::string tsv = entropy_tsv(r);
  CHECK(tsv.rfind("n\tc_n\testimate\n1\t2\t0.693147180559945\n", 0) == 0);
  CHECK(tsv.find("spectral\t\t0.693147180559945\n") != std::string::npos);
  CHECK(tsv.find("agreed\t\t1\n") != std::string::npos);
}
