#include <doctest.h>

#include "slopeforge/approximation.hpp"
#include "slopeforge/error.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace slopeforge;
using testing_support::fixture;
using testing_support::q;

TEST_CASE("Markov maps approximate themselves") {
  const MarkovApprox tent = markov_approx(fixture("tent"), 8);
  CHECK(tent.g == fixture("tent"));
  CHECK(tent.config.delta < Rational(1, 16));

  const MarkovApprox golden = markov_approx(fixture("golden"), 6);
  CHECK(golden.g == fixture("golden"));
}

TEST_CASE("approximation of the slope 3/2 tent") {
  const PwaMap f = fixture("tent32");
  const MarkovApprox a = markov_approx(f, 4);
  CHECK(sup_dist(f, a.g) < Rational(1, 4));
  const auto& pts = a.config.points;
  // The critical value 3/4 and its first images are kept exactly.
  for (const char* y : {"3/4", "3/8", "9/16", "21/32"}) {
    CHECK(std::binary_search(pts.begin(), pts.end(), q(y)));
  }
  CHECK(is_markov(a.g, pts).ok);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) CHECK(pts[i + 1] - pts[i] < a.config.delta);
}

TEST_CASE("approximation contract on non-Markov maps") {
  for (const char* name : {"tent32", "bimodal", "gapped_lorenz"}) {
    const PwaMap f = fixture(name);
    for (int n : {1, 2, 4, 8, 16, 32, 64}) {
      CAPTURE(name);
      CAPTURE(n);
      const MarkovApprox a = markov_approx(f, n);
      CHECK(sup_dist(f, a.g) * n < 1);
      CHECK(a.config.delta * 2 * n < 1);
      for (int k = 1; k <= std::min(n, 6); ++k) {
        const ShadowReport r = check_shadowing(f, a.g, k);
        CHECK_MESSAGE(r.ok, r.message);
      }
    }
  }
}

TEST_CASE("shadowing detects a map that turns inside a lap") {
  // Same lap endpoints and orbit images as the tent at depth 1, but with an
  // extra fold in the left lap.
  const PwaMap wiggle = PwaMap::continuous({q("0"), q("1/8"), q("1/4"), q("1/2"), q("1")},
                                           {q("0"), q("1/2"), q("1/4"), q("1"), q("0")});
  CHECK_FALSE(check_shadowing(fixture("tent"), wiggle, 1).ok);
  CHECK_FALSE(check_shadowing(fixture("tent"), fixture("golden"), 1).ok);
}

TEST_CASE("constant pieces are rejected") {
  CHECK_THROWS_AS(markov_approx(fixture("trapezoid"), 4), PreconditionError);
}

TEST_CASE("verification of a semiconjugacy") {
  const auto skew = std::make_shared<const MarkovStructure>(*markov_closure(fixture("skewtent"), 100));
  const PsiTable psi = build_psi(skew, 1e-9);
  const VerifyReport ok = verify_semiconjugacy(fixture("skewtent"), fixture("tent"), psi, 10000);
  CHECK(ok.residual < Real(1e-9));
  CHECK(ok.upper < Real(1e-9));
  CHECK(ok.samples >= 10001);
  REQUIRE(ok.slope_histogram.size() == 2);

  // Move the peak of g by 0.01.
  const PwaMap bent = PwaMap::continuous({q("0"), q("1/2"), q("1")}, {q("0"), q("99/100"), q("0")});
  const VerifyReport bad = verify_semiconjugacy(fixture("skewtent"), bent, psi, 10000);
  CHECK(bad.residual >= Real(0.004));
  CHECK(bad.lower >= Real(0.004));

  const auto tent = std::make_shared<const MarkovStructure>(*markov_closure(fixture("tent"), 100));
  const VerifyReport id = verify_semiconjugacy(fixture("tent"), fixture("tent"), build_psi(tent, 1e-9), 1000);
  CHECK(id.lower == 0);
  CHECK(id.residual < Real(1e-14));
  const VerifyReport exact = verify_semiconjugacy(fixture("tent"), fixture("tent"), psi_on_points(*tent, 10), 1000);
  CHECK(exact.residual == 0);
}

TEST_CASE("verification from an exported table") {
  const auto skew = std::make_shared<const MarkovStructure>(*markov_closure(fixture("skewtent"), 100));
  const PsiTable table = parse_psi_tsv(psi_tsv(psi_on_points(*skew, 10)));
  const VerifyReport ok = verify_semiconjugacy(fixture("skewtent"), fixture("tent"), table, 10000);
  CHECK(ok.residual < Real(1e-9));
  const PwaMap bent = PwaMap::continuous({q("0"), q("1/2"), q("1")}, {q("0"), q("99/100"), q("0")});
  CHECK(verify_semiconjugacy(fixture("skewtent"), bent, table, 10000).residual >= Real(0.004));
}

TEST_CASE("normalize takes the exact route on Markov maps") {
  const PipelineTrace skew = normalize(fixture("skewtent"), {1e-6, {1}, 4096, 14, 1000});
  CHECK(skew.markov_exact);
  CHECK(skew.converged);
  REQUIRE(skew.g);
  CHECK(skew.g->map == fixture("tent"));
  CHECK(abs(skew.gamma - 2) < Real(1e-20));
  CHECK(abs(skew.psi(q("5/12")) - Real(0.5)) < Real(1e-20));
  CHECK(skew.residuals.back() < Real(1e-6));

  const PipelineTrace golden = normalize(fixture("golden"), {1e-6, {1}, 4096, 14, 1000});
  const Real sqrt5 = sqrt(Real(5));
  const Real va = (3 - sqrt5) / 2;
  REQUIRE(golden.g);
  const auto& nodes = golden.g->map.nodes();
  REQUIRE(nodes.size() == 3);
  CHECK(abs(to_real(nodes[0].y_right.value()) - va) < Real(1e-30));
  CHECK(abs(to_real(nodes[1].x) - va) < Real(1e-30));
  CHECK(golden.log_gamma_gap() < 0.02);
}

TEST_CASE("normalize converges on the slope 3/2 tent") {
  const PipelineTrace t = normalize(fixture("tent32"), {1e-2, {2, 4, 8, 16, 32, 64}, 1024, 14, 50});
  CHECK_FALSE(t.markov_exact);
  CHECK(t.converged);
  CHECK(t.indices.back() == 64);
  REQUIRE(t.cauchy_gaps.back());
  CHECK(*t.cauchy_gaps.back() < Real(1e-2));
  CHECK(*t.cauchy_gaps.back() < *t.cauchy_gaps[t.cauchy_gaps.size() - 2]);
  CHECK(abs(t.gamma - Real(1.5)) < Real(1e-6));
  CHECK(t.log_gamma_gap() < 0.02);
  CHECK(t.residuals.back() < Real(1e-2));
  const std::string tsv = trace_tsv(t);
  CHECK(tsv.rfind("i\tbeta_i\tcauchy_gap\tresidual\n2\t", 0) == 0);
  CHECK(tsv.find("\tNA\t") != std::string::npos);

  const PipelineTrace short_run = normalize(fixture("tent32"), {1e-6, {2, 4}, 256, 14, 50});
  CHECK_FALSE(short_run.converged);
}

TEST_CASE("normalize rejects zero entropy") {
  try {
    normalize(fixture("identity"));
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()) == "entropy not positive");
  }
}
