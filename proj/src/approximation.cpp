#include "slopeforge/approximation.hpp"

#include "slopeforge/entropy.hpp"
#include "slopeforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

namespace slopeforge {

namespace {

struct SidedPoint {
  Rational x;
  Side side;
};

SidedPoint step(const PwaMap& f, const SidedPoint& p) {
  const std::size_t seg = f.segment_index(p.x, p.side);
  Rational y = f.eval(p.x, p.side);
  Side side = p.side;
  if (f.segment(seg).direction() == Direction::decreasing) {
    side = side == Side::left ? Side::right : Side::left;
  }
  if (y == f.lo()) side = Side::right;
  if (y == f.hi()) side = Side::left;
  return {std::move(y), side};
}

void add_orbit(const PwaMap& f, SidedPoint p, int steps, std::set<Rational>& out) {
  out.insert(p.x);
  for (int i = 0; i < steps; ++i) {
    p = step(f, p);
    out.insert(p.x);
  }
}

Integer grid_size(const PwaMap& f, const Rational& delta) {
  const Rational len = f.hi() - f.lo();
  Integer l = 1;
  for (const Node& node : f.nodes()) l = lcm(l, denominator((node.x - f.lo()) / len));
  const Rational ratio = len / delta;
  const Integer m0 = numerator(ratio) / denominator(ratio) + 1;
  return ((m0 + l - 1) / l) * l;
}

}  // namespace

MarkovApprox markov_approx(const PwaMap& f, int n) {
  if (n < 1) throw PreconditionError("approximation index must be >= 1");
  if (f.has_constant_piece()) {
    throw PreconditionError("map has a constant lap; reduce it to a strictly monotone map first");
  }
  ApproxConfig config;
  config.n = n;
  const Rational quarter(1, 4 * n);
  const Rational by_slope = Rational(1) / (2 * n * f.max_abs_slope());
  config.delta = std::min(quarter, by_slope);
  config.grid = grid_size(f, config.delta);
  config.shadow_depth = std::min(n, kMaxShadowDepth);
  config.orbit_length = std::min(n, kMaxCriticalOrbit);

  std::set<Rational> points;
  const Rational len = f.hi() - f.lo();
  for (Integer k = 0; k <= config.grid; ++k) points.insert(f.lo() + len * Rational(k, config.grid));
  for (const Node& node : f.nodes()) points.insert(node.x);

  PwaMap fk = f;
  for (int k = 1; k <= config.shadow_depth; ++k) {
    if (k > 1) fk = compose(f, fk);
    const int length = k == 1 ? config.orbit_length : k;
    for (const Lap& lap : laps(fk)) {
      add_orbit(f, {lap.interval.lo, Side::right}, length, points);
      add_orbit(f, {lap.interval.hi, Side::left}, length, points);
    }
  }
  config.points.assign(points.begin(), points.end());
  const auto& pts = config.points;

  auto snap = [&](const Rational& y) -> const Rational& {
    return *(std::upper_bound(pts.begin(), pts.end(), y) - 1);
  };
  std::vector<Node> nodes;
  nodes.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Node node{pts[i], std::nullopt, std::nullopt};
    if (i > 0) node.y_left = snap(f.eval(pts[i], Side::left));
    if (i + 1 < pts.size()) node.y_right = snap(f.eval(pts[i], Side::right));
    nodes.push_back(std::move(node));
  }
  PwaMap g = simplify(PwaMap(std::move(nodes)));

  const MarkovCheck check = is_markov(g, pts);
  if (!check.ok) throw VerificationError("approximation is not Markov: " + check.message);
  if (sup_dist(f, g) * n >= 1) throw VerificationError("approximation is not within 1/n of f");
  return {std::move(g), std::move(config)};
}

ShadowReport check_shadowing(const PwaMap& f, const PwaMap& g, int k) {
  ShadowReport report;
  std::vector<PwaMap> fi{f}, gi{g};
  for (int i = 2; i <= k; ++i) {
    fi.push_back(compose(f, fi.back()));
    gi.push_back(compose(g, gi.back()));
  }
  const PwaMap& gk = gi.back();
  for (const Lap& lap : laps(fi.back())) {
    const Rational& a = lap.interval.lo;
    const Rational& b = lap.interval.hi;
    for (int i = 0; i < k; ++i) {
      if (fi[i].eval(a, Side::right) != gi[i].eval(a, Side::right) ||
          fi[i].eval(b, Side::left) != gi[i].eval(b, Side::left)) {
        report.ok = false;
        report.lap = lap.interval;
        report.message = "orbit of a lap endpoint separates at step " + std::to_string(i + 1);
        return report;
      }
    }
    const std::size_t first = gk.segment_index(a, Side::right);
    const std::size_t last = gk.segment_index(b, Side::left);
    for (std::size_t s = first; s <= last; ++s) {
      const Direction d = gk.segment(s).direction();
      if (d != Direction::constant && d != lap.direction) {
        report.ok = false;
        report.lap = lap.interval;
        report.message = "g^" + std::to_string(k) + " turns inside a lap of f^" + std::to_string(k);
        return report;
      }
    }
  }
  return report;
}

std::vector<Rational> check_grid(const PwaMap& f, std::size_t m) {
  std::vector<Rational> xs;
  xs.reserve(m + 1 + f.nodes().size());
  const Rational len = f.hi() - f.lo();
  for (std::size_t k = 0; k <= m; ++k) xs.push_back(f.lo() + len * Rational(k, m));
  for (const Node& node : f.nodes()) xs.push_back(node.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

VerifyReport verify_semiconjugacy(const PwaMap& f, const PwaMap& g, const PsiTable& psi,
                                  std::size_t grid) {
  VerifyReport report{Real(0), Real(0), Real(0), Real(0), 0, std::nullopt, slope_histogram(g)};
  std::vector<Rational> xs;
  if (psi.evaluator) {
    xs = check_grid(f, grid);
  } else {
    const std::size_t count = psi.xs.size();
    const std::size_t stride = std::max<std::size_t>(1, (count - 1 + grid - 1) / std::max<std::size_t>(grid, 1));
    for (std::size_t i = 0; i < count; i += stride) xs.push_back(psi.xs[i]);
    if (xs.back() != psi.xs.back()) xs.push_back(psi.xs.back());
  }
  const RealMap gr(g);
  std::set<Rational> nodes;
  for (const Node& node : f.nodes()) nodes.insert(node.x);

  // psi carries x± to psi(x)±; at the ends of [0, 1] only one side exists.
  auto g_at = [&](const Real& y, Side side) {
    const Real z = std::clamp(y, gr.lo(), gr.hi());
    if (z == gr.lo()) side = Side::right;
    if (z == gr.hi()) side = Side::left;
    return gr.eval(z, side);
  };

  for (const Rational& x : xs) {
    std::vector<Side> sides;
    if (x == f.lo()) {
      sides = {Side::right};
    } else if (x == f.hi()) {
      sides = {Side::left};
    } else if (nodes.count(x)) {
      sides = {Side::left, Side::right};
    } else {
      sides = {Side::right};
    }
    const PsiEnclosure px = psi.enclose(x);
    const Real px_best = psi.evaluator ? px.mid() : psi(x);
    for (Side side : sides) {
      const Rational fx = f.eval(x, side);
      const PsiEnclosure pfx = psi.enclose(fx);
      const Real pfx_best = psi.evaluator ? pfx.mid() : psi(fx);
      const Real gx = g_at(px_best, side);
      Real hlo, hhi;
      if (px.width() == 0) {
        hlo = hhi = g_at(px.lo, side);
      } else {
        std::tie(hlo, hhi) = gr.hull(std::max(px.lo, gr.lo()), std::min(px.hi, gr.hi()));
      }
      const Real err = abs(pfx_best - gx);
      if (err > report.residual) {
        report.residual = err;
        report.worst = x;
      }
      report.lower = std::max({report.lower, Real(pfx.lo - hhi), Real(hlo - pfx.hi)});
      report.upper = std::max({report.upper, Real(pfx.hi - hlo), Real(hhi - pfx.lo)});
      report.resolution = std::max({report.resolution, px.width(), pfx.width()});
      ++report.samples;
    }
  }
  return report;
}

double PipelineTrace::log_gamma_gap() const {
  if (!(gamma > 0)) return std::numeric_limits<double>::infinity();
  return std::abs(log(gamma).convert_to<double>() - entropy_estimate);
}

namespace {

std::vector<Real> sample_psi(const PsiTable& psi, const std::vector<Rational>& xs) {
  std::vector<Real> out;
  out.reserve(xs.size());
  for (const Rational& x : xs) out.push_back(psi(x));
  return out;
}

}  // namespace

PipelineTrace normalize(const PwaMap& f, const NormalizeOptions& options) {
  if (!(options.target > 0)) throw PreconditionError("target must be positive");
  PipelineTrace trace;
  const EntropyReport h = entropy_lapcount(f, options.entropy_depth, IterationLimits{1u << 20});
  trace.entropy_estimate = h.trend;
  if (!h.positive()) throw PreconditionError("entropy not positive");
  const std::vector<Rational> grid = check_grid(f, options.grid);

  std::optional<MarkovStructure> exact;
  try {
    exact = markov_closure(f, options.closure_budget);
  } catch (const ConvergenceError& e) {
    trace.warnings.push_back(std::string("Perron solver failed on the closure: ") + e.what());
  }
  if (exact && exact->beta > 1) {
    auto s = std::make_shared<const MarkovStructure>(std::move(*exact));
    PsiTable psi = build_psi(s, options.target);
    trace.markov_exact = true;
    trace.converged = true;
    trace.indices.push_back(options.schedule.empty() ? 1 : options.schedule.front());
    trace.betas.push_back(s->beta);
    trace.point_counts.push_back(s->points.size());
    trace.cauchy_gaps.push_back(std::nullopt);
    trace.psis.push_back(psi);
    trace.g = build_constant_slope(*s, psi);
    trace.gamma = s->beta;
    trace.residuals.push_back(verify_semiconjugacy(f, trace.g->map, psi, options.grid).residual);
    trace.structure = std::move(s);
    trace.psi = std::move(psi);
    return trace;
  }
  if (f.has_constant_piece()) {
    throw PreconditionError("map has a constant lap; reduce it to a strictly monotone map first");
  }
  if (options.schedule.empty()) throw PreconditionError("empty schedule");

  std::optional<std::vector<Real>> previous;
  for (int i : options.schedule) {
    MarkovApprox a = markov_approx(f, i);
    auto s = std::make_shared<const MarkovStructure>(
        build_markov_structure(a.g, std::move(a.config.points)));
    trace.indices.push_back(i);
    trace.betas.push_back(s->beta);
    trace.point_counts.push_back(s->points.size());
    if (trace.betas.size() > 1 && trace.betas.back() < trace.betas[trace.betas.size() - 2]) {
      trace.betas_monotone = false;
    }
    if (!(s->beta > 1)) {
      trace.psis.emplace_back();
      trace.cauchy_gaps.push_back(std::nullopt);
      trace.residuals.push_back(Real(-1));
      previous.reset();
      continue;
    }
    PsiTable psi = build_psi(s, options.target);
    std::vector<Real> values = sample_psi(psi, grid);
    std::optional<Real> gap;
    if (previous) {
      Real d = 0;
      for (std::size_t k = 0; k < values.size(); ++k) d = std::max(d, Real(abs(values[k] - (*previous)[k])));
      gap = d;
    }
    trace.cauchy_gaps.push_back(gap);
    trace.psis.push_back(psi);
    previous = std::move(values);
    trace.g = build_constant_slope(*s, psi);
    trace.gamma = s->beta;
    trace.structure = s;
    trace.psi = psi;
    trace.residuals.push_back(verify_semiconjugacy(f, trace.g->map, psi, options.grid).residual);
    if (gap && *gap < options.target) {
      trace.converged = true;
      break;
    }
  }
  if (!trace.g) throw ConvergenceError("no approximation reached beta > 1");
  if (!trace.betas_monotone) trace.warnings.push_back("beta trace is not monotone");
  if (!trace.converged) trace.warnings.push_back("Cauchy criterion not met by the end of the schedule");
  return trace;
}

std::string trace_tsv(const PipelineTrace& trace) {
  std::ostringstream out;
  out << "i\tbeta_i\tcauchy_gap\tresidual\n";
  for (std::size_t k = 0; k < trace.indices.size(); ++k) {
    out << trace.indices[k] << '\t' << format_decimal(trace.betas[k]) << '\t'
        << (trace.cauchy_gaps[k] ? format_decimal(*trace.cauchy_gaps[k]) : "NA") << '\t'
        << (k < trace.residuals.size() && trace.residuals[k] >= 0 ? format_decimal(trace.residuals[k])
                                                                  : "NA")
        << '\n';
  }
  return out.str();
}

}  // namespace slopeforge
