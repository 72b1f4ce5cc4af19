#include "slopeforge/semiconjugacy.hpp"

#include "slopeforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace slopeforge {

namespace {

constexpr unsigned kExactOrbitBits = 512;

std::size_t bit_size(const Rational& x) {
  const Integer num = abs(numerator(x));
  const Integer den = denominator(x);
  return (num == 0 ? 0 : msb(num)) + msb(den);
}

std::vector<Real> prefix_sums(const std::vector<Real>& v) {
  std::vector<Real> s(v.size() + 1, Real(0));
  for (std::size_t i = 0; i < v.size(); ++i) s[i + 1] = s[i] + v[i];
  const Real total = s.back();
  for (auto& x : s) x /= total;
  s.back() = 1;
  return s;
}

// Nearest dyadic with (precision - 16) fractional bits; drops the rounding
// noise of the eigenvector so exact values such as 1/2 come out exact.
Rational snap_dyadic(const Real& x) {
  const int bits = static_cast<int>(precision_bits()) - 16;
  const Real scale = pow(Real(2), bits);
  return to_rational(Real(round(x * scale))) / to_rational(scale);
}

PsiEnclosure ordered(const Real& offset, const Real& scale, int sign, const Real& a,
                     const Real& b) {
  Real p = offset + sign * scale * a;
  Real q = offset + sign * scale * b;
  if (p > q) std::swap(p, q);
  return {p, q};
}

}  // namespace

PsiEvaluator::PsiEvaluator(std::shared_ptr<const MarkovStructure> s, double tolerance)
    : s_(std::move(s)), real_map_(s_->map) {
  if (!(s_->beta > 1)) throw PreconditionError("psi requires beta > 1");
  real_points_.reserve(s_->points.size());
  for (const auto& p : s_->points) real_points_.push_back(to_real(p));
  prefix_ = prefix_sums(s_->v);
  inv_beta_ = 1 / s_->beta;
  tolerance_ = Real(tolerance);
  snap_ = pow(Real(2), -static_cast<int>(precision_bits()) + 16);
}

PsiEnclosure PsiEvaluator::enclose(const Rational& x) const {
  const MarkovStructure& s = *s_;
  if (x < s.map.lo() || x > s.map.hi()) throw PreconditionError("psi argument outside domain");
  Real offset = 0;
  Real scale = 1;
  int sign = 1;
  Rational cur = x;
  for (std::size_t steps = 0;; ++steps) {
    if (auto k = find_point(s.points, cur)) {
      return ordered(offset, scale, sign, prefix_[*k], prefix_[*k]);
    }
    const std::size_t c = locate_cell(s.points, cur, Side::right);
    const CellImage& img = s.images[c];
    if (img.singleton() || scale * (prefix_[c + 1] - prefix_[c]) <= tolerance_) {
      return ordered(offset, scale, sign, prefix_[c], prefix_[c + 1]);
    }
    if (img.direction == Direction::increasing) {
      offset += sign * scale * (prefix_[c] - inv_beta_ * prefix_[img.first]);
    } else {
      offset += sign * scale * (prefix_[c] + inv_beta_ * prefix_[img.last + 1]);
      sign = -sign;
    }
    scale *= inv_beta_;
    cur = s.map.eval(cur, Side::right);
    if (bit_size(cur) > kExactOrbitBits) {
      return finish_real(to_real(cur), offset, scale, sign, steps + 1);
    }
  }
}

PsiEnclosure PsiEvaluator::enclose(const Real& x) const {
  return finish_real(x, Real(0), Real(1), 1, 0);
}

PsiEnclosure PsiEvaluator::finish_real(Real x, Real offset, Real scale, int sign,
                                       std::size_t steps) const {
  const MarkovStructure& s = *s_;
  if (x < real_points_.front() || x > real_points_.back()) {
    throw PreconditionError("psi argument outside domain");
  }
  // Orbit rounding grows by at most the slope per step while its weight
  // shrinks by 1/beta; the final margin covers the snap to P.
  const Real margin = snap_;
  for (;; ++steps) {
    auto it = std::upper_bound(real_points_.begin(), real_points_.end(), x);
    std::size_t c = it == real_points_.begin() ? 0 : static_cast<std::size_t>(it - real_points_.begin()) - 1;
    c = std::min(c, s.cells.size() - 1);
    for (std::size_t k : {c, c + 1}) {
      if (abs(x - real_points_[k]) <= snap_) {
        PsiEnclosure e = ordered(offset, scale, sign, prefix_[k], prefix_[k]);
        e.lo -= margin;
        e.hi += margin;
        return e;
      }
    }
    const CellImage& img = s.images[c];
    if (img.singleton() || scale * (prefix_[c + 1] - prefix_[c]) <= tolerance_) {
      PsiEnclosure e = ordered(offset, scale, sign, prefix_[c], prefix_[c + 1]);
      e.lo -= margin;
      e.hi += margin;
      return e;
    }
    if (img.direction == Direction::increasing) {
      offset += sign * scale * (prefix_[c] - inv_beta_ * prefix_[img.first]);
    } else {
      offset += sign * scale * (prefix_[c] + inv_beta_ * prefix_[img.last + 1]);
      sign = -sign;
    }
    scale *= inv_beta_;
    x = real_map_.eval(x, Side::right);
  }
}

PsiEnclosure PsiTable::enclose(const Rational& x) const {
  if (evaluator) return evaluator->enclose(x);
  if (x < xs.front() || x > xs.back()) throw PreconditionError("psi argument outside table");
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  if (*it == x) return {ys[i] - value_tolerance, ys[i] + value_tolerance};
  return {ys[i - 1] - value_tolerance, ys[i] + value_tolerance};
}

PsiEnclosure PsiTable::enclose(const Real& x) const {
  if (evaluator) return evaluator->enclose(x);
  return enclose(to_rational(x));
}

Real PsiTable::operator()(const Rational& x) const {
  if (evaluator) return evaluator->enclose(x).mid();
  if (x < xs.front() || x > xs.back()) throw PreconditionError("psi argument outside table");
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  if (*it == x) return ys[i];
  const Real t = to_real((x - xs[i - 1]) / (xs[i] - xs[i - 1]));
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

Real PsiTable::value(const Real& x) const {
  if (evaluator) return evaluator->enclose(x).mid();
  return (*this)(to_rational(x));
}

std::vector<Interval> detect_collapse(const std::vector<Rational>& xs, const std::vector<Real>& ys,
                                      double threshold) {
  std::vector<Interval> out;
  const Real thr(threshold);
  std::size_t i = 0;
  while (i + 1 < xs.size()) {
    if (ys[i + 1] - ys[i] > thr) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j + 1 < xs.size() && ys[j + 1] - ys[j] <= thr) ++j;
    out.push_back({xs[i], xs[j]});
    i = j;
  }
  return out;
}

PsiTable psi_on_points(const MarkovStructure& s, int depth, std::size_t max_points) {
  if (!(s.beta > 0)) throw PreconditionError("psi requires beta > 0");
  Refinement r = refine(s, depth, max_points);
  PsiTable t;
  t.depth = depth;
  t.table_depth = depth;
  t.beta = s.beta;
  const Real scale = pow(s.beta, -depth);
  t.ys.reserve(r.points.size());
  Real sum = 0;
  t.ys.push_back(Real(0));
  for (std::size_t i = 0; i < r.cell_count(); ++i) {
    if (r.image_index[i]) sum += s.v[*r.image_index[i]];
    t.ys.push_back(sum * scale);
  }
  t.ys.back() = 1;
  t.xs = std::move(r.points);
  const Real vmax = *std::max_element(s.v.begin(), s.v.end());
  t.error_bound = scale * vmax;
  t.collapse_intervals = detect_collapse(t.xs, t.ys);
  return t;
}

PsiTable build_psi(std::shared_ptr<const MarkovStructure> s, double target_err,
                   std::size_t max_points, double eval_tolerance) {
  if (!(s->beta > 1)) throw PreconditionError("psi requires beta > 1");
  if (!(target_err > 0)) throw PreconditionError("target error must be positive");
  const double log_beta = log(s->beta).convert_to<double>();
  const int depth = static_cast<int>(std::floor(std::log(1 / target_err) / log_beta)) + 1;

  Refinement r = refine(*s, 0);
  int materialized = 0;
  while (materialized < depth) {
    try {
      r = refine_step(*s, r, max_points);
    } catch (const BudgetExceeded&) {
      break;
    }
    ++materialized;
  }
  PsiTable t;
  t.depth = depth;
  t.table_depth = materialized;
  t.beta = s->beta;
  const Real scale = pow(s->beta, -materialized);
  t.ys.reserve(r.points.size());
  Real sum = 0;
  t.ys.push_back(Real(0));
  for (std::size_t i = 0; i < r.cell_count(); ++i) {
    if (r.image_index[i]) sum += s->v[*r.image_index[i]];
    t.ys.push_back(sum * scale);
  }
  t.ys.back() = 1;
  t.xs = std::move(r.points);
  const Real vmax = *std::max_element(s->v.begin(), s->v.end());
  t.error_bound = pow(s->beta, -depth) * vmax;
  t.collapse_intervals = detect_collapse(t.xs, t.ys);
  if (eval_tolerance <= 0) eval_tolerance = std::max(target_err * 1e-6, 1e-30);
  t.evaluator = std::make_shared<PsiEvaluator>(std::move(s), eval_tolerance);
  return t;
}

ConstantSlopeMap build_constant_slope(const MarkovStructure& s, const PsiTable& psi,
                                      double slope_tol) {
  if (!(s.beta > 1)) throw PreconditionError("constant-slope map requires beta > 1");
  const std::vector<Real> prefix =
      psi.evaluator ? psi.evaluator->prefix() : prefix_sums(s.v);
  const std::size_t n = s.points.size();
  const Real thr(kCollapseThreshold);

  // Points joined by collapsed cells share one node of g.
  std::vector<std::size_t> group_of(n);
  std::vector<std::size_t> group_first, group_last;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && prefix[i] - prefix[i - 1] <= thr) {
      group_last.back() = i;
    } else {
      group_first.push_back(i);
      group_last.push_back(i);
    }
    group_of[i] = group_first.size() - 1;
  }
  std::vector<Rational> z(group_first.size());
  for (std::size_t g = 0; g < z.size(); ++g) z[g] = snap_dyadic(prefix[group_first[g]]);
  z.front() = 0;
  z.back() = 1;
  auto value_at = [&](const Rational& y) { return z[group_of[*find_point(s.points, y)]]; };

  std::vector<Node> nodes;
  nodes.reserve(z.size());
  for (std::size_t g = 0; g < z.size(); ++g) {
    Node node{z[g], std::nullopt, std::nullopt};
    const Rational& first = s.points[group_first[g]];
    const Rational& last = s.points[group_last[g]];
    if (g > 0) node.y_left = value_at(s.map.eval(first, Side::left));
    if (g + 1 < z.size()) node.y_right = value_at(s.map.eval(last, Side::right));
    nodes.push_back(std::move(node));
  }
  ConstantSlopeMap out{simplify(PwaMap(std::move(nodes))), s.beta, "markov"};
  for (std::size_t i = 0; i < out.map.segment_count(); ++i) {
    const Segment seg = out.map.segment(i);
    if (seg.direction() == Direction::constant) continue;
    const Real slope = abs(to_real(seg.slope()));
    if (abs(slope - s.beta) > Real(slope_tol) * s.beta) {
      throw VerificationError("slope " + format_decimal(slope, 12) + " deviates from beta " +
                              format_decimal(s.beta, 12) + " on [" +
                              format_decimal(seg.x0, 8) + "," + format_decimal(seg.x1, 8) + "]");
    }
  }
  return out;
}

Eq4a1Report check_eq4a1(const PwaMap& f, const PsiTable& psi, const Real& beta,
                        std::size_t samples, std::uint64_t seed) {
  const auto lap_list = laps(f);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, lap_list.size() - 1);
  constexpr long kSteps = 1L << 20;
  std::uniform_int_distribution<long> step(0, kSteps);
  Eq4a1Report report{Real(0), Real(0), samples};
  auto value = [&](const Lap& lap, const Rational& x) {
    return f.eval(x, x == lap.interval.hi ? Side::left : Side::right);
  };
  for (std::size_t k = 0; k < samples; ++k) {
    const Lap& lap = lap_list[pick(rng)];
    const Rational len = lap.interval.length();
    const Rational x = lap.interval.lo + len * Rational(step(rng), kSteps);
    const Rational y = lap.interval.lo + len * Rational(step(rng), kSteps);
    const PsiEnclosure px = psi.enclose(x);
    const PsiEnclosure py = psi.enclose(y);
    const PsiEnclosure pfx = psi.enclose(value(lap, x));
    const PsiEnclosure pfy = psi.enclose(value(lap, y));
    const Real lhs = abs(pfy.mid() - pfx.mid());
    const Real rhs = beta * abs(py.mid() - px.mid());
    report.max_residual = std::max(report.max_residual, Real(abs(lhs - rhs)));
    report.tolerance = std::max(report.tolerance, Real(pfx.width() + pfy.width() +
                                                       beta * (px.width() + py.width())));
  }
  return report;
}

CompatibilityReport check_compatibility(const PwaMap& f, const PsiTable& psi, double threshold) {
  CompatibilityReport report;
  const Real thr(threshold);
  for (const Lap& lap : laps(f)) {
    const PsiEnclosure a = psi.enclose(lap.interval.lo);
    const PsiEnclosure b = psi.enclose(lap.interval.hi);
    if (b.hi - a.lo > thr) continue;
    Rational y0 = f.eval(lap.interval.lo, Side::right);
    Rational y1 = f.eval(lap.interval.hi, Side::left);
    if (y0 > y1) std::swap(y0, y1);
    const PsiEnclosure c = psi.enclose(y0);
    const PsiEnclosure d = psi.enclose(y1);
    if (d.lo - c.hi > thr) {
      report.ok = false;
      report.violations.push_back(lap);
    }
  }
  return report;
}

std::string psi_tsv(const PsiTable& psi, int digits) {
  std::ostringstream out;
  out << "x\tpsi\tx_exact\n";
  for (std::size_t i = 0; i < psi.xs.size(); ++i) {
    out << format_decimal(psi.xs[i], digits) << '\t' << format_decimal(psi.ys[i], digits) << '\t'
        << to_string(psi.xs[i]) << '\n';
  }
  return out.str();
}

PsiTable parse_psi_tsv(std::string_view text, int digits) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("x\tpsi", 0) != 0) {
    throw ParseError("psi table must start with header 'x<TAB>psi'");
  }
  PsiTable t;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, '\t')) fields.push_back(field);
    if (fields.size() < 2) throw ParseError("psi row " + std::to_string(row) + ": too few fields");
    t.xs.push_back(parse_rational(fields.size() >= 3 ? fields[2] : fields[0]));
    try {
      t.ys.emplace_back(fields[1]);
    } catch (const std::exception&) {
      throw ParseError("psi row " + std::to_string(row) + ": bad value '" + fields[1] + "'");
    }
    if (t.xs.size() > 1 && !(t.xs[t.xs.size() - 2] < t.xs.back())) {
      throw ParseError("psi row " + std::to_string(row) + ": x not increasing");
    }
    if (t.ys.size() > 1 && t.ys[t.ys.size() - 2] > t.ys.back()) {
      throw ParseError("psi row " + std::to_string(row) + ": psi decreasing");
    }
  }
  if (t.xs.size() < 2) throw ParseError("psi table needs at least 2 rows");
  t.value_tolerance = pow(Real(10), -digits);
  Real gap = 0;
  for (std::size_t i = 0; i + 1 < t.ys.size(); ++i) gap = std::max(gap, Real(t.ys[i + 1] - t.ys[i]));
  t.error_bound = gap;
  t.collapse_intervals = detect_collapse(t.xs, t.ys);
  return t;
}

std::map<std::string, std::size_t> slope_histogram(const PwaMap& g) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < g.segment_count(); ++i) {
    ++out[format_decimal(to_real(g.segment(i).slope()), 10)];
  }
  return out;
}

}  // namespace slopeforge
