#include "slopeforge/graphmap.hpp"

#include "slopeforge/error.hpp"
#include "slopeforge/pwa_io.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace slopeforge {

namespace {

constexpr std::size_t kMaxWordLetters = 10'000'000;

std::size_t letter_start(const GraphSpec& g, const SignedEdge& s) {
  return s.forward ? g.edges[s.edge].start : g.edges[s.edge].end;
}

std::size_t letter_end(const GraphSpec& g, const SignedEdge& s) {
  return s.forward ? g.edges[s.edge].end : g.edges[s.edge].start;
}

PwaMap linear_chart(std::size_t k) {
  return PwaMap::continuous({Rational(0), Rational(1)}, {Rational(0), Rational(k)},
                            MapKind::function);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

std::size_t GraphSpec::vertex_index(std::string_view id) const {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i] == id) return i;
  }
  throw PreconditionError("unknown vertex " + std::string(id));
}

std::size_t GraphSpec::edge_index(std::string_view id) const {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].id == id) return i;
  }
  throw PreconditionError("unknown edge " + std::string(id));
}

void validate(const GraphMapSpec& gm) {
  const GraphSpec& g = gm.graph;
  if (g.edges.empty()) throw PreconditionError("graph has no edges");
  if (gm.action.size() != g.edges.size()) throw PreconditionError("every edge needs a path");
  UnionFind uf(g.vertices.size());
  std::size_t components = g.vertices.size();
  for (const GraphEdge& e : g.edges) {
    if (e.start >= g.vertices.size() || e.end >= g.vertices.size()) {
      throw PreconditionError("edge " + e.id + " has an unknown vertex");
    }
    if (uf.unite(e.start, e.end)) --components;
  }
  if (components != 1) throw PreconditionError("graph is not connected");

  std::vector<std::optional<std::size_t>> image(g.vertices.size());
  auto assign = [&](std::size_t v, std::size_t w) {
    if (image[v] && *image[v] != w) {
      throw PreconditionError("edge-path word inconsistent with endpoint vertices");
    }
    image[v] = w;
  };
  for (std::size_t j = 0; j < g.edges.size(); ++j) {
    const EdgeAction& a = gm.action[j];
    if (a.word.empty()) throw PreconditionError("empty path for edge " + g.edges[j].id);
    for (std::size_t i = 0; i < a.word.size(); ++i) {
      if (a.word[i].edge >= g.edges.size()) throw PreconditionError("path uses an unknown edge");
      if (i > 0 && letter_end(g, a.word[i - 1]) != letter_start(g, a.word[i])) {
        throw PreconditionError("path of edge " + g.edges[j].id + " is not connected");
      }
    }
    assign(g.edges[j].start, letter_start(g, a.word.front()));
    assign(g.edges[j].end, letter_end(g, a.word.back()));

    const PwaMap& h = a.chart;
    if (h.domain() != Interval{Rational(0), Rational(1)} || !h.is_continuous() || h(Rational(0)) != 0 ||
        h.eval(Rational(1), Side::left) != Rational(a.word.size())) {
      throw PreconditionError("chart of edge " + g.edges[j].id + " must map [0,1] onto [0," +
                              std::to_string(a.word.size()) + "] continuously");
    }
    for (std::size_t i = 0; i < h.segment_count(); ++i) {
      if (h.segment(i).direction() == Direction::decreasing) {
        throw PreconditionError("chart of edge " + g.edges[j].id + " is not nondecreasing");
      }
    }
  }
}

GraphMapSpec parse_graphmap(std::string_view text) {
  GraphMapSpec gm;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  enum class Section { header, preamble, graph, action } section = Section::header;
  std::vector<std::optional<EdgeAction>> actions;
  std::vector<std::pair<std::vector<Rational>, std::vector<Rational>>> charts;
  std::optional<std::size_t> current;

  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (section == Section::header) {
      if (tok != std::vector<std::string>{"graphmap", "1"}) throw fail("expected 'graphmap 1'");
      section = Section::preamble;
    } else if (section == Section::preamble) {
      if (tok != std::vector<std::string>{"graph"}) throw fail("expected 'graph'");
      section = Section::graph;
    } else if (section == Section::graph && tok[0] == "vertex" && tok.size() == 2) {
      if (std::find(gm.graph.vertices.begin(), gm.graph.vertices.end(), tok[1]) != gm.graph.vertices.end()) {
        throw fail("duplicate vertex " + tok[1]);
      }
      gm.graph.vertices.push_back(tok[1]);
    } else if (section == Section::graph && tok[0] == "edge" && tok.size() == 4) {
      for (const GraphEdge& e : gm.graph.edges) {
        if (e.id == tok[1]) throw fail("duplicate edge " + tok[1]);
      }
      try {
        gm.graph.edges.push_back({tok[1], gm.graph.vertex_index(tok[2]), gm.graph.vertex_index(tok[3])});
      } catch (const PreconditionError& e) {
        throw fail(e.what());
      }
    } else if (section == Section::graph && tok == std::vector<std::string>{"action"}) {
      section = Section::action;
      actions.resize(gm.graph.edges.size());
      charts.resize(gm.graph.edges.size());
    } else if (section == Section::action && tok[0] == "path" && tok.size() >= 3) {
      std::size_t j = 0;
      EdgeAction a{{}, linear_chart(1)};
      try {
        j = gm.graph.edge_index(tok[1]);
        for (std::size_t i = 2; i < tok.size(); ++i) {
          if (tok[i].size() < 2 || (tok[i][0] != '+' && tok[i][0] != '-')) {
            throw fail("letters must be +<edge> or -<edge>");
          }
          a.word.push_back({gm.graph.edge_index(tok[i].substr(1)), tok[i][0] == '+'});
        }
      } catch (const PreconditionError& e) {
        throw fail(e.what());
      }
      if (actions[j]) throw fail("second path for edge " + tok[1]);
      actions[j] = std::move(a);
      current = j;
    } else if (section == Section::action && tok[0] == "node" && tok.size() == 3) {
      if (!current) throw fail("chart node before any path");
      charts[*current].first.push_back(parse_rational(tok[1]));
      charts[*current].second.push_back(parse_rational(tok[2]));
    } else {
      throw fail("unexpected '" + tok[0] + "'");
    }
  }
  if (section != Section::action) throw ParseError("missing action section");
  for (std::size_t j = 0; j < actions.size(); ++j) {
    if (!actions[j]) throw ParseError("no path for edge " + gm.graph.edges[j].id);
    EdgeAction a = std::move(*actions[j]);
    try {
      a.chart = charts[j].first.empty() ? linear_chart(a.word.size())
                                        : PwaMap::continuous(charts[j].first, charts[j].second,
                                                             MapKind::function);
    } catch (const Error& e) {
      throw ParseError("chart of edge " + gm.graph.edges[j].id + ": " + e.what());
    }
    gm.action.push_back(std::move(a));
  }
  validate(gm);
  return gm;
}

GraphMapSpec read_graphmap_file(const std::string& path) { return parse_graphmap(read_text_file(path)); }

std::string serialize_graphmap(const GraphMapSpec& gm) {
  std::ostringstream out;
  out << "graphmap 1\ngraph\n";
  for (const std::string& v : gm.graph.vertices) out << "vertex " << v << '\n';
  for (const GraphEdge& e : gm.graph.edges) {
    out << "edge " << e.id << ' ' << gm.graph.vertices[e.start] << ' ' << gm.graph.vertices[e.end] << '\n';
  }
  out << "action\n";
  for (std::size_t j = 0; j < gm.action.size(); ++j) {
    const EdgeAction& a = gm.action[j];
    out << "path " << gm.graph.edges[j].id;
    for (const SignedEdge& s : a.word) out << ' ' << (s.forward ? '+' : '-') << gm.graph.edges[s.edge].id;
    out << '\n';
    if (a.chart == linear_chart(a.word.size())) continue;
    for (const Node& n : a.chart.nodes()) {
      out << "node " << to_string(n.x) << ' ' << to_string(n.y_right ? *n.y_right : *n.y_left) << '\n';
    }
  }
  return out.str();
}

Rational FlatteningChart::to_flat(const GraphPoint& p) const {
  const ChartEntry& c = ordering.at(p.edge);
  return c.cell.lo + (c.forward ? p.pos : 1 - p.pos) * c.cell.length();
}

GraphPoint FlatteningChart::to_graph(const Rational& x, Side side) const {
  auto it = std::find_if(ordering.begin(), ordering.end(), [&](const ChartEntry& c) {
    return c.cell.contains(x) && (side == Side::left ? x != c.cell.lo || c.cell.lo == 0
                                                     : x != c.cell.hi || c.cell.hi == 1);
  });
  if (it == ordering.end()) throw PreconditionError("point " + to_string(x) + " outside [0,1]");
  const Rational u = (x - it->cell.lo) / it->cell.length();
  return {it->edge, it->forward ? u : 1 - u};
}

Flattening flatten(const GraphMapSpec& gm) {
  validate(gm);
  const std::size_t n_edges = gm.graph.edges.size();
  const Rational width(1, static_cast<long>(n_edges));
  Flattening out{linear_chart(1), {}};
  for (std::size_t j = 0; j < n_edges; ++j) {
    out.chart.ordering.push_back({j, true, {width * static_cast<long>(j), width * static_cast<long>(j + 1)}});
    if (j > 0) out.chart.cut_points.push_back(width * static_cast<long>(j));
  }

  struct Piece {
    Rational x0, x1, y0, y1;
  };
  std::vector<Piece> pieces;
  for (std::size_t j = 0; j < n_edges; ++j) {
    const EdgeAction& a = gm.action[j];
    const PwaMap& h = a.chart;
    const long k = static_cast<long>(a.word.size());
    // Split the chart where it crosses an integer so each piece stays on one letter.
    std::vector<Rational> us;
    for (std::size_t i = 0; i < h.segment_count(); ++i) {
      const Segment s = h.segment(i);
      us.push_back(s.x0);
      if (s.direction() != Direction::increasing) continue;
      for (Integer m = numerator(s.y0) / denominator(s.y0) + 1; Rational(m) < s.y1; ++m) {
        if (Rational(m) > s.y0) us.push_back(s.preimage(Rational(m)));
      }
    }
    us.push_back(h.hi());
    auto flat_value = [&](long letter, const Rational& t) {
      const SignedEdge& s = a.word[static_cast<std::size_t>(letter)];
      const Rational local = t - letter;
      return (Rational(static_cast<long>(s.edge)) + (s.forward ? local : 1 - local)) * width;
    };
    for (std::size_t i = 0; i + 1 < us.size(); ++i) {
      const Rational t0 = h(us[i]);
      const Rational t1 = h.eval(us[i + 1], Side::left);
      const Rational mid = (t0 + t1) / 2;
      long letter = static_cast<long>((numerator(mid) / denominator(mid)).convert_to<long long>());
      if (t0 != t1 && Rational(letter) == mid) --letter;
      letter = std::clamp(letter, 0L, k - 1);
      const Rational base = width * static_cast<long>(j);
      pieces.push_back({base + us[i] * width, base + us[i + 1] * width, flat_value(letter, t0),
                        flat_value(letter, t1)});
    }
  }

  std::vector<Node> nodes;
  nodes.push_back({pieces.front().x0, std::nullopt, pieces.front().y0});
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    nodes.push_back({pieces[i].x1, pieces[i].y1, pieces[i + 1].y0});
  }
  nodes.push_back({pieces.back().x1, pieces.back().y1, std::nullopt});
  out.f = simplify(PwaMap(std::move(nodes)));
  return out;
}

std::vector<std::size_t> word_lap_counts(const GraphMapSpec& gm, int depth) {
  validate(gm);
  for (const EdgeAction& a : gm.action) {
    if (a.chart.has_constant_piece()) throw PreconditionError("word lap counts need strictly increasing charts");
  }
  auto continues = [](const SignedEdge& a, const SignedEdge& b) {
    if (a.forward != b.forward) return false;
    return a.forward ? b.edge == a.edge + 1 : b.edge + 1 == a.edge;
  };
  std::vector<std::vector<SignedEdge>> words;
  for (const EdgeAction& a : gm.action) words.push_back(a.word);
  std::vector<std::size_t> counts;
  for (int n = 1; n <= depth; ++n) {
    if (n > 1) {
      std::size_t total = 0;
      for (auto& w : words) {
        std::vector<SignedEdge> next;
        for (const SignedEdge& s : w) {
          const auto& img = gm.action[s.edge].word;
          total += img.size();
          if (total > kMaxWordLetters) throw BudgetExceeded("iterated words exceed the letter budget");
          if (s.forward) {
            next.insert(next.end(), img.begin(), img.end());
          } else {
            for (auto it = img.rbegin(); it != img.rend(); ++it) next.push_back({it->edge, !it->forward});
          }
        }
        w = std::move(next);
      }
    }
    std::size_t laps_n = 0;
    const SignedEdge* prev = nullptr;
    for (const auto& w : words) {
      for (const SignedEdge& s : w) {
        if (!prev || !continues(*prev, s)) ++laps_n;
        prev = &s;
      }
    }
    counts.push_back(laps_n);
  }
  return counts;
}

namespace {

constexpr double kLiftTolerance = 1e-9;

// One-sided g at a Real argument; arguments within rounding of a node of g
// are evaluated exactly at that node so the side is honored.
std::pair<Real, Direction> g_side(const PwaMap& g, const Real& y, Side side) {
  const auto& nodes = g.nodes();
  auto it = std::lower_bound(nodes.begin(), nodes.end(), y,
                             [](const Node& n, const Real& v) { return Real(n.x) < v; });
  for (auto cand : {it, it == nodes.begin() ? it : std::prev(it)}) {
    if (cand != nodes.end() && abs(Real(cand->x) - y) < Real("1e-20")) {
      const Rational x = cand->x;
      const Side s = x == g.lo() ? Side::right : x == g.hi() ? Side::left : side;
      return {Real(g.eval(x, s)), g.segment(g.segment_index(x, s)).direction()};
    }
  }
  return {g.eval(y, side), g.segment(g.segment_index(Rational(y), side)).direction()};
}

}  // namespace

bool same_point(const QuotientPoint& a, const QuotientPoint& b) {
  if (a.is_vertex != b.is_vertex || a.index != b.index) return false;
  return a.is_vertex || abs(a.pos - b.pos) < Real(kLiftTolerance);
}

QuotientPoint GraphNormalForm::locate(const Real& y, Side from) const {
  const Real tol(kLiftTolerance);
  std::optional<QuotientPoint> at_end;
  for (std::size_t q = 0; q < quotient_edges.size(); ++q) {
    const std::size_t j = quotient_edges[q];
    const Real& lo = psi_cells[j];
    const Real& hi = psi_cells[j + 1];
    if (y > lo + tol && y < hi - tol) return {false, q, (y - lo) / (hi - lo)};
    // Approached from below, y is the right end of the cell below it.
    if (abs(y - hi) <= tol && (from == Side::left || !at_end)) {
      at_end = QuotientPoint{true, vertex_class[graph.edges[j].end], Real(0)};
    }
    if (abs(y - lo) <= tol && (from == Side::right || !at_end)) {
      at_end = QuotientPoint{true, vertex_class[graph.edges[j].start], Real(0)};
    }
  }
  if (!at_end) throw VerificationError("lifted value outside the quotient graph");
  return *at_end;
}

QuotientPoint GraphNormalForm::lift_psi(const GraphPoint& p) const {
  const GraphEdge& e = graph.edges.at(p.edge);
  if (contracted[p.edge] || p.pos == 0) return {true, vertex_class[e.start], Real(0)};
  if (p.pos == 1) return {true, vertex_class[e.end], Real(0)};
  const Real y = trace.psi(flat.chart.to_flat(p));
  const Real& lo = psi_cells[p.edge];
  const Real& hi = psi_cells[p.edge + 1];
  const Real u = (y - lo) / (hi - lo);
  if (u <= Real(kLiftTolerance)) return {true, vertex_class[e.start], Real(0)};
  if (u >= 1 - Real(kLiftTolerance)) return {true, vertex_class[e.end], Real(0)};
  const auto q = std::find(quotient_edges.begin(), quotient_edges.end(), p.edge) - quotient_edges.begin();
  return {false, static_cast<std::size_t>(q), u};
}

GraphNormalForm normalize_graph(const GraphMapSpec& gm, const NormalizeOptions& options) {
  Flattening flat = flatten(gm);
  PipelineTrace trace = normalize(flat.f, options);
  GraphNormalForm out{gm.graph, std::move(flat), std::move(trace)};
  const std::size_t n_edges = gm.graph.edges.size();
  const PsiTable& psi = out.trace.psi;
  out.collapse_intervals = psi.collapse_intervals;
  for (std::size_t j = 0; j <= n_edges; ++j) {
    out.psi_cells.push_back(j == 0 ? psi(psi.lo()) : j == n_edges ? psi(psi.hi())
                                                   : psi(out.flat.chart.ordering[j].cell.lo));
  }

  UnionFind uf(gm.graph.vertices.size());
  for (std::size_t j = 0; j < n_edges; ++j) {
    const Interval& cell = out.flat.chart.ordering[j].cell;
    const bool inside = std::any_of(out.collapse_intervals.begin(), out.collapse_intervals.end(),
                                    [&](const Interval& c) { return c.contains(cell); });
    out.contracted.push_back(inside || out.psi_cells[j + 1] - out.psi_cells[j] < Real("1e-12"));
    if (out.contracted.back()) {
      uf.unite(gm.graph.edges[j].start, gm.graph.edges[j].end);
      out.notes.push_back("edge " + gm.graph.edges[j].id + " contracted to a point");
    } else {
      out.quotient_edges.push_back(j);
    }
  }
  for (const Interval& c : out.collapse_intervals) {
    for (std::size_t j = 1; j < n_edges; ++j) {
      const Rational& cut = out.flat.chart.ordering[j].cell.lo;
      if (!(c.lo < cut && cut < c.hi)) continue;
      const std::size_t a = gm.graph.edges[j - 1].end;
      const std::size_t b = gm.graph.edges[j].start;
      if (a != b && uf.unite(a, b)) {
        out.notes.push_back("collapse across the cut at " + to_string(cut) + " identifies vertices " +
                            gm.graph.vertices[a] + " and " + gm.graph.vertices[b]);
      }
    }
  }
  std::vector<std::size_t> label(gm.graph.vertices.size(), SIZE_MAX);
  for (std::size_t v = 0; v < gm.graph.vertices.size(); ++v) {
    std::size_t& l = label[uf.find(v)];
    if (l == SIZE_MAX) l = out.quotient_vertices++;
    out.vertex_class.push_back(l);
  }

  // Lifted g at every edge end meeting a vertex must be one quotient point.
  const PwaMap& g = out.trace.g->map;
  out.continuous = true;
  for (std::size_t v = 0; v < gm.graph.vertices.size(); ++v) {
    ContinuityCheck check{gm.graph.vertices[v], true, {}};
    for (std::size_t j = 0; j < n_edges; ++j) {
      for (const bool at_start : {true, false}) {
        if ((at_start ? gm.graph.edges[j].start : gm.graph.edges[j].end) != v) continue;
        const Side side = at_start ? Side::right : Side::left;
        const auto [y, dir] = g_side(g, out.psi_cells[at_start ? j : j + 1], side);
        const bool increasing = dir == Direction::increasing;
        const Side from = (side == Side::left) == increasing ? Side::left : Side::right;
        check.images.push_back(out.locate(y, from));
      }
    }
    for (const QuotientPoint& p : check.images) check.ok = check.ok && same_point(p, check.images.front());
    out.continuous = out.continuous && check.ok;
    out.continuity.push_back(std::move(check));
  }
  return out;
}

}  // namespace slopeforge
