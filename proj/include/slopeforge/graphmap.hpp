#pragma once

// Piecewise monotone graph maps given by edge-path words, their flattening to
// interval maps, and the lift of the normal form back to a quotient graph.
//
// Text format:
//
//   graphmap 1
//   graph
//   vertex <id>                      (one line per vertex)
//   edge <id> <v_start> <v_end>      (chart position 0 at v_start, 1 at v_end)
//   action
//   path <edge> <signed edge word>   (e.g. "path e1 +e1 -e2")
//   node <u> <t>                     (optional chart nodes for the path above)
//
// The chart of a path of k letters is a continuous nondecreasing map from
// [0, 1] onto [0, k]; it defaults to t = k u. The point at parameter t lies on
// letter floor(t), at local position t - floor(t) along that letter.

#include "slopeforge/approximation.hpp"
#include "slopeforge/pwa_map.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace slopeforge {

struct GraphEdge {
  std::string id;
  std::size_t start = 0;  // vertex at chart position 0
  std::size_t end = 0;    // vertex at chart position 1
};

struct GraphSpec {
  std::vector<std::string> vertices;
  std::vector<GraphEdge> edges;

  std::size_t vertex_index(std::string_view id) const;
  std::size_t edge_index(std::string_view id) const;
};

struct SignedEdge {
  std::size_t edge = 0;
  bool forward = true;
  bool operator==(const SignedEdge&) const = default;
};

struct EdgeAction {
  std::vector<SignedEdge> word;
  PwaMap chart;  // [0, 1] -> [0, word.size()], continuous and nondecreasing
};

struct GraphMapSpec {
  GraphSpec graph;
  std::vector<EdgeAction> action;  // indexed like graph.edges
};

/// Checks connectivity, word continuity, well-defined vertex images and the
/// charts. Throws PreconditionError naming the first violation.
void validate(const GraphMapSpec& gm);

GraphMapSpec parse_graphmap(std::string_view text);
GraphMapSpec read_graphmap_file(const std::string& path);
std::string serialize_graphmap(const GraphMapSpec& gm);

struct GraphPoint {
  std::size_t edge = 0;
  Rational pos;  // in [0, 1] along the edge chart
};

struct ChartEntry {
  std::size_t edge = 0;
  bool forward = true;
  Interval cell;
};

struct FlatteningChart {
  std::vector<ChartEntry> ordering;  // edge j occupies [j/E, (j+1)/E]
  std::vector<Rational> cut_points;  // interior points where two edges abut

  Rational to_flat(const GraphPoint& p) const;
  /// At a cut point `side` picks the edge on that side.
  GraphPoint to_graph(const Rational& x, Side side = Side::right) const;
};

struct Flattening {
  PwaMap f;
  FlatteningChart chart;
};

/// Interval representation: on edge j's cell, f follows the edge-path word
/// through the chart. Jumps can appear only where the word passes a vertex.
Flattening flatten(const GraphMapSpec& gm);

/// Lap counts c_1..c_depth of the iterated edge-path words, merging adjacent
/// letters that continue monotonically in the flattened order. Requires
/// strictly increasing charts.
std::vector<std::size_t> word_lap_counts(const GraphMapSpec& gm, int depth);

/// Point of the quotient graph: a vertex class or an interior point of a
/// surviving edge.
struct QuotientPoint {
  bool is_vertex = false;
  std::size_t index = 0;  // vertex class or surviving edge
  Real pos;               // along the surviving edge, unused for vertices
};

struct ContinuityCheck {
  std::string vertex;  // original vertex id
  bool ok = false;
  std::vector<QuotientPoint> images;  // lifted g at each edge end meeting the vertex
};

bool same_point(const QuotientPoint& a, const QuotientPoint& b);

struct GraphNormalForm {
  GraphSpec graph;
  Flattening flat;
  PipelineTrace trace;
  std::vector<bool> contracted{};             // per original edge
  std::vector<std::size_t> vertex_class{};    // original vertex -> quotient vertex
  std::size_t quotient_vertices = 0;
  std::vector<std::size_t> quotient_edges{};  // surviving original edges in order
  std::vector<Real> psi_cells{};              // psi(j/E), j = 0..E
  std::vector<Interval> collapse_intervals{};  // flat coordinates
  std::vector<ContinuityCheck> continuity{};
  bool continuous = false;                    // all continuity checks passed
  std::vector<std::string> notes{};

  /// Lifted psi on an original graph point.
  QuotientPoint lift_psi(const GraphPoint& p) const;
  /// Quotient-graph point at flat coordinate y of g. Where two surviving edges
  /// abut, `from` says whether y is approached from below (left) or above.
  QuotientPoint locate(const Real& y, Side from = Side::right) const;
};

/// Flattens, normalizes and lifts psi and g to the quotient graph. Throws like
/// normalize.
GraphNormalForm normalize_graph(const GraphMapSpec& gm, const NormalizeOptions& options = {});

}  // namespace slopeforge
