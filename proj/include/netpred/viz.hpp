#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "netpred/mgm.hpp"
#include "netpred/mvar.hpp"
#include "netpred/predictability.hpp"

namespace netpred {

struct RingSegment {
  double fraction = 0.0;  // of the full circle
  std::string color;
};

struct VizEdge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
  int sign = 0;  // +1, -1, 0 = undefined
  bool directed = false;
  bool self_loop = false;
};

struct RenderedGraph {
  std::vector<Eigen::Vector2d> coordinates;  // unit square
  std::vector<VizEdge> edges;
  std::vector<std::vector<RingSegment>> rings;  // fractions sum to <= 1 per node
  std::vector<std::string> labels;
  std::vector<std::string> measure_texts;  // formatted predictability per node
  bool directed = false;
};

struct RingPalette {
  std::string explained_variance = "#90B4D4";  // blue ring, continuous nodes
  std::string marginal = "#ffa500";            // orange, intercept-model accuracy
  std::string additional = "#ff4300";          // red, accuracy beyond the marginal
};

struct RenderOptions {
  double width = 760.0;
  double height = 760.0;
  double node_radius = 18.0;
  double ring_width = 7.0;
  double stroke_scale = 6.0;  // edge stroke width = 0.75 + stroke_scale * |weight|
  std::string positive_color = "#009900";
  std::string negative_color = "#d40000";
  std::string undefined_color = "#9a9a9a";
  std::string ring_background = "#ededed";
  std::string metadata_comment;  // embedded as a leading XML comment
};

// Fruchterman-Reingold force-directed placement with a linear cooling
// schedule and seeded random starts, fitted into the unit square with a
// 10% margin. Directed inputs should pass max(|w_ij|, |w_ji|).
Eigen::MatrixX2d spring_layout(const Eigen::MatrixXd& wadj, int iterations,
                               std::uint64_t seed);

// Ring segments per node: continuous nodes get one explained-variance
// segment of fraction R^2 (clamped to [0,1]); categorical nodes get a
// marginal segment of fraction CCmarg followed by an additional-accuracy
// segment of fraction max(CC - CCmarg, 0). The remainder stays blank.
std::vector<std::vector<RingSegment>> build_rings(const PredictabilityReport& report,
                                                  const RingPalette& palette = {});

RenderedGraph make_rendered_graph(const PairwiseMGM& model,
                                  const PredictabilityReport& report, int iterations,
                                  std::uint64_t seed, const RingPalette& palette = {});
// Renders the first lag's directed network, self-loops included.
RenderedGraph make_rendered_graph(const VARModel& model, const PredictabilityReport& report,
                                  int iterations, std::uint64_t seed,
                                  const RingPalette& palette = {});

// SVG 1.1 document. Ring segments are circular arcs starting at 12 o'clock,
// clockwise, arc angle = 2*pi*fraction; positive edges green, negative red,
// undefined grey; stroke width linear in |weight|; directed edges carry
// arrowheads and self-loops render as small anchored circles.
std::string render_svg(const RenderedGraph& graph, const RenderOptions& options = {});

// DOT document: graph/digraph per model kind, predictability in the node
// label attribute, weight/sign edge attributes.
std::string export_dot(const RenderedGraph& graph,
                       const std::vector<std::string>& comment_lines = {});

}  // namespace netpred
