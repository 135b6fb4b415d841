#include "netpred/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "netpred/errors.hpp"
#include "netpred/rng.hpp"

namespace netpred {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

Eigen::MatrixX2d spring_layout(const Eigen::MatrixXd& wadj, int iterations,
                               std::uint64_t seed) {
  const int p = static_cast<int>(wadj.rows());
  if (wadj.cols() != p) throw DataError("weight matrix must be square");
  Eigen::MatrixX2d pos(p, 2);
  if (p == 0) return pos;
  if (p == 1) {
    pos(0, 0) = 0.5;
    pos(0, 1) = 0.5;
    return pos;
  }

  const double max_w = wadj.cwiseAbs().maxCoeff();
  Rng rng(seed);
  for (int v = 0; v < p; ++v) {
    pos(v, 0) = rng.uniform();
    pos(v, 1) = rng.uniform();
  }

  const double k = 0.75 * std::sqrt(1.0 / p);
  Eigen::MatrixX2d disp(p, 2);
  for (int it = 0; it < iterations; ++it) {
    disp.setZero();
    for (int v = 0; v < p; ++v) {
      for (int u = v + 1; u < p; ++u) {
        Eigen::Vector2d delta = pos.row(v) - pos.row(u);
        double dist = delta.norm();
        if (dist < 1e-9) {
          delta = Eigen::Vector2d(1e-9 * (v - u), 1e-9);
          dist = delta.norm();
        }
        const Eigen::Vector2d dir = delta / dist;
        // repulsion between every pair
        const Eigen::Vector2d rep = dir * (k * k / dist);
        disp.row(v) += rep;
        disp.row(u) -= rep;
        // attraction along weighted edges
        const double w = max_w > 0 ? std::abs(wadj(v, u)) / max_w : 0.0;
        if (w > 0) {
          const Eigen::Vector2d att = dir * (dist * dist / k) * w;
          disp.row(v) -= att;
          disp.row(u) += att;
        }
      }
    }
    const double temperature = 0.1 * (1.0 - static_cast<double>(it) / iterations);
    for (int v = 0; v < p; ++v) {
      const double norm = disp.row(v).norm();
      if (norm > 0) pos.row(v) += disp.row(v) / norm * std::min(norm, temperature);
    }
  }

  // Center in the unit square; shrink (never inflate) to keep a 10% margin.
  const Eigen::Vector2d lo(pos.col(0).minCoeff(), pos.col(1).minCoeff());
  const Eigen::Vector2d hi(pos.col(0).maxCoeff(), pos.col(1).maxCoeff());
  const Eigen::Vector2d center = 0.5 * (lo + hi);
  const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double scale = extent > 0.8 ? 0.8 / extent : 1.0;
  for (int v = 0; v < p; ++v) {
    pos(v, 0) = 0.5 + (pos(v, 0) - center.x()) * scale;
    pos(v, 1) = 0.5 + (pos(v, 1) - center.y()) * scale;
  }
  return pos;
}

std::vector<std::vector<RingSegment>> build_rings(const PredictabilityReport& report,
                                                  const RingPalette& palette) {
  std::vector<std::vector<RingSegment>> rings;
  rings.reserve(report.nodes.size());
  for (const NodeMeasures& m : report.nodes) {
    std::vector<RingSegment> segments;
    if (m.kind == VarKind::continuous) {
      const double r2 = std::isfinite(m.r2) ? m.r2 : 0.0;
      segments.push_back({std::clamp(r2, 0.0, 1.0), palette.explained_variance});
    } else {
      const double marg = std::clamp(m.ccmarg, 0.0, 1.0);
      segments.push_back({marg, palette.marginal});
      segments.push_back({std::clamp(m.cc - m.ccmarg, 0.0, 1.0 - marg), palette.additional});
    }
    rings.push_back(std::move(segments));
  }
  return rings;
}

namespace {

std::string measure_text(const NodeMeasures& m) {
  if (m.kind == VarKind::continuous) return "R2=" + fmt(m.r2);
  return "CC=" + fmt(m.cc) + " nCC=" + fmt(m.ncc) + " CCmarg=" + fmt(m.ccmarg);
}

RenderedGraph base_graph(const std::vector<VariableSpec>& spec,
                         const PredictabilityReport& report, const Eigen::MatrixXd& layout_w,
                         int iterations, std::uint64_t seed, const RingPalette& palette) {
  if (report.nodes.size() != spec.size())
    throw DataError("report does not cover every node");
  RenderedGraph g;
  const Eigen::MatrixX2d pos = spring_layout(layout_w, iterations, seed);
  g.coordinates.reserve(spec.size());
  for (int v = 0; v < pos.rows(); ++v) g.coordinates.emplace_back(pos(v, 0), pos(v, 1));
  g.rings = build_rings(report, palette);
  for (const auto& v : spec) g.labels.push_back(v.name);
  for (const auto& m : report.nodes) g.measure_texts.push_back(measure_text(m));
  return g;
}

}  // namespace

RenderedGraph make_rendered_graph(const PairwiseMGM& model,
                                  const PredictabilityReport& report, int iterations,
                                  std::uint64_t seed, const RingPalette& palette) {
  RenderedGraph g = base_graph(model.spec, report, model.wadj, iterations, seed, palette);
  g.directed = false;
  const int p = static_cast<int>(model.spec.size());
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (model.wadj(i, j) > 0)
        g.edges.push_back({i, j, model.wadj(i, j), model.signs(i, j), false, false});
  return g;
}

RenderedGraph make_rendered_graph(const VARModel& model, const PredictabilityReport& report,
                                  int iterations, std::uint64_t seed,
                                  const RingPalette& palette) {
  if (model.coefficients.empty()) throw DataError("VAR model has no coefficient array");
  const Eigen::MatrixXd& B = model.coefficients.front();
  const int p = static_cast<int>(model.spec.size());
  Eigen::MatrixXd layout_w = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j) {
        const double w = std::max(std::abs(B(i, j)), std::abs(B(j, i)));
        layout_w(i, j) = layout_w(j, i) = w;
      }
  RenderedGraph g = base_graph(model.spec, report, layout_w, iterations, seed, palette);
  g.directed = true;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (B(i, j) == 0.0) continue;
      const bool both_continuous = model.spec[static_cast<std::size_t>(i)].kind == VarKind::continuous &&
                                   model.spec[static_cast<std::size_t>(j)].kind == VarKind::continuous;
      const int sign = both_continuous ? (B(i, j) > 0 ? 1 : -1) : 0;
      // effect of j at t-1 on i at t: arrow j -> i
      g.edges.push_back({j, i, std::abs(B(i, j)), sign, true, i == j});
    }
  }
  return g;
}

std::string render_svg(const RenderedGraph& graph, const RenderOptions& options) {
  const double W = options.width;
  const double H = options.height;
  const double pad = options.node_radius + options.ring_width + 14.0;
  const auto sx = [&](double x) { return pad + x * (W - 2 * pad); };
  const auto sy = [&](double y) { return pad + (1.0 - y) * (H - 2 * pad); };
  const auto edge_color = [&](int sign) {
    return sign > 0 ? options.positive_color
                    : (sign < 0 ? options.negative_color : options.undefined_color);
  };
  const auto stroke_width = [&](double w) { return 0.75 + options.stroke_scale * w; };
  // Point on the ring circle at clockwise angle theta from 12 o'clock.
  const auto arc_point = [&](double cx, double cy, double r, double theta) {
    return std::pair<double, double>(cx + r * std::sin(theta), cy - r * std::cos(theta));
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!options.metadata_comment.empty()) {
    std::string c = options.metadata_comment;
    std::size_t at;
    while ((at = c.find("--")) != std::string::npos) c.replace(at, 2, "- ");
    svg << "<!-- " << c << " -->\n";
  }
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(W, 0)
      << "\" height=\"" << fmt(H, 0) << "\" viewBox=\"0 0 " << fmt(W, 0) << " " << fmt(H, 0)
      << "\">\n";
  svg << "<rect width=\"" << fmt(W, 0) << "\" height=\"" << fmt(H, 0)
      << "\" fill=\"#ffffff\"/>\n";

  const double r_contact = options.node_radius + options.ring_width + 2.0;
  for (const VizEdge& e : graph.edges) {
    if (e.self_loop) continue;  // drawn in the second pass
    const std::string color = edge_color(e.sign);
    const double width = stroke_width(e.weight);
    const double x1 = sx(graph.coordinates[static_cast<std::size_t>(e.from)].x());
    const double y1 = sy(graph.coordinates[static_cast<std::size_t>(e.from)].y());
    const double x2 = sx(graph.coordinates[static_cast<std::size_t>(e.to)].x());
    const double y2 = sy(graph.coordinates[static_cast<std::size_t>(e.to)].y());
    const double dx = x2 - x1, dy = y2 - y1;
    const double dist = std::hypot(dx, dy);
    if (dist < 1e-9) continue;
    const double ux = dx / dist, uy = dy / dist;
    const double ax = x1 + ux * r_contact, ay = y1 + uy * r_contact;
    double bx = x2 - ux * r_contact, by = y2 - uy * r_contact;
    if (e.directed) {
      const double arrow = 5.0 + 2.0 * width;
      const double tipx = bx, tipy = by;
      bx -= ux * arrow;
      by -= uy * arrow;
      const double nx = -uy, ny = ux;
      const double half = arrow * 0.45;
      svg << "<polygon points=\"" << fmt(tipx) << "," << fmt(tipy) << " "
          << fmt(bx + nx * half) << "," << fmt(by + ny * half) << " "
          << fmt(bx - nx * half) << "," << fmt(by - ny * half) << "\" fill=\"" << color
          << "\"/>\n";
    }
    svg << "<line x1=\"" << fmt(ax) << "\" y1=\"" << fmt(ay) << "\" x2=\"" << fmt(bx)
        << "\" y2=\"" << fmt(by) << "\" stroke=\"" << color << "\" stroke-width=\""
        << fmt(width) << "\"/>\n";
  }

  // self-loops drawn over the lines, anchored above each node
  for (const VizEdge& e : graph.edges) {
    if (!e.self_loop) continue;
    const double cx = sx(graph.coordinates[static_cast<std::size_t>(e.from)].x());
    const double cy = sy(graph.coordinates[static_cast<std::size_t>(e.from)].y());
    const double lr = options.node_radius * 0.45;
    svg << "<circle class=\"selfloop\" cx=\"" << fmt(cx) << "\" cy=\""
        << fmt(cy - r_contact - lr + 1.0) << "\" r=\"" << fmt(lr) << "\" fill=\"none\" stroke=\""
        << edge_color(e.sign) << "\" stroke-width=\"" << fmt(stroke_width(e.weight))
        << "\"/>\n";
  }

  const double r_ring = options.node_radius + options.ring_width / 2.0 + 1.0;
  for (std::size_t v = 0; v < graph.coordinates.size(); ++v) {
    const double cx = sx(graph.coordinates[v].x());
    const double cy = sy(graph.coordinates[v].y());
    svg << "<g class=\"node\">\n";
    svg << "  <circle class=\"ringbg\" cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
        << "\" r=\"" << fmt(r_ring) << "\" fill=\"none\" stroke=\"" << options.ring_background
        << "\" stroke-width=\"" << fmt(options.ring_width) << "\"/>\n";
    double theta = 0.0;
    if (v < graph.rings.size()) {
      for (const RingSegment& seg : graph.rings[v]) {
        const double sweep = 2.0 * kPi * std::clamp(seg.fraction, 0.0, 1.0);
        if (sweep <= 0.0) continue;
        if (sweep >= 2.0 * kPi - 1e-9) {
          svg << "  <circle class=\"ringseg\" cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
              << "\" r=\"" << fmt(r_ring) << "\" fill=\"none\" stroke=\"" << seg.color
              << "\" stroke-width=\"" << fmt(options.ring_width) << "\"/>\n";
          theta += sweep;
          continue;
        }
        const auto [x0, y0] = arc_point(cx, cy, r_ring, theta);
        const auto [x1, y1] = arc_point(cx, cy, r_ring, theta + sweep);
        const int large_arc = sweep > kPi ? 1 : 0;
        svg << "  <path class=\"ringseg\" d=\"M " << fmt(x0, 6) << " " << fmt(y0, 6) << " A "
            << fmt(r_ring, 6) << " " << fmt(r_ring, 6) << " 0 " << large_arc << " 1 "
            << fmt(x1, 6) << " " << fmt(y1, 6) << "\" fill=\"none\" stroke=\"" << seg.color
            << "\" stroke-width=\"" << fmt(options.ring_width) << "\"/>\n";
        theta += sweep;
      }
    }
    svg << "  <circle class=\"body\" cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\""
        << fmt(options.node_radius) << "\" fill=\"#ffffff\" stroke=\"#333333\" "
           "stroke-width=\"1\"/>\n";
    if (v < graph.labels.size()) {
      svg << "  <title>" << xml_escape(v < graph.measure_texts.size()
                                           ? graph.labels[v] + ": " + graph.measure_texts[v]
                                           : graph.labels[v])
          << "</title>\n";
      svg << "  <text x=\"" << fmt(cx) << "\" y=\"" << fmt(cy)
          << "\" text-anchor=\"middle\" dominant-baseline=\"central\" font-family=\"sans-serif\" "
             "font-size=\"10\">"
          << xml_escape(graph.labels[v]) << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string export_dot(const RenderedGraph& graph, const std::vector<std::string>& comment_lines) {
  std::ostringstream dot;
  for (const auto& c : comment_lines) dot << "// " << c << "\n";
  dot << (graph.directed ? "digraph" : "graph") << " netpred {\n";
  dot << "  node [shape=circle];\n";
  char weight_buf[40];
  for (std::size_t v = 0; v < graph.coordinates.size(); ++v) {
    const std::string name = v < graph.labels.size() ? graph.labels[v] : "n" + std::to_string(v);
    const std::string measures = v < graph.measure_texts.size() ? graph.measure_texts[v] : "";
    dot << "  n" << v << " [label=\"" << dot_escape(name);
    if (!measures.empty()) dot << "\\n" << dot_escape(measures);
    dot << "\"];\n";
  }
  const char* connector = graph.directed ? " -> " : " -- ";
  for (const VizEdge& e : graph.edges) {
    std::snprintf(weight_buf, sizeof(weight_buf), "%.12g", e.weight);
    dot << "  n" << e.from << connector << "n" << e.to << " [weight=" << weight_buf
        << ", sign=\"" << (e.sign > 0 ? "+" : (e.sign < 0 ? "-" : "0")) << "\"];\n";
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace netpred
