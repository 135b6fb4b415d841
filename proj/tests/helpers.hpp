#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "netpred/data.hpp"
#include "netpred/rng.hpp"

namespace testutil {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("netpred_test_" + std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Column-standardizes a matrix (zero mean, unit population sd) so the
// solver's internal standardization becomes the identity.
inline Eigen::MatrixXd standardize(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out = X;
  for (int j = 0; j < out.cols(); ++j) {
    out.col(j).array() -= out.col(j).mean();
    const double sd = std::sqrt(out.col(j).squaredNorm() / out.rows());
    if (sd > 0) out.col(j) /= sd;
  }
  return out;
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  netpred::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

inline double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Tridiagonal precision with unit diagonal and partial correlation rho on
// the chain edges.
inline Eigen::MatrixXd chain_precision(int p, double rho) {
  Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(p, p);
  for (int i = 0; i + 1 < p; ++i) prec(i, i + 1) = prec(i + 1, i) = -rho;
  return prec;
}

// --- tiny XML well-formedness checker (tags balanced, attributes quoted) ---

inline bool xml_well_formed(const std::string& doc, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  const std::size_t n = doc.size();
  while (i < n) {
    if (doc[i] != '<') {
      if (doc[i] == '>') return fail("stray '>'");
      ++i;
      continue;
    }
    if (doc.compare(i, 4, "<!--") == 0) {
      const auto end = doc.find("-->", i + 4);
      if (end == std::string::npos) return fail("unterminated comment");
      if (doc.substr(i + 4, end - i - 4).find("--") != std::string::npos)
        return fail("'--' inside comment");
      i = end + 3;
      continue;
    }
    if (doc.compare(i, 2, "<?") == 0) {
      const auto end = doc.find("?>", i);
      if (end == std::string::npos) return fail("unterminated declaration");
      i = end + 2;
      continue;
    }
    const auto end = doc.find('>', i);
    if (end == std::string::npos) return fail("unterminated tag");
    std::string tag = doc.substr(i + 1, end - i - 1);
    const bool closing = !tag.empty() && tag[0] == '/';
    const bool self_closing = !tag.empty() && tag.back() == '/';
    if (closing) tag = tag.substr(1);
    if (self_closing) tag.pop_back();
    // attribute quoting: quotes must pair up outside of quoted spans
    int quotes = 0;
    for (const char c : tag) quotes += c == '"';
    if (quotes % 2) return fail("unbalanced attribute quotes in <" + tag + ">");
    const std::string name = tag.substr(0, tag.find_first_of(" \t\n\r"));
    if (name.empty()) return fail("empty tag name");
    if (closing) {
      if (stack.empty() || stack.back() != name)
        return fail("mismatched closing tag </" + name + ">");
      stack.pop_back();
    } else if (!self_closing) {
      stack.push_back(name);
    }
    i = end + 1;
  }
  if (!stack.empty()) return fail("unclosed tag <" + stack.back() + ">");
  return true;
}

// --- SVG ring-arc parser -----------------------------------------------
// Recovers ring fractions from emitted arc paths. Arcs start at 12 o'clock
// and run clockwise; the parser inverts the endpoint geometry.

struct ParsedArc {
  double cx, cy, r;
  double theta0, theta1;  // clockwise angle from 12 o'clock
  int large_arc;
  double fraction() const {
    double sweep = theta1 - theta0;
    while (sweep < 0) sweep += 2 * kPi;
    while (sweep >= 2 * kPi) sweep -= 2 * kPi;
    // choose the branch consistent with the large-arc flag
    if (large_arc == 1 && sweep < kPi) sweep = 2 * kPi - sweep;
    if (large_arc == 0 && sweep > kPi) sweep = 2 * kPi - sweep;
    return sweep / (2 * kPi);
  }
};

// Parses every `<path class="ringseg" d="M x0 y0 A r r 0 laf 1 x1 y1"`
// element; full circles emitted as <circle class="ringseg"> count as
// fraction 1.
inline std::vector<double> parse_ring_fractions(const std::string& svg) {
  std::vector<double> fractions;
  std::size_t at = 0;
  while (true) {
    const auto path_at = svg.find("class=\"ringseg\"", at);
    if (path_at == std::string::npos) break;
    const auto tag_start = svg.rfind('<', path_at);
    const auto tag_end = svg.find('>', path_at);
    const std::string tag = svg.substr(tag_start, tag_end - tag_start);
    at = tag_end;
    if (tag.find("<circle") == 0) {
      fractions.push_back(1.0);
      continue;
    }
    const auto d_at = tag.find("d=\"");
    if (d_at == std::string::npos) continue;
    const auto d_end = tag.find('"', d_at + 3);
    const std::string d = tag.substr(d_at + 3, d_end - d_at - 3);
    double x0, y0, r1, r2, x1, y1;
    int rot, laf, sweep_flag;
    if (std::sscanf(d.c_str(), "M %lf %lf A %lf %lf %d %d %d %lf %lf", &x0, &y0, &r1, &r2,
                    &rot, &laf, &sweep_flag, &x1, &y1) != 9)
      continue;
    // center from the matching ring background circle is not at hand here;
    // infer it from the two endpoints and the radius (clockwise sweep).
    // Midpoint construction: the center lies on the perpendicular bisector.
    const double mx = 0.5 * (x0 + x1), my = 0.5 * (y0 + y1);
    const double dx = x1 - x0, dy = y1 - y0;
    const double q = std::hypot(dx, dy);
    const double h = std::sqrt(std::max(0.0, r1 * r1 - q * q / 4));
    // two candidate centers; pick by flags (sweep=1, SVG y-down clockwise)
    const double ux = -dy / q, uy = dx / q;
    const double sgn = laf == 1 ? -1.0 : 1.0;
    const double cx = mx + sgn * h * ux;
    const double cy = my + sgn * h * uy;
    ParsedArc arc;
    arc.cx = cx;
    arc.cy = cy;
    arc.r = r1;
    arc.large_arc = laf;
    arc.theta0 = std::atan2(x0 - cx, cy - y0);
    arc.theta1 = std::atan2(x1 - cx, cy - y1);
    fractions.push_back(arc.fraction());
  }
  return fractions;
}

}  // namespace testutil
