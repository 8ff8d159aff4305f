#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helmnodal/solution.hpp"

namespace helmnodal {

namespace detail {

/// Minimal SVG canvas with a y-up math coordinate frame.
class SvgCanvas {
 public:
  SvgCanvas(double x0, double x1, double y0, double y1, int width = 760)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), w_(width) {
    scale_ = (w_ - 2.0 * pad_) / (x1_ - x0_);
    h_ = static_cast<int>((y1_ - y0_) * scale_ + 2 * pad_);
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_
        << "\" height=\"" << h_ << "\" viewBox=\"0 0 " << w_ << " " << h_
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void polyline(const std::vector<std::array<double, 2>>& pts,
                const std::string& color, double width, bool dashed = false) {
    if (pts.size() < 2) return;
    os_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << width << "\"";
    if (dashed) os_ << " stroke-dasharray=\"7,5\"";
    os_ << " points=\"";
    for (const auto& p : pts) os_ << fx(p[0]) << "," << fy(p[1]) << " ";
    os_ << "\"/>\n";
  }

  void dot(double x, double y, double r, const std::string& color) {
    os_ << "<circle cx=\"" << fx(x) << "\" cy=\"" << fy(y) << "\" r=\"" << r
        << "\" fill=\"" << color << "\"/>\n";
  }

  void cell(double x, double y, double sz, const std::string& color) {
    os_ << "<rect x=\"" << fx(x) - sz / 2 << "\" y=\"" << fy(y) - sz / 2
        << "\" width=\"" << sz << "\" height=\"" << sz << "\" fill=\"" << color
        << "\"/>\n";
  }

  void text(double x, double y, const std::string& t) {
    os_ << "<text x=\"" << fx(x) << "\" y=\"" << fy(y)
        << "\" font-size=\"14\" font-family=\"sans-serif\">" << t
        << "</text>\n";
  }

  void save(const std::string& path) {
    os_ << "</svg>\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << os_.str();
  }

 private:
  double fx(double x) const { return pad_ + (x - x0_) * scale_; }
  double fy(double y) const { return h_ - pad_ - (y - y0_) * scale_; }

  double x0_, x1_, y0_, y1_;
  int w_, h_ = 0;
  double pad_ = 18, scale_ = 1;
  std::ostringstream os_;
};

inline std::vector<std::array<double, 2>> mirror_xy(
    const std::vector<std::array<double, 2>>& curve_yx, double sx, double sy) {
  // trace samples are (param=y, coord=x); emit (x, y) with reflections
  std::vector<std::array<double, 2>> out;
  out.reserve(curve_yx.size());
  for (const auto& c : curve_yx) out.push_back({sx * c[1], sy * c[0]});
  return out;
}

}  // namespace detail

struct FigurePaths {
  std::string u_nodal;
  std::string v_signs;
  std::string w_unperturbed;
};

/// Renders the three summary figures: the nodal set of u with the dashed
/// symmetry lines of its nodal domains, the sign chart of v, and the
/// unperturbed nodal set in the rhombus.
inline FigurePaths render_figures(const SolutionU& sol, const TraceResult& trace,
                                  const std::string& out_dir) {
  FigurePaths paths;
  const double s = trace.s;
  const double xext = (*sol.domain().mu)(0.0) + 0.25;
  const Perturbation& p = sol.perturbation();
  const double eps = sol.epsilon();

  // (a) nodal set of u: boundary + two interior curves + symmetry lines
  {
    detail::SvgCanvas svg(-xext, xext, -s - 0.25, s + 0.25);
    for (double sx : {1.0, -1.0})
      for (double sy : {1.0, -1.0})
        svg.polyline(detail::mirror_xy(trace.mu.samples, sx, sy), "black", 1.6);
    svg.polyline(detail::mirror_xy(trace.interior.samples, 1, 1), "black", 1.6);
    svg.polyline(detail::mirror_xy(trace.interior.samples, -1, 1), "black", 1.6);
    for (double c : {0.0, kPi, -kPi}) {
      std::vector<std::array<double, 2>> line = {{c, -s}, {c, s}};
      svg.polyline(line, "#666666", 1.0, true);
    }
    paths.u_nodal = out_dir + "/fig_u_nodal.svg";
    svg.save(paths.u_nodal);
  }

  // (b) nodal set and sign chart of v
  {
    detail::SvgCanvas svg(-xext, xext, -s - 0.25, s + 0.25);
    const int ny = 160;
    const int nx = 280;
    for (int j = 0; j <= ny; ++j) {
      const double y = -s + 2 * s * j / ny;
      const double m = (*sol.domain().mu)(y);
      for (int i = 0; i <= nx; ++i) {
        const double x = -xext + 2 * xext * i / nx;
        if (std::fabs(x) >= m - 1e-3) continue;
        const double v = sol.sigma() * eval_v(x, y, eps, p).value;
        if (std::fabs(v) < 1e-10) continue;
        svg.cell(x, y, 3.4, v > 0 ? "#9ecae1" : "#fcae91");
      }
    }
    for (double sx : {1.0, -1.0})
      for (double sy : {1.0, -1.0})
        svg.polyline(detail::mirror_xy(trace.mu.samples, sx, sy), "black", 1.4);
    svg.polyline(detail::mirror_xy(trace.interior.samples, 1, 1), "black", 1.4);
    svg.polyline(detail::mirror_xy(trace.interior.samples, -1, 1), "black", 1.4);
    for (double c : {0.0, kPi, -kPi}) {
      std::vector<std::array<double, 2>> line = {{c, -s}, {c, s}};
      svg.polyline(line, "black", 1.4);
    }
    svg.text(-xext + 0.3, s, "sign of v");
    paths.v_signs = out_dir + "/fig_v_signs.svg";
    svg.save(paths.v_signs);
  }

  // (c) unperturbed nodal set: straight lines in the rhombus
  {
    detail::SvgCanvas svg(-2 * kPi - 0.25, 2 * kPi + 0.25, -kTopY - 0.25,
                          kTopY + 0.25);
    std::vector<std::array<double, 2>> rhombus = {{2 * kPi, 0},
                                                  {0, kTopY},
                                                  {-2 * kPi, 0},
                                                  {0, -kTopY},
                                                  {2 * kPi, 0}};
    svg.polyline(rhombus, "black", 1.6);
    for (double c : {0.0, kPi, -kPi}) {
      const double ylim = (2 * kPi - std::fabs(c)) / kSqrt3d;
      std::vector<std::array<double, 2>> line = {{c, -ylim}, {c, ylim}};
      svg.polyline(line, "black", 1.2);
    }
    // interior diagonals y = +- x / sqrt3
    std::vector<std::array<double, 2>> d1 = {{-kPi, -kPi / kSqrt3d},
                                             {kPi, kPi / kSqrt3d}};
    std::vector<std::array<double, 2>> d2 = {{-kPi, kPi / kSqrt3d},
                                             {kPi, -kPi / kSqrt3d}};
    svg.polyline(d1, "black", 1.2);
    svg.polyline(d2, "black", 1.2);
    paths.w_unperturbed = out_dir + "/fig_w_eps0.svg";
    svg.save(paths.w_unperturbed);
  }
  return paths;
}

}  // namespace helmnodal
