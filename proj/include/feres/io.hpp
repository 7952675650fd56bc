#ifndef FERES_IO_HPP
#define FERES_IO_HPP

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "feres/circle_billiard.hpp"
#include "feres/measure_evolution.hpp"
#include "feres/pipeline_billiard.hpp"
#include "feres/reachable_set.hpp"

namespace feres::io {

using nlohmann::json;

/// Round-trip representation of a double, independent of stream state and locale.
inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "step,s,theta,branch\n";
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    os << k << ',' << number(t.points[k].s) << ',' << number(t.points[k].theta) << ',';
    if (k > 0) os << index(t.branches[k - 1]);
    os << '\n';
  }
}

inline void write_pipeline_csv(std::ostream& os, const PipelineTrajectory& t) {
  os << "step,s,wall,theta,flight_length\n";
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    const PipelineState& st = t.states[k];
    os << k << ',' << number(st.s) << ',' << to_string(st.wall) << ',' << number(st.theta) << ',';
    if (k > 0) os << number(t.flight_lengths[k - 1]);
    os << '\n';
  }
}

inline void write_knudsen_csv(std::ostream& os, std::span<const double> tv) {
  os << "step,tv_distance\n";
  for (std::size_t k = 0; k < tv.size(); ++k) os << k << ',' << number(tv[k]) << '\n';
}

inline void write_density_csv(std::ostream& os, const AngleDensity& d) {
  os << "bin_left,bin_right,mass\n";
  for (std::size_t i = 0; i < d.bins(); ++i) {
    os << number(d.left(i)) << ',' << number(d.right(i)) << ',' << number(d.masses[i]) << '\n';
  }
}

inline json to_json(const BaseAngle& a) {
  if (a.is_rational()) {
    return {{"kind", "rational"}, {"m", a.numerator()}, {"n", a.denominator()}, {"radians", a.value()}};
  }
  return {{"kind", "real"}, {"radians", a.value()}};
}

inline json to_json(const ReachableSet& set) {
  json states = json::array();
  for (const ReachableState& s : set.states()) {
    json st = {{"sign", s.symbol.sign}, {"j", s.symbol.j}, {"k", s.symbol.k}, {"value", s.value}, {"depth", s.depth}};
    if (s.exact) st["pi_fraction"] = to_string(*s.exact);
    states.push_back(std::move(st));
  }
  json out = {{"alpha", to_json(set.alpha())},
              {"theta0", set.base().value()},
              {"size", set.size()},
              {"truncated", set.truncated()},
              {"states", std::move(states)}};
  if (set.depth_limit()) out["depth_limit"] = *set.depth_limit();
  return out;
}

/// Row-major nested arrays.
inline json to_json(const TransitionMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const CausticEstimate& c) {
  json out = {{"radius", c.radius}, {"degenerate", c.degenerate}};
  out["attaining_angle"] = c.attaining_angle ? json(*c.attaining_angle) : json(nullptr);
  return out;
}

struct SvgOptions {
  std::size_t max_chords = 400;
  double size = 600.0;
};

/// The unit circle, the first chords of a run and the caustic circle.
inline void write_circle_svg(std::ostream& os, const Trajectory& t, const CausticEstimate& c,
                             const SvgOptions& opt = {}) {
  const double half = opt.size / 2.0, scale = 0.45 * opt.size;
  auto x = [&](double s) { return number(half + scale * std::cos(s)); };
  auto y = [&](double s) { return number(half - scale * std::sin(s)); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << number(opt.size) << "\" height=\""
     << number(opt.size) << "\" viewBox=\"0 0 " << number(opt.size) << ' ' << number(opt.size) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<circle cx=\"" << number(half) << "\" cy=\"" << number(half) << "\" r=\"" << number(scale)
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  os << "<g stroke=\"steelblue\" stroke-width=\"0.5\" stroke-opacity=\"0.6\">\n";
  const std::size_t chords = std::min(opt.max_chords, t.points.empty() ? 0 : t.points.size() - 1);
  for (std::size_t k = 0; k < chords; ++k) {
    os << "<line x1=\"" << x(t.points[k].s) << "\" y1=\"" << y(t.points[k].s) << "\" x2=\"" << x(t.points[k + 1].s)
       << "\" y2=\"" << y(t.points[k + 1].s) << "\"/>\n";
  }
  os << "</g>\n";
  if (!c.degenerate) {
    os << "<circle cx=\"" << number(half) << "\" cy=\"" << number(half) << "\" r=\"" << number(scale * c.radius)
       << "\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n";
  } else {
    os << "<circle cx=\"" << number(half) << "\" cy=\"" << number(half)
       << "\" r=\"3\" fill=\"firebrick\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace feres::io

#endif  // FERES_IO_HPP
