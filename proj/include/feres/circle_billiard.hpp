#ifndef FERES_CIRCLE_BILLIARD_HPP
#define FERES_CIRCLE_BILLIARD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "feres/angles.hpp"
#include "feres/errors.hpp"
#include "feres/feres_map.hpp"
#include "feres/random.hpp"
#include "feres/reachable_set.hpp"

namespace feres {

inline constexpr double kTwoPi = 2.0 * kPi;

/// Boundary point s in [0, 2pi) of the unit circle and outgoing angle theta in (0, pi).
struct PhasePoint {
  double s = 0.0;
  double theta = kPi / 2.0;
};

inline double reduce_mod_two_pi(double s) {
  double r = std::fmod(s, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// (s, theta) -> (s + 2 T_i(theta) mod 2pi, T_i(theta)). Throws if branch i has zero
/// probability at theta.
inline PhasePoint circle_step(const PhasePoint& p, Branch b, const BaseAngle& alpha) {
  if (!is_admissible(b, p.theta, alpha)) {
    throw Error(ErrorKind::admissibility,
                "branch T" + std::to_string(index(b)) + " has zero probability at theta = " + std::to_string(p.theta));
  }
  const double theta = apply_branch(b, p.theta, alpha);
  return {reduce_mod_two_pi(p.s + 2.0 * theta), theta};
}

/// A run of the random circle billiard. branches[k] carries points[k] to points[k + 1].
struct Trajectory {
  BaseAngle alpha;
  std::uint64_t seed = 0;
  std::vector<PhasePoint> points;
  std::vector<Branch> branches;

  std::size_t length() const noexcept { return branches.size(); }
};

inline void check_start(const PhasePoint& start) {
  if (!(start.theta > 0.0) || !(start.theta < kPi)) {
    throw Error(ErrorKind::singular_input, "start angle must lie in (0, pi)");
  }
  if (!(start.s >= 0.0) || !(start.s < kTwoPi)) {
    throw Error(ErrorKind::range, "start position must lie in [0, 2pi)");
  }
}

/// n random steps of the circle billiard driven by the trajectory stream of `seed`.
inline Trajectory simulate(const PhasePoint& start, std::size_t n, const BaseAngle& alpha, std::uint64_t seed) {
  check_start(start);
  Trajectory t{alpha, seed, {}, {}};
  t.points.reserve(n + 1);
  t.branches.reserve(n);
  t.points.push_back(start);
  Rng rng = make_rng(seed, Stream::trajectory);
  PhasePoint p = start;
  for (std::size_t i = 0; i < n; ++i) {
    const Step step = sample_step(p.theta, alpha, rng);
    p = {reduce_mod_two_pi(p.s + 2.0 * step.theta), step.theta};
    t.points.push_back(p);
    t.branches.push_back(step.branch);
  }
  return t;
}

/// Deterministic orbit under a given branch word. Throws InadmissibleWord carrying the
/// first index whose branch has zero probability.
inline Trajectory prescribed_orbit(const PhasePoint& start, std::span<const Branch> word, const BaseAngle& alpha) {
  check_start(start);
  Trajectory t{alpha, 0, {}, {}};
  t.points.reserve(word.size() + 1);
  t.points.push_back(start);
  PhasePoint p = start;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!is_admissible(word[i], p.theta, alpha)) {
      throw InadmissibleWord(i, "branch T" + std::to_string(index(word[i])) + " at word position " +
                                    std::to_string(i) + " has zero probability at theta = " +
                                    std::to_string(p.theta));
    }
    p = circle_step(p, word[i], alpha);
    t.points.push_back(p);
    t.branches.push_back(word[i]);
  }
  return t;
}

/// Normalized sup deviation of the s-histogram from uniform:
/// bins * max_b |count_b / total - 1 / bins|. Zero for a perfectly uniform sample,
/// bins - 1 for a sample concentrated in a single bin.
inline double dense_orbit_discrepancy(std::span<const double> s_values, int bins) {
  if (bins < 1) throw Error(ErrorKind::validation, "discrepancy needs at least one bin");
  if (s_values.empty()) throw Error(ErrorKind::validation, "discrepancy needs a nonempty sample");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double s : s_values) {
    auto b = static_cast<std::size_t>(reduce_mod_two_pi(s) / kTwoPi * bins);
    counts[std::min(b, counts.size() - 1)]++;
  }
  const double total = static_cast<double>(s_values.size());
  double worst = 0.0;
  for (std::size_t c : counts) worst = std::max(worst, std::abs(static_cast<double>(c) / total - 1.0 / bins));
  return worst * bins;
}

inline std::vector<double> boundary_positions(const Trajectory& t) {
  std::vector<double> s;
  s.reserve(t.points.size());
  for (const auto& p : t.points) s.push_back(p.s);
  return s;
}

inline double dense_orbit_discrepancy(const Trajectory& t, int bins) {
  const auto s = boundary_positions(t);
  return dense_orbit_discrepancy(s, bins);
}

struct CausticEstimate {
  double radius = 0.0;
  bool degenerate = false;
  std::optional<double> attaining_angle;
};

namespace detail {

inline CausticEstimate caustic_from_angles(std::span<const double> angles) {
  if (angles.empty()) throw Error(ErrorKind::validation, "caustic needs at least one angle");
  CausticEstimate c;
  c.radius = std::numeric_limits<double>::infinity();
  for (double th : angles) {
    const double r = std::abs(std::cos(th));
    if (r < c.radius) {
      c.radius = r;
      c.attaining_angle = th;
    }
  }
  c.degenerate = c.radius <= 1e-12;
  return c;
}

}  // namespace detail

/// Random caustic of a run: min |cos theta| over every angle the run carries, start
/// included (a lone start point describes the chord it leaves along).
inline CausticEstimate caustic(const Trajectory& t) {
  std::vector<double> angles;
  angles.reserve(t.points.size());
  for (const auto& p : t.points) angles.push_back(p.theta);
  return detail::caustic_from_angles(angles);
}

/// Caustic over every state of a reachable set. Also degenerate when pi/2 is a state.
inline CausticEstimate caustic(const ReachableSet& set) {
  const auto angles = set.values();
  CausticEstimate c = detail::caustic_from_angles(angles);
  if (contains_right_angle(set)) {
    c.degenerate = true;
    c.radius = 0.0;
    c.attaining_angle = kPi / 2.0;
  }
  return c;
}

/// Distance from the center to the line through boundary points at s_from and s_to,
/// computed from the endpoint coordinates.
inline double chord_distance(double s_from, double s_to) {
  const double x1 = std::cos(s_from), y1 = std::sin(s_from);
  const double x2 = std::cos(s_to), y2 = std::sin(s_to);
  const double len = std::hypot(x2 - x1, y2 - y1);
  if (len == 0.0) return 1.0;
  return std::abs(x1 * y2 - x2 * y1) / len;
}

/// Max over chords of |geometric distance to center - |cos theta||, where chord k runs
/// from points[k] to points[k + 1] and leaves at angle points[k + 1].theta.
inline double chord_distance_check(const Trajectory& t) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
    const double d = chord_distance(t.points[k].s, t.points[k + 1].s);
    worst = std::max(worst, std::abs(d - std::abs(std::cos(t.points[k + 1].theta))));
  }
  return worst;
}

/// Fraction of polar cells of the annulus radius in [caustic.radius, 1] crossed by at
/// least one chord. A degenerate caustic makes the annulus the whole disc.
///
/// Each chord is split at its exact crossings with the ring circles and the angular
/// rays; every sub-segment lies in a single cell, identified by its midpoint.
inline double ring_coverage(const Trajectory& t, const CausticEstimate& c, int radial_cells, int angular_cells) {
  if (radial_cells < 1 || angular_cells < 1) throw Error(ErrorKind::validation, "coverage grid needs >= 1 cell per axis");
  const double inner = c.degenerate ? 0.0 : c.radius;
  const double width = 1.0 - inner;
  if (!(width > 0.0)) throw Error(ErrorKind::validation, "caustic radius must be below 1");
  const auto nr = static_cast<std::size_t>(radial_cells);
  const auto na = static_cast<std::size_t>(angular_cells);
  std::vector<char> hit(nr * na, 0);

  std::vector<double> ray_cos(na), ray_sin(na);
  for (std::size_t j = 0; j < na; ++j) {
    const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(na);
    ray_cos[j] = std::cos(phi);
    ray_sin[j] = std::sin(phi);
  }

  std::vector<double> cuts;
  for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
    const double px = std::cos(t.points[k].s), py = std::sin(t.points[k].s);
    const double dx = std::cos(t.points[k + 1].s) - px, dy = std::sin(t.points[k + 1].s) - py;
    const double a = dx * dx + dy * dy;
    if (a == 0.0) continue;
    const double b = 2.0 * (px * dx + py * dy);
    const double c0 = px * px + py * py;

    cuts.assign({0.0, 1.0});
    for (std::size_t i = 0; i <= nr; ++i) {
      const double rho = inner + width * static_cast<double>(i) / static_cast<double>(nr);
      const double disc = b * b - 4.0 * a * (c0 - rho * rho);
      if (disc <= 0.0) continue;
      const double sq = std::sqrt(disc);
      for (double root : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (root > 0.0 && root < 1.0) cuts.push_back(root);
      }
    }
    for (std::size_t j = 0; j < na; ++j) {
      // cross(ray, P + t D) = 0 and the hit lies on the ray's side of the origin.
      const double denom = ray_cos[j] * dy - ray_sin[j] * dx;
      if (denom == 0.0) continue;
      const double root = -(ray_cos[j] * py - ray_sin[j] * px) / denom;
      if (!(root > 0.0 && root < 1.0)) continue;
      const double hx = px + root * dx, hy = py + root * dy;
      if (hx * ray_cos[j] + hy * ray_sin[j] > 0.0) cuts.push_back(root);
    }
    std::sort(cuts.begin(), cuts.end());

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] - cuts[i] <= 1e-15) continue;
      const double tm = 0.5 * (cuts[i] + cuts[i + 1]);
      const double mx = px + tm * dx, my = py + tm * dy;
      const double rho = std::hypot(mx, my);
      if (rho < inner) continue;
      const auto ri = std::min(nr - 1, static_cast<std::size_t>((rho - inner) / width * static_cast<double>(nr)));
      const double phi = reduce_mod_two_pi(std::atan2(my, mx));
      const auto ai = std::min(na - 1, static_cast<std::size_t>(phi / kTwoPi * static_cast<double>(na)));
      hit[ri * na + ai] = 1;
    }
  }
  const auto covered = static_cast<double>(std::count(hit.begin(), hit.end(), 1));
  return covered / static_cast<double>(hit.size());
}

/// Tangent map of an n-step orbit, [[1, a], [0, b]]. a is an even integer with |a| <= 2n
/// and b = +-1, so both are held exactly.
struct JacobianAccumulator {
  std::int64_t a = 0;
  int b = 1;
  std::int64_t n = 0;
};

/// Left-multiplies by the one-step Jacobian [[1, 2t], [0, t]] with t = T_i' = +-1.
inline JacobianAccumulator jacobian_step(JacobianAccumulator acc, Branch branch) {
  const int t = derivative_sign(branch);
  acc.a += 2 * t * acc.b;
  acc.b *= t;
  acc.n += 1;
  return acc;
}

inline JacobianAccumulator accumulate_jacobian(std::span<const Branch> word) {
  JacobianAccumulator acc;
  for (Branch b : word) acc = jacobian_step(acc, b);
  return acc;
}

/// (1/n) log |J_n v| along the run's branch word.
inline double lyapunov_estimate(const Trajectory& t, std::array<double, 2> v) {
  if (v[0] == 0.0 && v[1] == 0.0) throw Error(ErrorKind::validation, "Lyapunov direction must be nonzero");
  if (t.length() == 0) throw Error(ErrorKind::precondition, "Lyapunov estimate needs at least one step");
  const JacobianAccumulator acc = accumulate_jacobian(t.branches);
  const double x = v[0] + static_cast<double>(acc.a) * v[1];
  const double y = static_cast<double>(acc.b) * v[1];
  return std::log(std::hypot(x, y)) / static_cast<double>(acc.n);
}

}  // namespace feres

#endif  // FERES_CIRCLE_BILLIARD_HPP
