#ifndef FERES_PIPELINE_BILLIARD_HPP
#define FERES_PIPELINE_BILLIARD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "feres/angles.hpp"
#include "feres/errors.hpp"
#include "feres/feres_map.hpp"
#include "feres/random.hpp"
#include "feres/reachable_set.hpp"

namespace feres {

// Geometry: two parallel walls one unit apart. Each collision sends the particle straight
// across to the other wall, so one step is one crossing of the strip.

enum class Wall : std::uint8_t { bottom, top };

inline const char* to_string(Wall w) { return w == Wall::bottom ? "bottom" : "top"; }

inline Wall opposite(Wall w) { return w == Wall::bottom ? Wall::top : Wall::bottom; }

/// s is the horizontal coordinate shared by both walls; theta is measured from the wall
/// the particle is leaving, in the direction of increasing s on the bottom wall and
/// decreasing s on the top wall (the top wall is the bottom one rotated by pi).
struct PipelineState {
  double s = 0.0;
  Wall wall = Wall::bottom;
  double theta = kPi / 2.0;
};

struct PipelineStep {
  PipelineState state;
  double flight_length = 0.0;
};

/// Applies branch b at the current wall and flies to the opposite one:
/// flight length 1/sin(theta'), horizontal advance +-cot(theta').
inline PipelineStep pipeline_step(const PipelineState& st, Branch b, const BaseAngle& alpha) {
  if (!is_admissible(b, st.theta, alpha)) {
    throw Error(ErrorKind::admissibility,
                "branch T" + std::to_string(index(b)) + " has zero probability at theta = " + std::to_string(st.theta));
  }
  const double theta = apply_branch(b, st.theta, alpha);
  if (!(theta > 0.0) || !(theta < kPi)) {
    throw Error(ErrorKind::singular_input, "grazing outgoing angle; the particle never reaches the other wall");
  }
  const double sin_t = std::sin(theta);
  const double advance = std::cos(theta) / sin_t;
  const double direction = st.wall == Wall::bottom ? 1.0 : -1.0;
  return {{st.s + direction * advance, opposite(st.wall), theta}, 1.0 / sin_t};
}

/// Tangent map of n steps, (-1)^n [[1, -offdiag], [0, 1]].
struct PipelineJacobian {
  double offdiag = 0.0;
  int parity = 1;
  std::int64_t n = 0;
};

/// Adds branch_sign * l / sin(theta_new) to the off-diagonal and flips the parity.
inline PipelineJacobian pipeline_jacobian_step(PipelineJacobian j, double theta_new, double flight_length,
                                               int branch_sign) {
  j.offdiag += branch_sign * flight_length / std::sin(theta_new);
  j.parity = -j.parity;
  j.n += 1;
  return j;
}

/// |J v| for the accumulated tangent map.
inline double apply_norm(const PipelineJacobian& j, std::array<double, 2> v) {
  return std::hypot(v[0] - j.offdiag * v[1], v[1]);
}

struct PipelineTrajectory {
  BaseAngle alpha;
  std::uint64_t seed = 0;
  std::vector<PipelineState> states;
  std::vector<Branch> branches;
  std::vector<double> flight_lengths;

  std::size_t length() const noexcept { return branches.size(); }
};

/// n random steps. Uses the same generator stream as the circle billiard, so both tables
/// produce the same angle sequence for the same seed and start angle.
inline PipelineTrajectory simulate_pipeline(const PipelineState& start, std::size_t n, const BaseAngle& alpha,
                                            std::uint64_t seed) {
  if (!(start.theta > 0.0) || !(start.theta < kPi)) {
    throw Error(ErrorKind::singular_input, "start angle must lie in (0, pi)");
  }
  if (!std::isfinite(start.s)) throw Error(ErrorKind::range, "start position must be finite");
  PipelineTrajectory t{alpha, seed, {start}, {}, {}};
  t.states.reserve(n + 1);
  t.branches.reserve(n);
  t.flight_lengths.reserve(n);
  Rng rng = make_rng(seed, Stream::trajectory);
  PipelineState st = start;
  for (std::size_t i = 0; i < n; ++i) {
    const Step step = sample_step(st.theta, alpha, rng);
    const PipelineStep next = pipeline_step(st, step.branch, alpha);
    st = next.state;
    t.states.push_back(st);
    t.branches.push_back(step.branch);
    t.flight_lengths.push_back(next.flight_length);
  }
  return t;
}

/// sin of the angle in C(theta0) closest to 0 or pi. Every outgoing angle of a run lies
/// in C(theta0), so L = 1 / this and each off-diagonal term is at most 1 / this^2.
inline double min_reachable_sine(const Angle& theta0, const BaseAngle& alpha) {
  const ReachableSet set = reachable_angles(theta0, alpha);
  double m = std::numeric_limits<double>::infinity();
  for (double v : set.values()) m = std::min(m, std::sin(v));
  return m;
}

struct PipelineLyapunov {
  double estimate = 0.0;
  PipelineJacobian jacobian;
  double min_sine = 0.0;       // sin(theta_min) over C(theta0)
  double max_flight = 0.0;     // L = 1 / sin(theta_min)
  bool bound_respected = true;  // |offdiag_k| <= k L / sin(theta_min) at every step k
};

/// (1/n) log |J_n v| along a random pipeline run. The strict mode (default) only accepts
/// alpha = m*pi/n, where C(theta0) is finite and the growth bound applies.
inline PipelineLyapunov pipeline_lyapunov(const PipelineState& start, const BaseAngle& alpha, std::size_t n,
                                          std::uint64_t seed, std::array<double, 2> v, bool strict = true) {
  if (v[0] == 0.0 && v[1] == 0.0) throw Error(ErrorKind::validation, "Lyapunov direction must be nonzero");
  if (n == 0) throw Error(ErrorKind::precondition, "Lyapunov estimate needs at least one step");
  if (strict && !alpha.is_rational()) {
    throw Error(ErrorKind::precondition, "pipeline Lyapunov estimate is only supported for alpha = m*pi/n");
  }
  PipelineLyapunov r;
  if (alpha.is_rational()) {
    r.min_sine = min_reachable_sine(Angle::radians(start.theta), alpha);
    r.max_flight = 1.0 / r.min_sine;
  }
  const PipelineTrajectory t = simulate_pipeline(start, n, alpha, seed);
  for (std::size_t k = 0; k < t.length(); ++k) {
    r.jacobian = pipeline_jacobian_step(r.jacobian, t.states[k + 1].theta, t.flight_lengths[k],
                                        derivative_sign(t.branches[k]));
    if (alpha.is_rational()) {
      const double bound = static_cast<double>(k + 1) * r.max_flight / r.min_sine;
      if (std::abs(r.jacobian.offdiag) > bound * (1.0 + 1e-12)) r.bound_respected = false;
    }
  }
  r.estimate = std::log(apply_norm(r.jacobian, v)) / static_cast<double>(n);
  return r;
}

}  // namespace feres

#endif  // FERES_PIPELINE_BILLIARD_HPP
