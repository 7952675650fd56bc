#ifndef FERES_FERES_MAP_HPP
#define FERES_FERES_MAP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "feres/angles.hpp"
#include "feres/errors.hpp"
#include "feres/random.hpp"

namespace feres {

/// The four reflection branches of the random map.
///   advance      T1(t) = t + 2a
///   far_reflect  T2(t) = -t + 2pi - 4a
///   retreat      T3(t) = t - 2a
///   near_reflect T4(t) = -t + 4a
enum class Branch : std::uint8_t { advance = 1, far_reflect = 2, retreat = 3, near_reflect = 4 };

inline constexpr std::array<Branch, 4> kBranches = {Branch::advance, Branch::far_reflect,
                                                    Branch::retreat, Branch::near_reflect};

inline int index(Branch b) { return static_cast<int>(b); }

inline Branch branch(int i) {
  if (i < 1 || i > 4) throw Error(ErrorKind::validation, "branch index must be 1..4, got " + std::to_string(i));
  return static_cast<Branch>(i);
}

inline std::vector<Branch> branch_word(std::initializer_list<int> indices) {
  std::vector<Branch> word;
  word.reserve(indices.size());
  for (int i : indices) word.push_back(branch(i));
  return word;
}

/// dT/dtheta for the branch: +1 for translations, -1 for reflections.
inline int derivative_sign(Branch b) {
  return (b == Branch::advance || b == Branch::retreat) ? 1 : -1;
}

/// Probabilities (p1, p2, p3, p4) of the four branches at one angle.
struct BranchProbabilities {
  std::array<double, 4> p{};

  double operator[](Branch b) const { return p[static_cast<std::size_t>(index(b) - 1)]; }
  double& operator[](Branch b) { return p[static_cast<std::size_t>(index(b) - 1)]; }

  double sum() const { return p[0] + p[1] + p[2] + p[3]; }
};

/// u(a, t) = (1 + tan(a) / tan(t)) / 2, written with cos/sin so t = pi/2 is regular.
inline double u(double alpha, double theta) {
  const double s = std::sin(theta);
  if (theta <= 0.0 || theta >= kPi || s == 0.0) {
    throw Error(ErrorKind::singular_input, "u(alpha, theta) is singular at theta = " + std::to_string(theta));
  }
  return 0.5 * (1.0 + std::tan(alpha) * std::cos(theta) / s);
}

inline double u(const BaseAngle& alpha, double theta) { return u(alpha.value(), theta); }

/// Applies branch `b` without any reduction mod pi. Throws a range error when the image
/// leaves [0, pi], which means an inadmissible branch was applied.
inline double apply_branch(Branch b, double theta, double alpha) {
  double out = 0.0;
  switch (b) {
    case Branch::advance: out = theta + 2.0 * alpha; break;
    case Branch::far_reflect: out = -theta + 2.0 * kPi - 4.0 * alpha; break;
    case Branch::retreat: out = theta - 2.0 * alpha; break;
    case Branch::near_reflect: out = -theta + 4.0 * alpha; break;
  }
  constexpr double slack = 1e-12;
  if (out < -slack || out > kPi + slack) {
    throw Error(ErrorKind::range, "branch T" + std::to_string(index(b)) + " maps " + std::to_string(theta) +
                                      " outside [0, pi]");
  }
  return std::clamp(out, 0.0, kPi);
}

inline double apply_branch(Branch b, double theta, const BaseAngle& alpha) {
  return apply_branch(b, theta, alpha.value());
}

/// Exact image of a pi-fraction under a branch, alpha given as a pi-fraction.
inline PiFraction apply_branch(Branch b, const PiFraction& theta, const PiFraction& alpha) {
  switch (b) {
    case Branch::advance: return theta + 2 * alpha;
    case Branch::far_reflect: return -theta + 2 - 4 * alpha;
    case Branch::retreat: return theta - 2 * alpha;
    case Branch::near_reflect: return -theta + 4 * alpha;
  }
  return theta;
}

/// The seven half-open pieces on which the probabilities have a single closed form:
/// [0,a) [a,2a) [2a,3a) [3a,pi-3a) [pi-3a,pi-2a) [pi-2a,pi-a) [pi-a,pi].
enum class Piece : std::uint8_t {
  below_a,
  a_to_2a,
  two_a_to_3a,
  middle,
  pi_minus_3a,
  pi_minus_2a,
  pi_minus_a,
};

struct PieceLocation {
  Piece piece;
  bool on_left_edge;  // theta equals the piece's left endpoint
};

/// Breakpoints {a, 2a, 3a, pi-3a, pi-2a, pi-a} in floating point.
inline std::array<double, 6> breakpoints(double alpha) {
  return {alpha, 2.0 * alpha, 3.0 * alpha, kPi - 3.0 * alpha, kPi - 2.0 * alpha, kPi - alpha};
}

inline PieceLocation locate_piece(double theta, double alpha) {
  const auto b = breakpoints(alpha);
  int piece = 0;
  while (piece < 6 && theta >= b[static_cast<std::size_t>(piece)]) ++piece;
  const bool edge = piece > 0 && theta == b[static_cast<std::size_t>(piece - 1)];
  return {static_cast<Piece>(piece), edge};
}

inline PieceLocation locate_piece(const PiFraction& theta, const PiFraction& alpha) {
  const std::array<PiFraction, 6> b = {alpha, 2 * alpha, 3 * alpha, 1 - 3 * alpha, 1 - 2 * alpha, 1 - alpha};
  int piece = 0;
  while (piece < 6 && theta >= b[static_cast<std::size_t>(piece)]) ++piece;
  const bool edge = piece > 0 && theta == b[static_cast<std::size_t>(piece - 1)];
  return {static_cast<Piece>(piece), edge};
}

namespace detail {

inline void settle(BranchProbabilities& pr) {
  for (double& v : pr.p) {
    if (v < 0.0) {
      if (v < -1e-12) {
        throw Error(ErrorKind::numerical, "branch probability " + std::to_string(v) + " is negative");
      }
      v = 0.0;
    }
  }
  const double total = pr.sum();
  const double drift = std::abs(total - 1.0);
  if (drift > 1e-12) {
    if (drift > 1e-9) {
      throw Error(ErrorKind::numerical, "branch probabilities sum to " + std::to_string(total));
    }
    for (double& v : pr.p) v /= total;
  }
}

}  // namespace detail

/// Probabilities at theta given its piece. Each closed form is the table entry rewritten
/// as a ratio of sines, e.g. u_a(t) = sin(t + a) / (2 sin t cos a) and
/// u_a(t) - 2cos(2a) u_2a(t) = sin(t - (pi - 3a)) / (2 sin t cos a), so a probability
/// that vanishes at a breakpoint evaluates to exactly zero there.
inline BranchProbabilities probabilities_in_piece(double theta, double alpha, PieceLocation loc) {
  const auto b = breakpoints(alpha);
  if (loc.on_left_edge) theta = b[static_cast<std::size_t>(static_cast<int>(loc.piece) - 1)];

  BranchProbabilities pr;
  auto& [p1, p2, p3, p4] = pr.p;
  const double sin_t = std::sin(theta);
  const double c = 2.0 * sin_t * std::cos(alpha);
  switch (loc.piece) {
    case Piece::below_a:
      p1 = 1.0;
      break;
    case Piece::a_to_2a:
      p1 = std::sin(theta + alpha) / c;
      p4 = std::sin(theta - b[0]) / c;
      break;
    case Piece::two_a_to_3a:
      p1 = std::sin(theta + alpha) / c;
      p3 = std::sin(theta - b[1]) / sin_t;
      p4 = std::sin(b[2] - theta) / c;
      break;
    case Piece::middle:
      p1 = std::sin(theta + alpha) / c;
      p3 = std::sin(theta - alpha) / c;
      break;
    case Piece::pi_minus_3a:
      p1 = std::sin(b[4] - theta) / sin_t;
      p2 = std::sin(theta - b[3]) / c;
      p3 = std::sin(theta - alpha) / c;
      break;
    case Piece::pi_minus_2a:
      p2 = std::sin(b[5] - theta) / c;
      p3 = std::sin(theta - alpha) / c;
      break;
    case Piece::pi_minus_a:
      p3 = 1.0;
      break;
  }
  detail::settle(pr);
  return pr;
}

/// The Feres branch probabilities at theta in [0, pi].
inline BranchProbabilities branch_probabilities(double theta, double alpha) {
  if (!(theta >= 0.0) || !(theta <= kPi)) {
    throw Error(ErrorKind::range, "theta " + std::to_string(theta) + " outside [0, pi]");
  }
  return probabilities_in_piece(theta, alpha, locate_piece(theta, alpha));
}

inline BranchProbabilities branch_probabilities(double theta, const BaseAngle& alpha) {
  return branch_probabilities(theta, alpha.value());
}

/// Uses exact piece location when both theta and alpha are exact pi-fractions.
inline BranchProbabilities branch_probabilities(const Angle& theta, const BaseAngle& alpha) {
  if (theta.exact() && alpha.exact()) {
    return probabilities_in_piece(theta.value(), alpha.value(), locate_piece(*theta.exact(), *alpha.exact()));
  }
  return branch_probabilities(theta.value(), alpha.value());
}

/// Branches with strictly positive probability at theta.
inline std::vector<Branch> admissible_branches(const BranchProbabilities& pr) {
  std::vector<Branch> out;
  for (Branch b : kBranches) {
    if (pr[b] > 0.0) out.push_back(b);
  }
  return out;
}

inline std::vector<Branch> admissible_branches(double theta, const BaseAngle& alpha) {
  return admissible_branches(branch_probabilities(theta, alpha));
}

inline std::vector<Branch> admissible_branches(const Angle& theta, const BaseAngle& alpha) {
  return admissible_branches(branch_probabilities(theta, alpha));
}

inline bool is_admissible(Branch b, double theta, const BaseAngle& alpha) {
  return branch_probabilities(theta, alpha)[b] > 0.0;
}

/// Inverse-CDF choice on the cumulative partition J_k: branch k is selected when
/// sum_{i<k} p_i <= x < sum_{i<=k} p_i. Values of x past the last cumulative sum (only
/// possible through rounding, or x = 1) fall to the last branch with positive mass.
inline Branch select_branch(const BranchProbabilities& pr, double x) {
  double cumulative = 0.0;
  Branch last = Branch::advance;
  for (Branch b : kBranches) {
    const double p = pr[b];
    if (p <= 0.0) continue;
    cumulative += p;
    last = b;
    if (x < cumulative) return b;
  }
  return last;
}

struct Step {
  Branch branch;
  double theta;
};

/// One draw of the random map at theta in (0, pi).
template <class URBG>
Step sample_step(double theta, const BaseAngle& alpha, URBG& rng) {
  if (!(theta > 0.0) || !(theta < kPi)) {
    throw Error(ErrorKind::singular_input, "cannot sample the random map at theta = " + std::to_string(theta));
  }
  const BranchProbabilities pr = branch_probabilities(theta, alpha.value());
  const Branch b = select_branch(pr, uniform01(rng));
  return {b, apply_branch(b, theta, alpha.value())};
}

}  // namespace feres

#endif  // FERES_FERES_MAP_HPP
