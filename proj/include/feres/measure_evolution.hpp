#ifndef FERES_MEASURE_EVOLUTION_HPP
#define FERES_MEASURE_EVOLUTION_HPP

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feres/angles.hpp"
#include "feres/circle_billiard.hpp"
#include "feres/errors.hpp"
#include "feres/feres_map.hpp"
#include "feres/random.hpp"
#include "feres/statistics.hpp"

namespace feres {

/// Shape assumed for the mass inside each cell: flat (Lebesgue) or proportional to
/// sin(theta) (the invariant measure mu).
enum class BaseMeasure { lebesgue, mu };

inline const char* to_string(BaseMeasure m) { return m == BaseMeasure::mu ? "mu" : "lebesgue"; }

/// Probability masses on N equal cells of [0, pi].
struct AngleDensity {
  std::vector<double> masses;
  BaseMeasure reference = BaseMeasure::lebesgue;

  std::size_t bins() const noexcept { return masses.size(); }
  double width() const noexcept { return kPi / static_cast<double>(masses.size()); }
  double left(std::size_t i) const noexcept { return kPi * static_cast<double>(i) / static_cast<double>(masses.size()); }
  double right(std::size_t i) const noexcept {
    return kPi * static_cast<double>(i + 1) / static_cast<double>(masses.size());
  }
  double total() const noexcept {
    double s = 0.0;
    for (double m : masses) s += m;
    return s;
  }
};

inline void validate(const AngleDensity& d) {
  if (d.bins() < 2) throw Error(ErrorKind::grid, "a density needs at least 2 bins");
  for (double m : d.masses) {
    if (!(m >= 0.0)) throw Error(ErrorKind::validation, "density masses must be nonnegative");
  }
  if (std::abs(d.total() - 1.0) > 1e-12) {
    throw Error(ErrorKind::validation, "density masses sum to " + std::to_string(d.total()));
  }
}

namespace detail {

inline void normalize(AngleDensity& d) {
  const double t = d.total();
  if (!(t > 0.0)) throw Error(ErrorKind::validation, "density has no mass on the grid");
  for (double& m : d.masses) m /= t;
}

inline double mu_mass(double a, double b) { return 0.5 * (std::cos(a) - std::cos(b)); }

// Branch image without range checks or clamping.
inline double branch_image(Branch b, double theta, double a) {
  switch (b) {
    case Branch::advance: return theta + 2.0 * a;
    case Branch::far_reflect: return -theta + 2.0 * kPi - 4.0 * a;
    case Branch::retreat: return theta - 2.0 * a;
    case Branch::near_reflect: return -theta + 4.0 * a;
  }
  return theta;
}

}  // namespace detail

/// mu(cell) = (cos(left) - cos(right)) / 2 on every cell.
inline AngleDensity discretized_mu(std::size_t bins, BaseMeasure reference = BaseMeasure::lebesgue) {
  AngleDensity d{std::vector<double>(bins), reference};
  for (std::size_t i = 0; i < bins; ++i) d.masses[i] = detail::mu_mass(d.left(i), d.right(i));
  detail::normalize(d);
  return d;
}

/// Normalized Lebesgue measure restricted to [a, b].
inline AngleDensity uniform_on(double a, double b, std::size_t bins) {
  if (!(a < b) || a < 0.0 || b > kPi) throw Error(ErrorKind::validation, "uniform_on needs 0 <= a < b <= pi");
  AngleDensity d{std::vector<double>(bins), BaseMeasure::lebesgue};
  for (std::size_t i = 0; i < bins; ++i) {
    d.masses[i] = std::max(0.0, std::min(b, d.right(i)) - std::max(a, d.left(i)));
  }
  detail::normalize(d);
  return d;
}

/// mu restricted to [a, b], renormalized: density proportional to 1_[a,b] sin(theta).
inline AngleDensity mu_restricted(double a, double b, std::size_t bins) {
  if (!(a < b) || a < 0.0 || b > kPi) throw Error(ErrorKind::validation, "mu_restricted needs 0 <= a < b <= pi");
  AngleDensity d{std::vector<double>(bins), BaseMeasure::mu};
  for (std::size_t i = 0; i < bins; ++i) {
    const double lo = std::max(a, d.left(i)), hi = std::min(b, d.right(i));
    d.masses[i] = hi > lo ? detail::mu_mass(lo, hi) : 0.0;
  }
  detail::normalize(d);
  return d;
}

/// Smallest multiple of 4n that is >= min_bins for alpha = m*pi/n. On such a grid every
/// breakpoint, branch shift and invariant-interval endpoint falls on a cell boundary,
/// so the discrete transport never smears mass across them.
inline std::size_t aligned_bins(const BaseAngle& alpha, std::size_t min_bins) {
  if (!alpha.is_rational()) return min_bins;
  const auto step = static_cast<std::size_t>(4 * alpha.denominator());
  return ((std::max<std::size_t>(min_bins, 1) + step - 1) / step) * step;
}

/// Nodes and weights of the M-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule gauss_legendre(int points) {
  if (points < 1) throw Error(ErrorKind::validation, "quadrature needs at least one node");
  const Eigen::Index m = points;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 1; k < m; ++k) {
    const double kk = static_cast<double>(k);
    const double beta = kk / std::sqrt(4.0 * kk * kk - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  for (Eigen::Index k = 0; k < m; ++k) {
    rule.nodes.push_back(eig.eigenvalues()(k));
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights.push_back(2.0 * v0 * v0);
  }
  return rule;
}

/// The one-step transition kernel discretized on a fixed grid.
///
/// Row i lists where the mass of cell i goes. Inside a cell the mass is spread like the
/// reference measure; the cell is cut at the probability breakpoints and, per branch, at
/// the preimages of target-cell boundaries, and each piece's share is the M-point
/// Gauss-Legendre integral of p_k times the reference weight.
class TransferOperator {
 public:
  struct Entry {
    std::size_t target;
    double fraction;
  };

  TransferOperator(const BaseAngle& alpha, std::size_t bins, BaseMeasure reference, int quadrature_nodes = 8)
      : alpha_(alpha), bins_(bins), reference_(reference), rows_(bins) {
    if (bins < 2) throw Error(ErrorKind::grid, "transfer operator needs at least 2 bins");
    build(gauss_legendre(quadrature_nodes));
  }

  std::size_t bins() const noexcept { return bins_; }
  BaseMeasure reference() const noexcept { return reference_; }
  const std::vector<Entry>& row(std::size_t i) const { return rows_.at(i); }

  AngleDensity apply(const AngleDensity& d) const {
    if (d.bins() != bins_) {
      throw Error(ErrorKind::grid, "density has " + std::to_string(d.bins()) + " bins, operator has " +
                                       std::to_string(bins_));
    }
    AngleDensity out{std::vector<double>(bins_, 0.0), d.reference};
    for (std::size_t i = 0; i < bins_; ++i) {
      const double m = d.masses[i];
      if (m == 0.0) continue;
      for (const Entry& e : rows_[i]) out.masses[e.target] += m * e.fraction;
    }
    return out;
  }

 private:
  double weight(double theta) const { return reference_ == BaseMeasure::mu ? std::sin(theta) : 1.0; }

  void build(const QuadratureRule& rule) {
    const double a = alpha_.value();
    const double h = kPi / static_cast<double>(bins_);
    const double merge = 1e-9 * h;
    const auto bp = breakpoints(a);

    auto integrate = [&](Branch b, PieceLocation loc, double lo, double hi) {
      const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
      double s = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double th = mid + half * rule.nodes[q];
        s += rule.weights[q] * probabilities_in_piece(th, a, loc)[b] * weight(th);
      }
      return s * half;
    };

    for (std::size_t i = 0; i < bins_; ++i) {
      const double left = h * static_cast<double>(i), right = h * static_cast<double>(i + 1);
      std::vector<double> cuts{left, right};
      for (double x : bp) {
        if (x > left + merge && x < right - merge) cuts.push_back(x);
      }
      std::sort(cuts.begin(), cuts.end());

      std::map<std::size_t, double> targets;
      double row_total = 0.0;
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double lo = cuts[c], hi = cuts[c + 1];
        const PieceLocation loc{locate_piece(0.5 * (lo + hi), a).piece, false};
        const BranchProbabilities probe = probabilities_in_piece(0.5 * (lo + hi), a, loc);
        for (Branch b : kBranches) {
          if (!(probe[b] > 0.0)) continue;
          // Every branch is affine with slope +-1: image(t) = c + slope * t.
          const int slope = derivative_sign(b);
          const double c = detail::branch_image(b, 0.0, a);
          auto image = [&](double th) { return c + slope * th; };
          auto preimage = [&](double x) { return slope * (x - c); };

          const double x0 = std::min(image(lo), image(hi)), x1 = std::max(image(lo), image(hi));
          std::vector<double> sub{lo, hi};
          const auto first = static_cast<std::int64_t>(std::floor(x0 / h)) + 1;
          for (std::int64_t k = first; static_cast<double>(k) * h < x1; ++k) {
            const double x = static_cast<double>(k) * h;
            if (x <= x0 + merge || x >= x1 - merge) continue;
            sub.push_back(preimage(x));
          }
          std::sort(sub.begin(), sub.end());
          for (std::size_t k = 0; k + 1 < sub.size(); ++k) {
            const double u = sub[k], v = sub[k + 1];
            if (v - u <= merge) continue;
            const double share = integrate(b, loc, u, v);
            if (!(share > 0.0)) continue;
            const double dest = image(0.5 * (u + v));
            const auto cell = std::min(bins_ - 1, static_cast<std::size_t>(std::max(0.0, dest) / h));
            targets[cell] += share;
            row_total += share;
          }
        }
      }
      for (const auto& [cell, share] : targets) rows_[i].push_back({cell, share / row_total});
    }
  }

  BaseAngle alpha_;
  std::size_t bins_;
  BaseMeasure reference_;
  std::vector<std::vector<Entry>> rows_;
};

/// One application of the transition kernel to a binned density.
inline AngleDensity kernel_pushforward(const AngleDensity& d, const BaseAngle& alpha, int quadrature_nodes = 8) {
  validate(d);
  return TransferOperator(alpha, d.bins(), d.reference, quadrature_nodes).apply(d);
}

/// Independent draws of the random map, one per particle, from the given generator.
template <class URBG>
std::vector<double> ensemble_step(std::span<const double> particles, const BaseAngle& alpha, URBG& rng) {
  std::vector<double> out;
  out.reserve(particles.size());
  for (double th : particles) out.push_back(sample_step(th, alpha, rng).theta);
  return out;
}

inline std::vector<double> ensemble_step(std::span<const double> particles, const BaseAngle& alpha,
                                         std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::ensemble);
  return ensemble_step(particles, alpha, rng);
}

/// Half the l1 distance between two densities on the same grid.
inline double total_variation(const AngleDensity& a, const AngleDensity& b) {
  if (a.bins() != b.bins()) {
    throw Error(ErrorKind::grid, "total variation needs equal grids, got " + std::to_string(a.bins()) + " and " +
                                     std::to_string(b.bins()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) s += std::abs(a.masses[i] - b.masses[i]);
  return 0.5 * s;
}

using DensityObserver = std::function<void(std::size_t step, const AngleDensity&)>;

/// Iterates the kernel from `initial` and records TV(nu_k, mu) for k = 0..steps, with mu
/// discretized on the same grid. `observer`, if set, sees every iterate.
inline std::vector<double> knudsen_run(const AngleDensity& initial, const BaseAngle& alpha, std::size_t steps,
                                       const DensityObserver& observer = {}, int quadrature_nodes = 8) {
  validate(initial);
  const TransferOperator op(alpha, initial.bins(), initial.reference, quadrature_nodes);
  const AngleDensity target = discretized_mu(initial.bins(), initial.reference);
  std::vector<double> tv;
  tv.reserve(steps + 1);
  AngleDensity current = initial;
  for (std::size_t k = 0;; ++k) {
    if (observer) observer(k, current);
    tv.push_back(total_variation(current, target));
    if (k == steps) break;
    current = op.apply(current);
  }
  return tv;
}

/// The n disjoint open intervals I_j = ((2j-1)pi/2n - pi/4n, (2j-1)pi/2n + pi/4n) for
/// alpha = m*pi/n, with their centers, as exact pi-fractions.
struct InvariantIntervalFamily {
  std::int64_t m = 0;
  std::int64_t n = 0;
  PiFraction epsilon;
  std::vector<PiFraction> centers;
  std::vector<std::pair<PiFraction, PiFraction>> intervals;

  PiFraction total_length() const {
    PiFraction s(0);
    for (const auto& [a, b] : intervals) s += b - a;
    return s;
  }

  std::vector<std::pair<double, double>> radians() const {
    std::vector<std::pair<double, double>> out;
    for (const auto& [a, b] : intervals) out.emplace_back(to_radians(a), to_radians(b));
    return out;
  }

  /// mu of the union, (cos a - cos b) / 2 summed over the intervals.
  double mu_measure() const {
    double s = 0.0;
    for (const auto& [a, b] : radians()) s += detail::mu_mass(a, b);
    return s;
  }
};

inline InvariantIntervalFamily invariant_intervals(const BaseAngle& alpha) {
  if (!alpha.is_rational()) {
    throw Error(ErrorKind::precondition, "invariant intervals exist only for alpha = m*pi/n");
  }
  InvariantIntervalFamily f;
  f.m = alpha.numerator();
  f.n = alpha.denominator();
  f.epsilon = PiFraction(1, 4 * f.n);
  for (std::int64_t j = 1; j <= f.n; ++j) {
    const PiFraction c(2 * j - 1, 2 * f.n);
    f.centers.push_back(c);
    f.intervals.emplace_back(c - f.epsilon, c + f.epsilon);
  }
  return f;
}

struct InvariantFamilyReport {
  bool ok = true;
  std::size_t pairs_checked = 0;
  bool disjoint = true;
  bool single_piece = true;
  bool centers_invariant = true;
  bool grid_invariant = true;
  PiFraction total_length;
  std::vector<std::string> violations;
};

/// Exact check that every branch with positive probability on I_j maps it onto some
/// I_l, that the centers {(2j-1)pi/2n} and the grid {k pi/n} are branch-invariant, and
/// that the intervals are disjoint with total length pi/2.
inline InvariantFamilyReport invariant_family_check(const BaseAngle& alpha) {
  const InvariantIntervalFamily f = invariant_intervals(alpha);
  const PiFraction a = *alpha.exact();
  InvariantFamilyReport r;
  r.total_length = f.total_length();

  auto fail = [&](bool& flag, const std::string& what) {
    flag = false;
    r.ok = false;
    r.violations.push_back(what);
  };
  auto probabilities = [&](const PiFraction& x) {
    return branch_probabilities(Angle::pi_fraction(x.numerator(), x.denominator()), alpha);
  };

  for (std::size_t j = 1; j < f.intervals.size(); ++j) {
    if (f.intervals[j - 1].second > f.intervals[j].first) {
      fail(r.disjoint, "I_" + std::to_string(j) + " overlaps I_" + std::to_string(j + 1));
    }
  }
  if (r.total_length != PiFraction(1, 2)) fail(r.disjoint, "total length is " + to_string(r.total_length) + " pi");

  for (std::size_t j = 0; j < f.intervals.size(); ++j) {
    const auto& [lo, hi] = f.intervals[j];
    const PieceLocation l0 = locate_piece(lo, a), l1 = locate_piece(hi, a);
    if (l0.piece != l1.piece && !(l1.on_left_edge && static_cast<int>(l1.piece) == static_cast<int>(l0.piece) + 1)) {
      fail(r.single_piece, "I_" + std::to_string(j + 1) + " straddles a probability breakpoint");
    }
    const BranchProbabilities pr = probabilities(f.centers[j]);
    for (Branch b : kBranches) {
      if (!(pr[b] > 0.0)) continue;
      ++r.pairs_checked;
      PiFraction x0 = apply_branch(b, lo, a), x1 = apply_branch(b, hi, a);
      if (x0 > x1) std::swap(x0, x1);
      const bool hit = std::any_of(f.intervals.begin(), f.intervals.end(),
                                   [&](const auto& iv) { return iv.first == x0 && iv.second == x1; });
      if (!hit) {
        fail(r.ok, "T" + std::to_string(index(b)) + "(I_" + std::to_string(j + 1) + ") = (" + to_string(x0) + ", " +
                       to_string(x1) + ") pi is not a member of the family");
      }
      const PiFraction c = apply_branch(b, f.centers[j], a);
      if (std::find(f.centers.begin(), f.centers.end(), c) == f.centers.end()) {
        fail(r.centers_invariant, "T" + std::to_string(index(b)) + " moves a center off the center set");
      }
    }
  }

  for (std::int64_t k = 0; k <= f.n; ++k) {
    const PiFraction x(k, f.n);
    const BranchProbabilities pr = probabilities(x);
    for (Branch b : kBranches) {
      if (!(pr[b] > 0.0)) continue;
      const PiFraction y = apply_branch(b, x, a);
      if ((y * f.n).denominator() != 1 || y < 0 || y > 1) {
        fail(r.grid_invariant, "T" + std::to_string(index(b)) + "(" + to_string(x) + " pi) leaves the grid");
      }
    }
  }
  return r;
}

/// Cells carrying positive mass that are not contained in the closure of any interval.
inline std::size_t cells_outside(const AngleDensity& d, std::span<const std::pair<double, double>> intervals) {
  const double tol = 1e-9 * d.width();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < d.bins(); ++i) {
    if (!(d.masses[i] > 0.0)) continue;
    const bool inside = std::any_of(intervals.begin(), intervals.end(), [&](const auto& iv) {
      return d.left(i) >= iv.first - tol && d.right(i) <= iv.second + tol;
    });
    if (!inside) ++bad;
  }
  return bad;
}

/// Deterministic representation of the random map on [0, 1] x [0, pi].
struct SkewState {
  double x = 0.0;
  double theta = kPi / 2.0;
};

struct SkewStep {
  Branch branch;
  SkewState state;
};

/// S(x, theta) = (phi_k(x, theta), T_k(theta)) for the k with x in J_k, where
/// phi_k(x, theta) = (x - sum_{i<k} p_i(theta)) / p_k(theta).
inline SkewStep skew_step(const SkewState& st, const BaseAngle& alpha) {
  if (!(st.theta > 0.0) || !(st.theta < kPi)) {
    throw Error(ErrorKind::singular_input, "skew product is undefined at theta = " + std::to_string(st.theta));
  }
  if (!(st.x >= 0.0) || !(st.x <= 1.0)) throw Error(ErrorKind::range, "skew coordinate x must lie in [0, 1]");
  const BranchProbabilities pr = branch_probabilities(st.theta, alpha);
  const Branch b = select_branch(pr, st.x);
  double before = 0.0;
  for (Branch k : kBranches) {
    if (k == b) break;
    before += pr[k];
  }
  const double phi = std::clamp((st.x - before) / pr[b], 0.0, 1.0);
  return {b, {phi, apply_branch(b, st.theta, alpha)}};
}

/// max_f |int sum_i p_i(t) f(T_i t) dmu(t) - int f dmu| with adaptive Gauss-Kronrod
/// quadrature on each of the seven probability pieces.
inline double liouville_residual(const BaseAngle& alpha, std::span<const std::function<double(double)>> tests) {
  const double a = alpha.value();
  std::vector<double> edges{0.0};
  for (double b : breakpoints(a)) edges.push_back(b);
  edges.push_back(kPi);

  double worst = 0.0;
  for (const auto& f : tests) {
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const PieceLocation loc{static_cast<Piece>(p), false};
      auto integrand = [&](double th) {
        const BranchProbabilities pr = probabilities_in_piece(th, a, loc);
        double pushed = 0.0;
        for (Branch b : kBranches) {
          if (pr[b] > 0.0) pushed += pr[b] * f(detail::branch_image(b, th, a));
        }
        return 0.5 * std::sin(th) * (pushed - f(th));
      };
      double err = 0.0;
      const double piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          integrand, edges[p], edges[p + 1], 10, 1e-12, &err);
      if (err > 1e-10) {
        throw Error(ErrorKind::numerical, "quadrature did not converge on piece " + std::to_string(p) +
                                              ", achieved error estimate " + std::to_string(err));
      }
      total += piece;
    }
    worst = std::max(worst, std::abs(total));
  }
  return worst;
}

/// Draws an angle from a binned density: a cell by mass, then a point inside it shaped
/// by the density's reference measure. Never returns an endpoint of [0, pi].
template <class URBG>
double sample_angle(const AngleDensity& d, URBG& rng) {
  const double x = uniform01(rng);
  double cumulative = 0.0;
  std::size_t cell = d.bins() - 1;
  for (std::size_t i = 0; i < d.bins(); ++i) {
    cumulative += d.masses[i];
    if (x < cumulative) {
      cell = i;
      break;
    }
  }
  while (d.masses[cell] == 0.0 && cell > 0) --cell;
  const double lo = d.left(cell), hi = d.right(cell);
  const double v = uniform01(rng) + 0x1p-54;  // strictly inside (0, 1)
  const double theta = d.reference == BaseMeasure::mu
                           ? std::acos(std::cos(lo) - v * (std::cos(lo) - std::cos(hi)))
                           : lo + v * (hi - lo);
  return std::clamp(theta, std::nextafter(0.0, 1.0), std::nextafter(kPi, 0.0));
}

struct ProductMeasureOptions {
  std::size_t particles = 20000;
  std::uint64_t seed = 0;
  std::size_t checkpoints = 10;
  std::size_t s_bins = 20;
  int quadrature_nodes = 8;
};

struct ProductMeasureResult {
  std::vector<double> angle_tv;           // TV(nu2^(k), mu), k = 0..n
  std::vector<std::size_t> checked_steps;  // times at which the s-marginal was tested
  std::vector<stats::ChiSquare> s_marginal;
  bool s_marginal_uniform = true;  // every p-value above 0.001
};

/// Evolution of lambda x nu2 under the circle billiard. The angle marginal follows the
/// transfer operator; the position marginal is tested for uniformity by a particle
/// cloud driven through the full circle map, at evenly spaced checkpoints.
inline ProductMeasureResult product_measure_evolution(bool uniform_first, const AngleDensity& nu2,
                                                      const BaseAngle& alpha, std::size_t n,
                                                      const ProductMeasureOptions& options = {}) {
  if (!uniform_first) {
    throw Error(ErrorKind::precondition,
                "the product-measure result needs a uniform first marginal; other initial laws are unsupported");
  }
  validate(nu2);
  if (options.s_bins < 2 || options.particles == 0) {
    throw Error(ErrorKind::validation, "product-measure run needs >= 2 s-bins and >= 1 particle");
  }

  ProductMeasureResult r;
  r.angle_tv = knudsen_run(nu2, alpha, n, {}, options.quadrature_nodes);

  std::vector<std::size_t> marks{0};
  const std::size_t k = std::max<std::size_t>(options.checkpoints, 1);
  for (std::size_t i = 1; i <= k && n > 0; ++i) {
    const std::size_t t = (n * i) / k;
    if (t > marks.back()) marks.push_back(t);
  }

  Rng rng = make_rng(options.seed, Stream::product_measure);
  std::vector<PhasePoint> cloud(options.particles);
  for (auto& p : cloud) {
    p.s = kTwoPi * uniform01(rng);
    p.theta = sample_angle(nu2, rng);
  }
  std::vector<double> s(cloud.size());
  std::size_t next = 0;
  for (std::size_t step = 0;; ++step) {
    if (next < marks.size() && marks[next] == step) {
      for (std::size_t i = 0; i < cloud.size(); ++i) s[i] = cloud[i].s;
      const auto counts = stats::histogram(s, 0.0, kTwoPi, options.s_bins);
      const stats::ChiSquare chi = stats::chi_square_uniform(counts);
      r.checked_steps.push_back(step);
      r.s_marginal.push_back(chi);
      if (!(chi.p_value > 1e-3)) r.s_marginal_uniform = false;
      ++next;
    }
    if (step == n) break;
    for (auto& p : cloud) {
      const Step st = sample_step(p.theta, alpha, rng);
      p = {reduce_mod_two_pi(p.s + 2.0 * st.theta), st.theta};
    }
  }
  return r;
}

}  // namespace feres

#endif  // FERES_MEASURE_EVOLUTION_HPP
