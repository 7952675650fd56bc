#ifndef FERES_REACHABLE_SET_HPP
#define FERES_REACHABLE_SET_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "feres/angles.hpp"
#include "feres/errors.hpp"
#include "feres/feres_map.hpp"

namespace feres {

/// sign * theta0 + j * pi + k * alpha, relative to a fixed base angle theta0.
struct SymbolicAngle {
  int sign = 1;
  std::int64_t j = 0;
  std::int64_t k = 0;

  friend bool operator==(const SymbolicAngle&, const SymbolicAngle&) = default;
};

inline SymbolicAngle apply_branch(Branch b, const SymbolicAngle& a) {
  switch (b) {
    case Branch::advance: return {a.sign, a.j, a.k + 2};
    case Branch::far_reflect: return {-a.sign, -a.j + 2, -a.k - 4};
    case Branch::retreat: return {a.sign, a.j, a.k - 2};
    case Branch::near_reflect: return {-a.sign, -a.j, -a.k + 4};
  }
  return a;
}

namespace detail {

inline double raw_symbolic_value(const SymbolicAngle& a, double theta0, const BaseAngle& alpha) {
  if (alpha.is_rational()) {
    // j*pi + k*m*pi/n folded into one multiple of pi/n.
    const std::int64_t c = a.j * alpha.denominator() + a.k * alpha.numerator();
    return a.sign * theta0 + static_cast<double>(c) * kPi / static_cast<double>(alpha.denominator());
  }
  return a.sign * theta0 + static_cast<double>(a.j) * kPi + static_cast<double>(a.k) * alpha.value();
}

}  // namespace detail

/// Radian value of a symbolic angle. Throws an invariant error if it leaves [0, pi].
inline double symbolic_value(const SymbolicAngle& a, double theta0, const BaseAngle& alpha) {
  const double v = detail::raw_symbolic_value(a, theta0, alpha);
  if (v < -1e-12 || v > kPi + 1e-12) {
    throw Error(ErrorKind::invariant, "symbolic angle (" + std::to_string(a.sign) + ", " + std::to_string(a.j) +
                                          ", " + std::to_string(a.k) + ") has value " + std::to_string(v) +
                                          " outside [0, pi]");
  }
  return std::clamp(v, 0.0, kPi);
}

/// Exact pi-fraction of a symbolic angle when theta0 and alpha are both exact.
inline std::optional<PiFraction> symbolic_exact(const SymbolicAngle& a, const Angle& theta0, const BaseAngle& alpha) {
  if (!theta0.exact() || !alpha.exact()) return std::nullopt;
  return PiFraction(a.sign) * *theta0.exact() + PiFraction(a.j) + PiFraction(a.k) * *alpha.exact();
}

struct Transition {
  Branch branch;
  double probability;
  std::size_t target;  // npos when the image lies beyond a truncation horizon
};

struct ReachableState {
  SymbolicAngle symbol;
  double value = 0.0;
  std::optional<PiFraction> exact;
  int depth = 0;
  std::vector<Transition> transitions;
};

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
inline constexpr int kDefaultIrrationalDepth = 12;

/// The set C(theta0) of angles reachable by admissible branch words.
///
/// State identity is decided symbolically. With theta0 and alpha both exact the key is
/// the exact pi-fraction of the value; with only alpha = m*pi/n exact it is
/// (sign, j*n + k*m); otherwise it is the raw (sign, j, k) triple.
class ReachableSet {
 public:
  const Angle& base() const noexcept { return base_; }
  const BaseAngle& alpha() const noexcept { return alpha_; }
  const std::vector<ReachableState>& states() const noexcept { return states_; }
  const ReachableState& operator[](std::size_t i) const { return states_.at(i); }
  std::size_t size() const noexcept { return states_.size(); }
  bool truncated() const noexcept { return truncated_; }
  std::optional<int> depth_limit() const noexcept { return depth_limit_; }

  std::optional<std::size_t> find(const SymbolicAngle& a) const {
    const auto it = index_.find(key(a));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(states_.size());
    for (const auto& s : states_) out.push_back(s.value);
    return out;
  }

 private:
  friend ReachableSet reachable_angles(const Angle&, const BaseAngle&, std::optional<int>);

  using Key = std::tuple<int, std::int64_t, std::int64_t, std::int64_t>;

  ReachableSet(Angle base, BaseAngle alpha) : base_(base), alpha_(alpha) {}

  Key key(const SymbolicAngle& a) const {
    if (auto q = symbolic_exact(a, base_, alpha_)) return {0, 0, q->numerator(), q->denominator()};
    if (alpha_.is_rational()) return {1, a.sign, a.j * alpha_.denominator() + a.k * alpha_.numerator(), 0};
    return {2, a.sign, a.j, a.k};
  }

  Angle base_;
  BaseAngle alpha_;
  std::vector<ReachableState> states_;
  std::map<Key, std::size_t> index_;
  bool truncated_ = false;
  std::optional<int> depth_limit_;
};

/// Breadth-first closure of {theta0} under admissible branches. Terminates on its own for
/// rational alpha; for real alpha the search stops at `max_depth` (default 12) and the
/// result is flagged truncated when the horizon cut off any image.
inline ReachableSet reachable_angles(const Angle& theta0, const BaseAngle& alpha,
                                     std::optional<int> max_depth = std::nullopt) {
  if (!(theta0.value() > 0.0) || !(theta0.value() < kPi)) {
    throw Error(ErrorKind::singular_input, "reachable set needs 0 < theta0 < pi");
  }
  if (!max_depth && !alpha.is_rational()) max_depth = kDefaultIrrationalDepth;
  if (max_depth && *max_depth < 0) throw Error(ErrorKind::validation, "max_depth must be >= 0");

  constexpr std::size_t kMaxStates = 1'000'000;

  ReachableSet set(theta0, alpha);
  set.depth_limit_ = max_depth;

  auto add_state = [&](const SymbolicAngle& sym, int depth) {
    ReachableState st;
    st.symbol = sym;
    st.exact = symbolic_exact(sym, theta0, alpha);
    st.value = st.exact ? to_radians(*st.exact) : symbolic_value(sym, theta0.value(), alpha);
    st.depth = depth;
    set.index_.emplace(set.key(sym), set.states_.size());
    set.states_.push_back(std::move(st));
    if (set.states_.size() > kMaxStates) {
      throw Error(ErrorKind::numerical, "reachable set exceeded " + std::to_string(kMaxStates) + " states");
    }
    return set.states_.size() - 1;
  };

  add_state(SymbolicAngle{}, 0);
  for (std::size_t cursor = 0; cursor < set.states_.size(); ++cursor) {
    const ReachableState current = set.states_[cursor];
    const Angle here = current.exact ? Angle::pi_fraction(current.exact->numerator(), current.exact->denominator())
                                     : Angle::radians(current.value);
    const BranchProbabilities pr = branch_probabilities(here, alpha);
    const bool expand = !max_depth || current.depth < *max_depth;

    std::vector<Transition> transitions;
    for (Branch b : kBranches) {
      if (!(pr[b] > 0.0)) continue;
      const SymbolicAngle image = apply_branch(b, current.symbol);
      std::size_t target = npos;
      if (auto found = set.find(image)) {
        target = *found;
      } else if (expand) {
        target = add_state(image, current.depth + 1);
      } else {
        set.truncated_ = true;
      }
      transitions.push_back({b, pr[b], target});
    }
    set.states_[cursor].transitions = std::move(transitions);
  }
  return set;
}

/// Smallest gap between distinct state values and the number of adjacent pairs closer
/// than `tolerance`. For real alpha every triple is a distinct angle, so a coincidence
/// signals a floating-point accident worth reporting.
struct SeparationReport {
  double min_gap = std::numeric_limits<double>::infinity();
  std::size_t coincident_pairs = 0;
};

inline SeparationReport value_separation(const ReachableSet& set, double tolerance = 1e-12) {
  std::vector<double> v = set.values();
  std::sort(v.begin(), v.end());
  SeparationReport r;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double gap = v[i] - v[i - 1];
    r.min_gap = std::min(r.min_gap, gap);
    if (gap <= tolerance) ++r.coincident_pairs;
  }
  return r;
}

/// Whether pi/2 belongs to the set: decided exactly when the states carry exact values,
/// otherwise within 1e-12 (truncated evidence only for real alpha).
inline bool contains_right_angle(const ReachableSet& set) {
  for (const auto& s : set.states()) {
    if (s.exact) {
      if (*s.exact == PiFraction(1, 2)) return true;
    } else if (std::abs(s.value - kPi / 2.0) <= 1e-12) {
      return true;
    }
  }
  return false;
}

/// Row-stochastic matrix of the Markov chain on a reachable set, dense row-major.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(std::size_t n) : n_(n), data_(n * n, 0.0), substochastic_(n, false) {}

  static TransitionMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    TransitionMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw Error(ErrorKind::validation, "transition matrix must be square");
      for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Rows whose mass partly leaves a truncated set.
  const std::vector<bool>& substochastic_rows() const noexcept { return substochastic_; }
  void mark_substochastic(std::size_t i) { substochastic_[i] = true; }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j);
    return s;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
  std::vector<bool> substochastic_;
};

/// P[a][b] = sum of p_i(a) over branches with T_i(a) = b. With `strict`, a truncated set
/// is rejected instead of producing substochastic frontier rows.
inline TransitionMatrix transition_matrix(const ReachableSet& set, bool strict = false) {
  if (strict && set.truncated()) {
    throw Error(ErrorKind::truncation, "reachable set is truncated; its transition matrix is not stochastic");
  }
  TransitionMatrix m(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (const Transition& t : set[i].transitions) {
      if (t.target == npos) {
        m.mark_substochastic(i);
      } else {
        m(i, t.target) += t.probability;
      }
    }
  }
  return m;
}

namespace detail {

inline std::vector<bool> reach(const TransitionMatrix& p, std::size_t from, bool reverse) {
  const std::size_t n = p.size();
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = reverse ? p(v, u) : p(u, v);
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace detail

inline bool is_irreducible(const TransitionMatrix& p) {
  if (p.size() == 0) return false;
  const auto fwd = detail::reach(p, 0, false);
  const auto bwd = detail::reach(p, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

/// Period of an irreducible chain: gcd over edges u->v of level(u) + 1 - level(v), where
/// level is the breadth-first distance from state 0.
inline std::int64_t period(const TransitionMatrix& p) {
  if (!is_irreducible(p)) throw Error(ErrorKind::precondition, "period is only defined for irreducible chains");
  const std::size_t n = p.size();
  std::vector<std::int64_t> level(n, -1);
  std::deque<std::size_t> queue{0};
  level[0] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  std::int64_t g = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0.0) g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    }
  }
  return g;
}

inline bool is_aperiodic(const TransitionMatrix& p) { return period(p) == 1; }

/// Solves pi P = pi, sum(pi) = 1 by a full-pivot LU solve with iterative refinement.
/// Throws a numerical error if the residual max|pi P - pi| stays above 1e-12.
inline std::vector<double> stationary_distribution(const TransitionMatrix& p) {
  if (!is_irreducible(p)) {
    throw Error(ErrorKind::precondition, "stationary distribution requires an irreducible chain");
  }
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = p(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(rhs);

  auto residual = [&](const Eigen::VectorXd& v) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += v(i) * p(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      worst = std::max(worst, std::abs(s - v(j)));
    }
    return worst;
  };

  for (int iter = 0; iter < 3 && residual(x) > 1e-14; ++iter) {
    x += lu.solve(rhs - a * x);
  }
  x /= x.sum();
  const double r = residual(x);
  if (!(r <= 1e-12)) {
    throw Error(ErrorKind::numerical, "stationary solve residual " + std::to_string(r) + " exceeds 1e-12");
  }
  return {x.data(), x.data() + n};
}

/// Branch word driving theta0 into (0, alpha), built as in the reachability lemma:
/// apply T3 as long as it is admissible, and if that stops in (alpha, 2alpha) finish
/// with T4 then T3.
struct IntervalWitness {
  bool reached = false;
  std::vector<Branch> word;
  double final_angle = 0.0;
};

inline IntervalWitness reaches_interval(const Angle& theta0, const BaseAngle& alpha) {
  if (!(theta0.value() > 0.0) || !(theta0.value() < kPi)) {
    throw Error(ErrorKind::singular_input, "reaches_interval needs 0 < theta0 < pi");
  }
  bool multiple = false;
  if (theta0.exact() && alpha.exact()) {
    multiple = (*theta0.exact() / *alpha.exact()).denominator() == 1;
  } else {
    const double r = theta0.value() / alpha.value();
    multiple = std::abs(r - std::round(r)) <= 1e-12 * std::max(1.0, r);
  }
  if (multiple) {
    throw Error(ErrorKind::precondition, "theta0 is an integer multiple of alpha; the lemma excludes it");
  }

  std::optional<PiFraction> exact = (theta0.exact() && alpha.exact()) ? theta0.exact() : std::nullopt;
  double value = theta0.value();
  IntervalWitness w;
  auto step = [&](Branch b) {
    const Angle here = exact ? Angle::pi_fraction(exact->numerator(), exact->denominator()) : Angle::radians(value);
    if (!(branch_probabilities(here, alpha)[b] > 0.0)) {
      throw Error(ErrorKind::invariant, "lemma construction hit an inadmissible branch");
    }
    if (exact) {
      exact = apply_branch(b, *exact, *alpha.exact());
      value = to_radians(*exact);
    } else {
      value = apply_branch(b, value, alpha);
    }
    w.word.push_back(b);
  };
  auto in_first = [&] { return exact ? *exact < *alpha.exact() : value < alpha.value(); };
  auto in_second = [&] { return exact ? *exact < 2 * *alpha.exact() : value < 2.0 * alpha.value(); };

  while (!in_second()) step(Branch::retreat);
  if (!in_first()) {
    step(Branch::near_reflect);
    step(Branch::retreat);
  }
  w.reached = true;
  w.final_angle = value;
  return w;
}

}  // namespace feres

#endif  // FERES_REACHABLE_SET_HPP
