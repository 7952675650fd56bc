// Independent reference implementations used as test oracles. None of these call into
// the library's numerical code paths; they restate the definitions as directly as
// possible and trade speed for transparency.
#ifndef FERES_TESTS_ORACLES_HPP
#define FERES_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include <boost/rational.hpp>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

// u_a(t) = (1 + tan a / tan t) / 2, literally.
inline double u(double a, double t) { return 0.5 * (1.0 + std::tan(a) / std::tan(t)); }

// The seven table pieces [0,a) [a,2a) [2a,3a) [3a,pi-3a) [pi-3a,pi-2a) [pi-2a,pi-a) [pi-a,pi].
template <class T>
int piece(T t, T a, T half_turn) {
  const T edges[6] = {a, 2 * a, 3 * a, half_turn - 3 * a, half_turn - 2 * a, half_turn - a};
  int k = 0;
  while (k < 6 && t >= edges[k]) ++k;
  return k;
}

// p1..p4 from the piecewise tables, evaluated with the tangent formula above.
inline std::array<double, 4> probabilities_on(int piece, double t, double a) {
  std::array<double, 4> p{0, 0, 0, 0};
  const double k = 2.0 * std::cos(2.0 * a);
  switch (piece) {
    case 0: p[0] = 1.0; break;
    case 1: p[0] = u(a, t); p[3] = u(a, -t); break;
    case 2: p[0] = u(a, t); p[2] = k * u(2 * a, -t); p[3] = u(a, -t) - k * u(2 * a, -t); break;
    case 3: p[0] = u(a, t); p[2] = u(a, -t); break;
    case 4: p[0] = k * u(2 * a, t); p[1] = u(a, t) - k * u(2 * a, t); p[2] = u(a, -t); break;
    case 5: p[1] = u(a, t); p[2] = u(a, -t); break;
    default: p[2] = 1.0; break;
  }
  return p;
}

inline std::array<double, 4> probabilities(double t, double a) { return probabilities_on(piece(t, a, pi), t, a); }

inline double image(int branch, double t, double a) {
  switch (branch) {
    case 1: return t + 2 * a;
    case 2: return -t + 2 * pi - 4 * a;
    case 3: return t - 2 * a;
    default: return -t + 4 * a;
  }
}

using Q = boost::rational<std::int64_t>;

inline Q image(int branch, Q t, Q a) {
  switch (branch) {
    case 1: return t + 2 * a;
    case 2: return -t + 2 - 4 * a;
    case 3: return t - 2 * a;
    default: return -t + 4 * a;
  }
}

inline double radians(Q q) { return pi * static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

// Piece decided exactly, formulas evaluated in floating point.
inline std::array<double, 4> probabilities(Q t, Q a) { return probabilities_on(piece(t, a, Q(1)), radians(t), radians(a)); }

// Brute-force closure of {t0} over exact pi-fractions. A branch counts as admissible
// when its tabulated probability exceeds 1e-9; at the rational points reached here the
// nonzero probabilities are many orders larger and the vanishing ones are rounding-level.
struct ExactChain {
  std::vector<Q> states;
  std::vector<std::vector<double>> matrix;
};

inline ExactChain exact_chain(Q t0, Q a) {
  ExactChain c;
  std::map<Q, std::size_t> seen{{t0, 0}};
  c.states.push_back(t0);
  std::vector<std::map<std::size_t, double>> rows;
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    const auto p = probabilities(c.states[i], a);
    std::map<std::size_t, double> row;
    for (int b = 1; b <= 4; ++b) {
      if (!(p[b - 1] > 1e-9)) continue;
      const Q next = image(b, c.states[i], a);
      auto [it, inserted] = seen.emplace(next, c.states.size());
      if (inserted) c.states.push_back(next);
      row[it->second] += p[b - 1];
    }
    rows.push_back(row);
  }
  c.matrix.assign(c.states.size(), std::vector<double>(c.states.size(), 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto [j, v] : rows[i]) c.matrix[i][j] = v;
  }
  return c;
}

// gcd of the lengths k <= limit of closed walks through state 0, by boolean powers.
inline std::int64_t return_time_gcd(const std::vector<std::vector<double>>& m, std::size_t limit) {
  const std::size_t n = m.size();
  std::vector<char> reach(n, 0);
  reach[0] = 1;
  std::int64_t g = 0;
  for (std::size_t k = 1; k <= limit; ++k) {
    std::vector<char> next(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (m[i][j] > 0.0) next[j] = 1;
      }
    }
    reach = next;
    if (reach[0]) g = std::gcd(g, static_cast<std::int64_t>(k));
  }
  return g;
}

// Composite midpoint rule with `points` nodes over [lo, hi].
inline double midpoint(const std::function<double(double)>& f, double lo, double hi, std::size_t points) {
  const double h = (hi - lo) / static_cast<double>(points);
  double s = 0.0;
  for (std::size_t i = 0; i < points; ++i) s += f(lo + (static_cast<double>(i) + 0.5) * h);
  return s * h;
}

// int sum_i p_i f(T_i t) dmu - int f dmu, dmu = sin(t)/2 dt, by a 10^6-point midpoint rule.
inline double liouville_defect(const std::function<double(double)>& f, double a, std::size_t points = 1000000) {
  return midpoint(
      [&](double t) {
        const auto p = probabilities(t, a);
        double pushed = 0.0;
        for (int b = 1; b <= 4; ++b) {
          if (p[b - 1] != 0.0) pushed += p[b - 1] * f(image(b, t, a));
        }
        return 0.5 * std::sin(t) * (pushed - f(t));
      },
      0.0, pi, points);
}

}  // namespace oracle

#endif  // FERES_TESTS_ORACLES_HPP
