#ifndef FERES_ANGLES_HPP
#define FERES_ANGLES_HPP

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "feres/errors.hpp"

namespace feres {

inline constexpr double kPi = std::numbers::pi;

/// Exact rational multiple of pi: the value q stands for q * pi radians.
using PiFraction = boost::rational<std::int64_t>;

inline double to_radians(const PiFraction& q) {
  return static_cast<double>(q.numerator()) * kPi / static_cast<double>(q.denominator());
}

inline std::string to_string(const PiFraction& q) {
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

/// Base angle of the triangular wall irregularity, 0 < alpha < pi/6.
///
/// Either an exact rational multiple m*pi/n (gcd(m, n) = 1, 6m < n) or a plain real
/// value in radians. Real-valued angles are treated as irrational multiples of pi by
/// everything downstream.
class BaseAngle {
 public:
  static BaseAngle rational(std::int64_t m, std::int64_t n) {
    if (n <= 0 || m <= 0) {
      throw Error(ErrorKind::validation,
                  "base angle m*pi/n needs m > 0 and n > 0, got " + std::to_string(m) + "/" +
                      std::to_string(n));
    }
    const PiFraction q(m, n);
    if (6 * q.numerator() >= q.denominator()) {
      throw Error(ErrorKind::validation, "base angle must satisfy alpha < pi/6 (6m < n), got alpha = " +
                                             to_string(q) + " pi");
    }
    return BaseAngle(q);
  }

  static BaseAngle real(double radians) {
    if (!(radians > 0.0) || !(radians < kPi / 6.0)) {
      throw Error(ErrorKind::validation,
                  "base angle must satisfy 0 < alpha < pi/6, got " + std::to_string(radians));
    }
    return BaseAngle(radians);
  }

  bool is_rational() const noexcept { return exact_.has_value(); }
  double value() const noexcept { return value_; }

  /// alpha / pi as an exact fraction, if rational.
  const std::optional<PiFraction>& exact() const noexcept { return exact_; }

  std::int64_t numerator() const { return exact_.value().numerator(); }
  std::int64_t denominator() const { return exact_.value().denominator(); }

 private:
  explicit BaseAngle(PiFraction q) : value_(to_radians(q)), exact_(q) {}
  explicit BaseAngle(double v) : value_(v) {}

  double value_;
  std::optional<PiFraction> exact_;
};

/// An angle in [0, pi], optionally carrying an exact pi-fraction.
class Angle {
 public:
  static Angle radians(double value) {
    check_range(value);
    return Angle(value, std::nullopt);
  }

  static Angle pi_fraction(std::int64_t p, std::int64_t q) {
    if (q == 0) throw Error(ErrorKind::parse, "zero denominator in angle p*pi/q");
    const PiFraction f(p, q);
    if (f < 0 || f > 1) {
      throw Error(ErrorKind::range, "angle " + to_string(f) + " pi lies outside [0, pi]");
    }
    return Angle(to_radians(f), f);
  }

  double value() const noexcept { return value_; }
  const std::optional<PiFraction>& exact() const noexcept { return exact_; }

 private:
  Angle(double value, std::optional<PiFraction> exact) : value_(value), exact_(exact) {}

  static void check_range(double value) {
    if (!(value >= 0.0) || !(value <= kPi)) {
      throw Error(ErrorKind::range, "angle " + std::to_string(value) + " lies outside [0, pi]");
    }
  }

  double value_;
  std::optional<PiFraction> exact_;
};

}  // namespace feres

#endif  // FERES_ANGLES_HPP
