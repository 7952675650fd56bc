#ifndef FERES_CONFIG_HPP
#define FERES_CONFIG_HPP

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <utility>

#include "feres/angles.hpp"
#include "feres/errors.hpp"

namespace feres {

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::int64_t parse_integer(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error(ErrorKind::parse, "malformed " + what + ": '" + s + "'");
  return v;
}

inline double parse_decimal(const std::string& s, const std::string& what) {
  // strtod rather than from_chars<double>, which this toolchain's library lacks.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::parse, "malformed " + what + ": '" + s + "'");
  }
  return v;
}

/// "pi", "pi/20", "3pi/4", "3*pi/4" as an exact fraction of pi; nullopt if no "pi".
inline std::optional<PiFraction> parse_pi_expression(const std::string& text, const std::string& what) {
  static const std::regex pattern(R"(^(\d*)\s*\*?\s*pi\s*(?:/\s*(\d+))?$)");
  std::smatch m;
  if (text.find("pi") == std::string::npos) return std::nullopt;
  if (!std::regex_match(text, m, pattern)) throw Error(ErrorKind::parse, "malformed " + what + ": '" + text + "'");
  const std::int64_t p = m[1].length() ? parse_integer(m[1], what) : 1;
  const std::int64_t q = m[2].matched ? parse_integer(m[2], what) : 1;
  if (q == 0) throw Error(ErrorKind::parse, "zero denominator in " + what + ": '" + text + "'");
  return PiFraction(p, q);
}

}  // namespace detail

/// An angle in [0, pi]: a decimal in radians or a pi expression ("pi/20", "3pi/4").
inline Angle parse_angle(const std::string& input) {
  const std::string text = detail::trim(input);
  if (auto q = detail::parse_pi_expression(text, "angle")) return Angle::pi_fraction(q->numerator(), q->denominator());
  return Angle::radians(detail::parse_decimal(text, "angle"));
}

/// A base angle: "m/n" means m*pi/n exactly, as do pi expressions; a decimal is radians
/// and is treated as an irrational multiple of pi.
inline BaseAngle parse_alpha(const std::string& input) {
  const std::string text = detail::trim(input);
  if (auto q = detail::parse_pi_expression(text, "alpha")) return BaseAngle::rational(q->numerator(), q->denominator());
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const std::int64_t m = detail::parse_integer(detail::trim(text.substr(0, slash)), "rational alpha m/n");
    const std::int64_t n = detail::parse_integer(detail::trim(text.substr(slash + 1)), "rational alpha m/n");
    if (n == 0) throw Error(ErrorKind::parse, "zero denominator in alpha '" + text + "'");
    return BaseAngle::rational(m, n);
  }
  return BaseAngle::real(detail::parse_decimal(text, "alpha"));
}

/// Settings shared by every subcommand. The strings keep the user's spelling so the
/// summary can echo the exact configuration back.
struct ExperimentConfig {
  std::string alpha = "1/7";
  std::string theta0 = "pi/20";
  std::string s0 = "0";
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  std::size_t bins = 256;
  std::string initial = "mu";
  std::string table = "circle";
  std::string output_dir;  // empty: not set
  bool align_bins = true;

  BaseAngle base_angle() const { return parse_alpha(alpha); }
  Angle start_angle() const { return parse_angle(theta0); }
  double start_position() const { return detail::parse_decimal(detail::trim(s0), "s0"); }
};

/// Checks every field and returns the parsed base angle.
inline BaseAngle validate(const ExperimentConfig& c) {
  const BaseAngle a = c.base_angle();
  c.start_angle();
  c.start_position();
  if (c.bins < 2) throw Error(ErrorKind::validation, "bins must be >= 2");
  if (c.table != "circle" && c.table != "pipeline") {
    throw Error(ErrorKind::validation, "table must be 'circle' or 'pipeline', got '" + c.table + "'");
  }
  return a;
}

/// Experiment parameters only; the output directory does not change any result and is
/// left out so that runs written to different places compare equal.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"alpha", c.alpha}, {"theta0", c.theta0}, {"s0", c.s0},           {"steps", c.steps},
          {"seed", c.seed},   {"bins", c.bins},     {"initial", c.initial}, {"table", c.table},
          {"align_bins", c.align_bins}};
}

namespace detail {

inline std::string angle_field(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw Error(ErrorKind::parse, "config field '" + key + "' must be a string or a number");
}

}  // namespace detail

/// Overlays a JSON config object on `c`. alpha may be "m/n", a number (radians),
/// {"rational": "m/n"} or {"real": radians}; initial may be a string or
/// {"uniform_interval": [a, b]}, "mu", or {"file": path}.
inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "alpha") {
        if (v.is_object() && v.contains("rational")) c.alpha = v.at("rational").get<std::string>();
        else if (v.is_object() && v.contains("real")) c.alpha = detail::angle_field(v.at("real"), key);
        else c.alpha = detail::angle_field(v, key);
      } else if (key == "theta0") {
        c.theta0 = detail::angle_field(v, key);
      } else if (key == "s0") {
        c.s0 = detail::angle_field(v, key);
      } else if (key == "steps") {
        c.steps = v.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "bins") {
        c.bins = v.get<std::size_t>();
      } else if (key == "table") {
        c.table = v.get<std::string>();
      } else if (key == "align_bins") {
        c.align_bins = v.get<bool>();
      } else if (key == "output_dir") {
        c.output_dir = v.get<std::string>();
      } else if (key == "initial") {
        if (v.is_string()) {
          c.initial = v.get<std::string>();
        } else if (v.contains("uniform_interval")) {
          const auto& iv = v.at("uniform_interval");
          c.initial = "uniform:" + detail::angle_field(iv.at(0), key) + "," + detail::angle_field(iv.at(1), key);
        } else if (v.contains("file")) {
          c.initial = "file:" + v.at("file").get<std::string>();
        } else if (v.contains("mu")) {
          c.initial = "mu";
        } else {
          throw Error(ErrorKind::parse, "unrecognized initial density in config");
        }
      } else {
        throw Error(ErrorKind::parse, "unknown config field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("config: ") + e.what());
  }
}

inline void apply_json_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, "config file '" + path + "': " + e.what());
  }
  apply_json(c, j);
}

/// Output directory: explicit value, else $FERES_OUT_DIR, else the working directory.
inline std::string resolve_output_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("FERES_OUT_DIR"); env && *env) return env;
  return ".";
}

}  // namespace feres

#endif  // FERES_CONFIG_HPP
