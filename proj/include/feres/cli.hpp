#ifndef FERES_CLI_HPP
#define FERES_CLI_HPP

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "feres/config.hpp"
#include "feres/feres.hpp"
#include "feres/io.hpp"

namespace feres::cli {

inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::validation, "cannot write '" + path.string() + "'");
  body(os);
  if (!os) throw Error(ErrorKind::validation, "write failed for '" + path.string() + "'");
}

inline std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::parse, what + " needs two comma-separated values");
  return {parse_angle(text.substr(0, comma)).value(), parse_angle(text.substr(comma + 1)).value()};
}

inline AngleDensity read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open density file '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (feres::detail::trim(line) != "bin_left,bin_right,mass") {
    throw Error(ErrorKind::parse, "density file must start with 'bin_left,bin_right,mass'");
  }
  AngleDensity d;
  while (std::getline(in, line)) {
    if (feres::detail::trim(line).empty()) continue;
    const auto last = line.rfind(',');
    if (last == std::string::npos) throw Error(ErrorKind::parse, "malformed density row '" + line + "'");
    d.masses.push_back(feres::detail::parse_decimal(feres::detail::trim(line.substr(last + 1)), "density mass"));
  }
  const double total = d.total();
  if (total > 0.0) {
    for (double& m : d.masses) m /= total;
  }
  validate(d);
  return d;
}

}  // namespace detail

/// Initial density from its textual form: "mu", "uniform", "uniform:a,b", "mu:a,b",
/// "interval:Ij" (uniform on the j-th invariant interval, rational alpha only) or
/// "file:path" (a density CSV).
inline AngleDensity make_initial(const std::string& text, const BaseAngle& alpha, std::size_t bins) {
  if (text == "mu") return discretized_mu(bins, BaseMeasure::mu);
  if (text == "uniform") return uniform_on(0.0, kPi, bins);
  if (text.rfind("uniform:", 0) == 0) {
    const auto [a, b] = detail::parse_pair(text.substr(8), "uniform:a,b");
    return uniform_on(a, b, bins);
  }
  if (text.rfind("mu:", 0) == 0) {
    const auto [a, b] = detail::parse_pair(text.substr(3), "mu:a,b");
    return mu_restricted(a, b, bins);
  }
  if (text.rfind("interval:I", 0) == 0) {
    const auto j = feres::detail::parse_integer(text.substr(10), "interval index");
    const InvariantIntervalFamily f = invariant_intervals(alpha);
    if (j < 1 || j > f.n) {
      throw Error(ErrorKind::validation, "interval index must be 1.." + std::to_string(f.n));
    }
    const auto& iv = f.intervals[static_cast<std::size_t>(j - 1)];
    return uniform_on(to_radians(iv.first), to_radians(iv.second), bins);
  }
  if (text.rfind("file:", 0) == 0) return detail::read_density_csv(text.substr(5));
  throw Error(ErrorKind::parse, "unknown initial density '" + text + "'");
}

inline std::size_t effective_bins(const ExperimentConfig& c, const BaseAngle& alpha) {
  return c.align_bins ? aligned_bins(alpha, c.bins) : c.bins;
}

struct Context {
  ExperimentConfig config;
  BaseAngle alpha;
  std::filesystem::path out;
};

inline json header(const Context& ctx, const std::string& command) {
  return {{"command", command}, {"version", kVersion}, {"config", to_json(ctx.config)}};
}

inline json run_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  json s = header(ctx, "simulate");
  if (c.table == "pipeline") {
    const PipelineTrajectory t =
        simulate_pipeline({c.start_position(), Wall::bottom, c.start_angle().value()}, c.steps, ctx.alpha, c.seed);
    detail::write_file(ctx.out / "pipeline.csv", [&](std::ostream& os) { io::write_pipeline_csv(os, t); });
    s["files"] = {"pipeline.csv"};
    s["final_s"] = t.states.back().s;
    return s;
  }
  const Trajectory t = simulate({c.start_position(), c.start_angle().value()}, c.steps, ctx.alpha, c.seed);
  const CausticEstimate cau = caustic(t);
  detail::write_file(ctx.out / "trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, t); });
  detail::write_file(ctx.out / "trajectory.svg", [&](std::ostream& os) { io::write_circle_svg(os, t, cau); });
  s["files"] = {"trajectory.csv", "trajectory.svg"};
  s["caustic"] = io::to_json(cau);
  s["discrepancy_20_bins"] = dense_orbit_discrepancy(t, 20);
  s["chord_distance_error"] = chord_distance_check(t);
  return s;
}

inline json markov_report(const ReachableSet& set) {
  json r = io::to_json(set);
  const TransitionMatrix p = transition_matrix(set);
  r["matrix"] = io::to_json(p);
  const bool irreducible = !set.truncated() && is_irreducible(p);
  r["irreducible"] = irreducible;
  if (irreducible) {
    r["period"] = period(p);
    r["stationary"] = stationary_distribution(p);
  }
  r["caustic"] = io::to_json(caustic(set));
  return r;
}

inline json run_markov(const Context& ctx) {
  const ReachableSet set = reachable_angles(ctx.config.start_angle(), ctx.alpha);
  const json report = markov_report(set);
  detail::write_file(ctx.out / "markov.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
  json s = header(ctx, "markov");
  s["files"] = {"markov.json"};
  s["report"] = report;
  return s;
}

inline json run_knudsen(const Context& ctx) {
  const auto& c = ctx.config;
  const AngleDensity initial = make_initial(c.initial, ctx.alpha, effective_bins(c, ctx.alpha));
  std::optional<InvariantIntervalFamily> family;
  std::vector<std::pair<double, double>> intervals;
  if (ctx.alpha.is_rational()) {
    family = invariant_intervals(ctx.alpha);
    intervals = family->radians();
  }
  std::size_t max_outside = 0;
  AngleDensity last = initial;
  const auto tv = knudsen_run(initial, ctx.alpha, c.steps, [&](std::size_t, const AngleDensity& d) {
    if (family) max_outside = std::max(max_outside, cells_outside(d, intervals));
    last = d;
  });
  detail::write_file(ctx.out / "knudsen.csv", [&](std::ostream& os) { io::write_knudsen_csv(os, tv); });
  detail::write_file(ctx.out / "density_initial.csv", [&](std::ostream& os) { io::write_density_csv(os, initial); });
  detail::write_file(ctx.out / "density_final.csv", [&](std::ostream& os) { io::write_density_csv(os, last); });

  json s = header(ctx, "knudsen");
  s["files"] = {"knudsen.csv", "density_initial.csv", "density_final.csv"};
  s["bins"] = initial.bins();
  s["reference"] = to_string(initial.reference);
  s["tv_initial"] = tv.front();
  s["tv_final"] = tv.back();
  s["tv_min"] = *std::min_element(tv.begin(), tv.end());
  if (family) {
    const bool started_inside = cells_outside(initial, intervals) == 0;
    const double bound = 1.0 - family->mu_measure() - 2.0 / static_cast<double>(initial.bins());
    s["invariant_union_mu"] = family->mu_measure();
    s["initial_inside_intervals"] = started_inside;
    if (started_inside) {
      s["support_confined"] = max_outside == 0;
      s["tv_lower_bound"] = bound;
      s["bounded_below"] = s["tv_min"].get<double>() >= bound;
    }
  }
  return s;
}

inline json run_caustic(const Context& ctx) {
  const auto& c = ctx.config;
  const ReachableSet set = reachable_angles(c.start_angle(), ctx.alpha);
  const CausticEstimate exact = caustic(set);
  const Trajectory t = simulate({c.start_position(), c.start_angle().value()}, c.steps, ctx.alpha, c.seed);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
    worst = std::max(worst, exact.radius - chord_distance(t.points[k].s, t.points[k + 1].s));
  }
  detail::write_file(ctx.out / "caustic.svg", [&](std::ostream& os) { io::write_circle_svg(os, t, exact); });
  json s = header(ctx, "caustic");
  s["files"] = {"caustic.svg"};
  s["reachable_states"] = set.size();
  s["truncated"] = set.truncated();
  s["caustic"] = io::to_json(exact);
  s["trajectory_caustic"] = io::to_json(caustic(t));
  s["max_chord_violation"] = worst;
  return s;
}

inline std::array<double, 2> parse_vector(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::parse, "vector needs the form v1,v2");
  return {feres::detail::parse_decimal(feres::detail::trim(text.substr(0, comma)), "vector"),
          feres::detail::parse_decimal(feres::detail::trim(text.substr(comma + 1)), "vector")};
}

inline json run_lyapunov(const Context& ctx, const std::string& vector) {
  const auto& c = ctx.config;
  const auto v = parse_vector(vector);
  json s = header(ctx, "lyapunov");
  s["vector"] = v;
  if (c.table == "pipeline") {
    const PipelineLyapunov r =
        pipeline_lyapunov({c.start_position(), Wall::bottom, c.start_angle().value()}, ctx.alpha, c.steps, c.seed, v);
    s["estimate"] = r.estimate;
    s["offdiag"] = r.jacobian.offdiag;
    s["parity"] = r.jacobian.parity;
    s["min_sine"] = r.min_sine;
    s["bound_respected"] = r.bound_respected;
    return s;
  }
  const Trajectory t = simulate({c.start_position(), c.start_angle().value()}, c.steps, ctx.alpha, c.seed);
  const JacobianAccumulator acc = accumulate_jacobian(t.branches);
  s["estimate"] = lyapunov_estimate(t, v);
  s["a"] = acc.a;
  s["b"] = acc.b;
  return s;
}

/// Probability normalization on a grid, Liouville residuals and, for rational alpha,
/// the invariant interval family.
inline json run_check(const Context& ctx) {
  const double a = ctx.alpha.value();
  constexpr int grid = 10000;
  double max_sum_error = 0.0, min_probability = 1.0;
  const auto bp = breakpoints(a);
  for (int i = 1; i < grid; ++i) {
    const double th = kPi * i / grid;
    if (std::any_of(bp.begin(), bp.end(), [&](double b) { return b == th; })) continue;
    const BranchProbabilities pr = branch_probabilities(th, ctx.alpha);
    max_sum_error = std::max(max_sum_error, std::abs(pr.sum() - 1.0));
    for (double p : pr.p) min_probability = std::min(min_probability, p);
  }
  const std::vector<std::function<double(double)>> tests{
      [](double) { return 1.0; }, [](double t) { return t; }, [](double t) { return t * t; },
      [](double t) { return std::sin(t); }, [](double t) { return std::cos(3.0 * t); }};
  const double residual = liouville_residual(ctx.alpha, tests);

  json s = header(ctx, "check");
  json checks = json::object();
  checks["normalization"] = {{"max_sum_error", max_sum_error},
                             {"min_probability", min_probability},
                             {"pass", max_sum_error <= 1e-10 && min_probability >= -1e-12}};
  checks["liouville"] = {{"residual", residual}, {"pass", residual <= 1e-8}};
  if (ctx.alpha.is_rational()) {
    const InvariantFamilyReport r = invariant_family_check(ctx.alpha);
    checks["invariant_intervals"] = {{"pairs_checked", r.pairs_checked},
                                     {"total_length_over_pi", to_string(r.total_length)},
                                     {"violations", r.violations},
                                     {"pass", r.ok}};
  }
  bool pass = true;
  for (const auto& [name, v] : checks.items()) pass = pass && v.at("pass").get<bool>();
  s["checks"] = checks;
  s["pass"] = pass;
  return s;
}

inline void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

/// Entry point. Returns 0 on success, 1 when `check` finds a violation, 2 on errors
/// (reported as one JSON object on `err`).
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random billiards with the Feres reflection law", "feres"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Flags {
    std::optional<std::string> config, alpha, theta0, s0, initial, table, out;
    std::optional<std::size_t> steps, bins;
    std::optional<std::uint64_t> seed;
    bool no_align = false;
    std::string vector = "0,1";
  } flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file; flags given explicitly override it");
    sub->add_option("--alpha", flags.alpha, "base angle: m/n for m*pi/n, or radians");
    sub->add_option("--theta0", flags.theta0, "initial angle: radians or pi expression");
    sub->add_option("--s0", flags.s0, "initial boundary position in [0, 2pi)");
    sub->add_option("--steps", flags.steps, "number of steps");
    sub->add_option("--seed", flags.seed, "64-bit seed");
    sub->add_option("--out", flags.out, "output directory (default $FERES_OUT_DIR or .)");
  };
  auto* simulate_cmd = app.add_subcommand("simulate", "circle (or pipeline) trajectory with SVG and summary");
  auto* markov_cmd = app.add_subcommand("markov", "reachable set, transition matrix and stationary law");
  auto* knudsen_cmd = app.add_subcommand("knudsen", "distance to mu of iterated densities");
  auto* caustic_cmd = app.add_subcommand("caustic", "random caustic radius and figure");
  auto* lyapunov_cmd = app.add_subcommand("lyapunov", "Lyapunov exponent estimate");
  auto* check_cmd = app.add_subcommand("check", "normalization, invariance and interval-family checks");
  for (auto* sub : {simulate_cmd, markov_cmd, knudsen_cmd, caustic_cmd, lyapunov_cmd, check_cmd}) add_common(sub);
  for (auto* sub : {simulate_cmd, lyapunov_cmd}) sub->add_option("--table", flags.table, "circle or pipeline");
  knudsen_cmd->add_option("--bins", flags.bins, "grid cells on [0, pi]");
  knudsen_cmd->add_option("--initial", flags.initial, "mu, uniform, uniform:a,b, mu:a,b, interval:Ij, file:path");
  knudsen_cmd->add_flag("--no-align", flags.no_align, "keep --bins even when alpha = m*pi/n");
  lyapunov_cmd->add_option("--vector", flags.vector, "tangent vector v1,v2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, "parse", e.what());
    return 2;
  }

  try {
    ExperimentConfig c;
    if (flags.config) apply_json_file(c, *flags.config);
    if (flags.alpha) c.alpha = *flags.alpha;
    if (flags.theta0) c.theta0 = *flags.theta0;
    if (flags.s0) c.s0 = *flags.s0;
    if (flags.steps) c.steps = *flags.steps;
    if (flags.seed) c.seed = *flags.seed;
    if (flags.bins) c.bins = *flags.bins;
    if (flags.initial) c.initial = *flags.initial;
    if (flags.table) c.table = *flags.table;
    if (flags.no_align) c.align_bins = false;
    if (flags.out) c.output_dir = *flags.out;
    c.output_dir = resolve_output_dir(c.output_dir);

    Context ctx{c, validate(c), c.output_dir};
    std::filesystem::create_directories(ctx.out);

    json summary;
    const auto* sub = app.get_subcommands().front();
    if (sub == simulate_cmd) summary = run_simulate(ctx);
    else if (sub == markov_cmd) summary = run_markov(ctx);
    else if (sub == knudsen_cmd) summary = run_knudsen(ctx);
    else if (sub == caustic_cmd) summary = run_caustic(ctx);
    else if (sub == lyapunov_cmd) summary = run_lyapunov(ctx, flags.vector);
    else summary = run_check(ctx);

    detail::write_file(ctx.out / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    out << summary.dump(2) << '\n';
    if (summary.contains("pass") && !summary["pass"].get<bool>()) return 1;
    return 0;
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    print_error(err, "io", e.what());
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
  }
  return 2;
}

}  // namespace feres::cli

#endif  // FERES_CLI_HPP
