// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "feres/cli.hpp"
#include "feres/feres.hpp"

using namespace feres;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const std::vector<std::function<double(double)>>& test_functions() {
  static const std::vector<std::function<double(double)>> fs{
      [](double) { return 1.0; }, [](double t) { return t; }, [](double t) { return t * t; },
      [](double t) { return std::sin(t); }, [](double t) { return std::cos(3.0 * t); }};
  return fs;
}

Outcome probability_law() {
  Outcome o;
  for (const BaseAngle& alpha : {BaseAngle::rational(1, 7), BaseAngle::rational(1, 10), BaseAngle::real(0.5),
                                 BaseAngle::real(0.52)}) {
    const auto bp = breakpoints(alpha.value());
    double worst_sum = 0.0, least = 1.0, worst_oracle = 0.0;
    for (int i = 1; i < 10000; ++i) {
      const double t = kPi * i / 10000.0;
      if (std::find(bp.begin(), bp.end(), t) != bp.end()) continue;
      const BranchProbabilities pr = branch_probabilities(t, alpha);
      worst_sum = std::max(worst_sum, std::abs(pr.sum() - 1.0));
      for (double p : pr.p) least = std::min(least, p);
      const auto ref = oracle::probabilities(t, alpha.value());
      for (int k = 0; k < 4; ++k) worst_oracle = std::max(worst_oracle, std::abs(ref[k] - pr.p[k]));
    }
    const std::string tag = "alpha=" + fmt(alpha.value());
    o.require(worst_sum <= 1e-10, tag + " sum error " + fmt(worst_sum));
    o.require(least >= -1e-12, tag + " min p " + fmt(least));
    o.require(worst_oracle <= 1e-10, tag + " oracle gap " + fmt(worst_oracle));
    o.detail += (o.detail.empty() ? "" : ", ") + tag + " max|sum-1|=" + fmt(worst_sum);
  }
  return o;
}

Outcome liouville() {
  Outcome o;
  for (const BaseAngle& alpha : {BaseAngle::rational(1, 7), BaseAngle::real(0.5)}) {
    const double r = liouville_residual(alpha, test_functions());
    o.require(r <= 1e-8, "residual " + fmt(r));
    o.detail += (o.detail.empty() ? "" : ", ") + std::string("alpha=") + fmt(alpha.value()) + " residual=" + fmt(r);
  }
  return o;
}

Outcome worked_example() {
  Outcome o;
  const BaseAngle alpha = BaseAngle::rational(1, 7);
  const ReachableSet set = reachable_angles(Angle::pi_fraction(1, 20), alpha);
  o.require(set.size() == 7 && !set.truncated(), "state count " + std::to_string(set.size()));
  const std::vector<SymbolicAngle> listed{{1, 0, 0},  {1, 0, 2},  {1, 0, 4}, {1, 0, 6},
                                          {-1, 0, 2}, {-1, 0, 4}, {-1, 0, 6}};
  const std::vector<PiFraction> values{{1, 20}, {47, 140}, {87, 140}, {127, 140}, {33, 140}, {73, 140}, {113, 140}};
  std::vector<std::size_t> at;
  for (std::size_t i = 0; i < listed.size(); ++i) {
    const auto idx = set.find(listed[i]);
    o.require(idx.has_value(), "listed state " + std::to_string(i) + " missing");
    if (!idx) return o;
    o.require(set[*idx].exact == values[i], "value of listed state " + std::to_string(i));
    at.push_back(*idx);
  }
  const int pattern[7][7] = {{0, 1, 0, 0, 0, 0, 0}, {1, 0, 1, 0, 1, 0, 0}, {0, 1, 0, 1, 0, 0, 1},
                             {0, 0, 1, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 1, 0}, {0, 0, 0, 0, 1, 0, 1},
                             {0, 0, 1, 0, 0, 1, 0}};
  const TransitionMatrix p = transition_matrix(set);
  int mismatches = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) mismatches += (p(at[i], at[j]) > 0.0) != (pattern[i][j] == 1);
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " pattern mismatches");
  o.require(is_irreducible(p), "not irreducible");
  const auto pi = stationary_distribution(p);
  double residual = 0.0;
  for (std::size_t j = 0; j < 7; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 7; ++i) s += pi[i] * p(i, j);
    residual = std::max(residual, std::abs(s - pi[j]));
  }
  double sine_norm = 0.0;
  for (std::size_t i = 0; i < 7; ++i) sine_norm += std::sin(set[i].value);
  double sine_gap = 0.0;
  for (std::size_t i = 0; i < 7; ++i) sine_gap = std::max(sine_gap, std::abs(pi[i] - std::sin(set[i].value) / sine_norm));
  o.require(residual <= 1e-12, "stationary residual " + fmt(residual));
  o.require(sine_gap <= 1e-12, "sine proportionality gap " + fmt(sine_gap));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("7 states, pattern ok, residual=") + fmt(residual) +
              " sine gap=" + fmt(sine_gap);
  return o;
}

Outcome rotation_identity() {
  Outcome o;
  Rng rng(2024);
  std::vector<Branch> word;
  for (int i = 0; i < 50; ++i) word.insert(word.end(), {Branch::advance, Branch::retreat});
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = 0.01 + (kPi / 6 - 0.02) * uniform01(rng);
    const double t0 = 0.01 + (kPi - 2 * a - 0.02) * uniform01(rng);
    const double s0 = kTwoPi * uniform01(rng);
    const Trajectory orbit = prescribed_orbit({s0, t0}, word, BaseAngle::real(a));
    for (int n = 0; n <= 50; ++n) {
      double d = std::abs(orbit.points[2 * n].s - std::fmod(s0 + 4.0 * n * (t0 + a), kTwoPi));
      worst = std::max(worst, std::min(d, kTwoPi - d));
    }
  }
  o.require(worst <= 1e-9, "max deviation " + fmt(worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("100 triples, max deviation=") + fmt(worst);
  return o;
}

Outcome equidistribution() {
  Outcome o;
  const Trajectory t = simulate({0.0, 1.0}, 200000, BaseAngle::real(0.5), 5);
  const double dev = dense_orbit_discrepancy(t, 20);
  const auto s = boundary_positions(t);
  const auto counts = stats::histogram(s, 0.0, kTwoPi, 20);
  const double p = stats::chi_square_uniform(counts).p_value;
  o.require(dev < 0.05, "deviation " + fmt(dev));
  o.require(p > 1e-3, "chi-square p " + fmt(p));
  const BaseAngle seven = BaseAngle::rational(1, 7);
  const Trajectory r = simulate({0.0, kPi / 20}, 100000, seven, 5);
  const CausticEstimate c = caustic(reachable_angles(Angle::pi_fraction(1, 20), seven));
  const double cov = ring_coverage(r, c, 20, 60);
  o.require(cov >= 0.99, "ring coverage " + fmt(cov));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("deviation=") + fmt(dev) + " p=" + fmt(p) +
              " coverage=" + fmt(cov);
  return o;
}

Outcome caustics() {
  Outcome o;
  const BaseAngle alpha = BaseAngle::rational(1, 7);
  const CausticEstimate c = caustic(reachable_angles(Angle::pi_fraction(1, 20), alpha));
  const auto chain = oracle::exact_chain(oracle::Q(1, 20), oracle::Q(1, 7));
  double brute = 1.0;
  for (const auto& q : chain.states) brute = std::min(brute, std::abs(std::cos(oracle::radians(q))));
  o.require(chain.states.size() == 7, "oracle state count");
  o.require(!c.degenerate && std::abs(c.radius - brute) <= 1e-12, "radius " + fmt(c.radius) + " vs " + fmt(brute));
  const CausticEstimate right = caustic(reachable_angles(Angle::pi_fraction(1, 2), alpha));
  o.require(right.degenerate, "pi/2 caustic not degenerate");
  const Trajectory t = simulate({0.0, kPi / 20}, 100000, alpha, 8);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
    worst = std::max(worst, c.radius - chord_distance(t.points[k].s, t.points[k + 1].s));
  }
  o.require(worst <= 1e-9, "chord below radius by " + fmt(worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("radius=") + fmt(c.radius) +
              " pi/2 degenerate, worst chord shortfall=" + fmt(worst);
  return o;
}

Outcome knudsen() {
  Outcome o;
  const auto irr = knudsen_run(mu_restricted(0.2, 0.6, 256), BaseAngle::real(0.5), 2000);
  o.require(irr[2000] < 0.05, "TV(2000)=" + fmt(irr[2000]));
  o.require(irr[2000] < irr[50], "TV(2000) not below TV(50)");

  const BaseAngle alpha = BaseAngle::rational(1, 7);
  const InvariantIntervalFamily family = invariant_intervals(alpha);
  const auto intervals = family.radians();
  const std::size_t bins = aligned_bins(alpha, 256);
  double union_mu = 0.0;
  for (const auto& [a, b] : intervals) {
    union_mu += oracle::midpoint([](double t) { return 0.5 * std::sin(t); }, a, b, 100000);
  }
  const double bound = 1.0 - union_mu - 2.0 / static_cast<double>(bins);
  std::size_t outside = 0;
  const auto rat = knudsen_run(uniform_on(intervals[0].first, intervals[0].second, bins), alpha, 2000,
                               [&](std::size_t, const AngleDensity& d) { outside += cells_outside(d, intervals); });
  const double least = *std::min_element(rat.begin(), rat.end());
  o.require(outside == 0, std::to_string(outside) + " cells outside the intervals");
  o.require(least >= bound, "min TV " + fmt(least) + " below " + fmt(bound));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("(a) TV50=") + fmt(irr[50]) + " TV2000=" + fmt(irr[2000]) +
              " (b) N=" + std::to_string(bins) + " min TV=" + fmt(least) + " >= " + fmt(bound);
  return o;
}

Outcome interval_family() {
  Outcome o;
  for (const BaseAngle& alpha : {BaseAngle::rational(1, 7), BaseAngle::rational(1, 9), BaseAngle::rational(2, 13)}) {
    const InvariantFamilyReport r = invariant_family_check(alpha);
    const std::string tag = std::to_string(alpha.numerator()) + "pi/" + std::to_string(alpha.denominator());
    o.require(r.ok, tag + " family check failed");
    o.require(r.total_length == PiFraction(1, 2), tag + " total length " + to_string(r.total_length));
    o.detail += (o.detail.empty() ? "" : ", ") + tag + " pairs=" + std::to_string(r.pairs_checked);
  }
  return o;
}

Outcome lyapunov() {
  Outcome o;
  const Trajectory t = simulate({0.0, 1.0}, 100000, BaseAngle::real(0.5), 13);
  JacobianAccumulator acc;
  bool structure = true;
  for (Branch b : t.branches) {
    acc = jacobian_step(acc, b);
    structure = structure && (acc.b == 1 || acc.b == -1) && std::abs(acc.a) <= 2 * acc.n && acc.a % 2 == 0;
  }
  const double circle = lyapunov_estimate(t, {0.0, 1.0});
  o.require(structure, "Jacobian structure violated");
  o.require(std::abs(circle) < 1e-3, "circle lambda " + fmt(circle));
  const PipelineLyapunov pipe =
      pipeline_lyapunov({0.0, Wall::bottom, kPi / 20}, BaseAngle::rational(1, 7), 100000, 13, {0.0, 1.0});
  o.require(std::abs(pipe.estimate) < 5e-3, "pipeline lambda " + fmt(pipe.estimate));
  o.require(pipe.bound_respected, "off-diagonal bound violated");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("circle=") + fmt(circle) + " pipeline=" + fmt(pipe.estimate);
  return o;
}

Outcome skew_product() {
  Outcome o;
  const BaseAngle alpha = BaseAngle::real(0.5);
  Rng rng = make_rng(3, Stream::skew);
  const int samples = 100000;
  int outside = 0;
  for (int g = 1; g <= 20; ++g) {
    const double t = kPi * g / 21.0;
    const auto pr = branch_probabilities(t, alpha);
    std::array<int, 4> counts{};
    for (int i = 0; i < samples; ++i) ++counts[static_cast<std::size_t>(index(skew_step({uniform01(rng), t}, alpha).branch) - 1)];
    for (int k = 0; k < 4; ++k) {
      const double sigma = std::sqrt(samples * pr.p[k] * (1 - pr.p[k]));
      outside += std::abs(counts[k] - samples * pr.p[k]) > 3 * sigma + 1e-9;
    }
  }
  o.require(outside == 0, std::to_string(outside) + " branch frequencies beyond 3 sigma");

  const std::size_t particles = 20000;
  Rng srng = make_rng(21, Stream::skew);
  std::vector<SkewState> skew(particles);
  for (auto& s : skew) s = {uniform01(srng), 1.0};
  std::vector<double> ensemble(particles, 1.0);
  Rng erng = make_rng(21, Stream::ensemble);
  double least = 1.0;
  int failed_step = 0;
  for (int step = 1; step <= 50; ++step) {
    for (auto& s : skew) s = skew_step(s, alpha).state;
    ensemble = ensemble_step(ensemble, alpha, erng);
    std::vector<double> a;
    for (const auto& s : skew) a.push_back(s.theta);
    const double p = stats::chi_square_two_sample(stats::histogram(a, 0.0, kPi, 30),
                                                  stats::histogram(ensemble, 0.0, kPi, 30)).p_value;
    if (p < least) least = p;
    if (p <= 1e-3 && failed_step == 0) failed_step = step;
  }
  o.require(failed_step == 0, "marginal chi-square first fails at step " + std::to_string(failed_step));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("min p over 50 steps=") + fmt(least);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--alpha", "0.5", "--theta0", "1.0", "--steps", "2000", "--seed", "9"},
      {"simulate", "--table", "pipeline", "--steps", "2000", "--seed", "9"},
      {"markov", "--alpha", "1/7", "--theta0", "pi/20"},
      {"knudsen", "--alpha", "0.5", "--initial", "mu:0.2,0.6", "--steps", "100"},
      {"knudsen", "--alpha", "1/7", "--initial", "interval:I1", "--steps", "100"},
      {"caustic", "--steps", "2000", "--seed", "2"},
      {"lyapunov", "--steps", "2000", "--seed", "3"},
      {"lyapunov", "--table", "pipeline", "--steps", "2000", "--seed", "3"},
      {"check", "--alpha", "1/7"}};
  const fs::path root = fs::temp_directory_path() / "feres_acceptance_determinism";
  std::size_t compared = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::array<std::string, 2> outs;
    std::array<fs::path, 2> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs[rep] = root / (std::to_string(c) + "_" + std::to_string(rep));
      fs::remove_all(dirs[rep]);
      std::vector<std::string> args{"feres"};
      args.insert(args.end(), commands[c].begin(), commands[c].end());
      args.insert(args.end(), {"--out", dirs[rep].string()});
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
      o.require(code == 0, commands[c][0] + " exited " + std::to_string(code) + " " + err.str());
      outs[rep] = out.str();
    }
    o.require(outs[0] == outs[1], commands[c][0] + " stdout differs");
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const bool same = slurp(entry.path()) == slurp(dirs[1] / entry.path().filename());
      o.require(same, commands[c][0] + " " + entry.path().filename().string() + " differs");
      ++compared;
    }
  }
  fs::remove_all(root);
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(commands.size()) + " commands, " +
              std::to_string(compared) + " files identical";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Outcome (*body)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "probability law", 1.0, probability_law},
      {2, "mu-invariance", 5.0, liouville},
      {3, "worked example", 1.0, worked_example},
      {4, "dense-orbit identity", 1.0, rotation_identity},
      {5, "equidistribution", 30.0, equidistribution},
      {6, "caustics", 10.0, caustics},
      {7, "Knudsen dichotomy", 60.0, knudsen},
      {8, "invariant-interval family", 1.0, interval_family},
      {9, "zero Lyapunov exponents", 10.0, lyapunov},
      {10, "skew-product consistency", 30.0, skew_product},
      {11, "determinism", 10.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= c.budget_seconds) {
      o.pass = false;
      o.detail += "; runtime " + fmt(seconds) + " s over budget " + fmt(c.budget_seconds) + " s";
    }
    failures += !o.pass;
    std::printf("criterion %d: %s  %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, seconds,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
