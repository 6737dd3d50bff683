// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance                 run every criterion
//   acceptance --only 3,9      run a subset
//   acceptance --calibrate     print the empirical statistics behind the frozen
//                              loss-ratio cap and margin-ratio floor

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmlab/diagnostics.hpp"
#include "mmlab/error.hpp"
#include "mmlab/gdflow.hpp"
#include "mmlab/harness.hpp"
#include "mmlab/seed.hpp"
#include "mmlab/solver.hpp"

using namespace mmlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Every gradient-descent run in this binary is recorded for the monotone-loss check.
struct GdLedger {
  std::size_t runs = 0;
  std::size_t logged = 0;
  std::size_t violations = 0;
  std::size_t stationary = 0;

  void add(const TrainTrace& trace, std::size_t n) {
    ++runs;
    if (trace.stationary) ++stationary;
    violations += trace.loss_increases;
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
      ++logged;
      const double loss = trace.entries[i].loss;
      if (loss > static_cast<double>(n)) ++violations;
      if (i > 0 && loss > trace.entries[i - 1].loss) ++violations;
    }
  }
} gd_ledger;

TrainResult run_gd(const Dataset& d, const GdConfig& cfg, const GdReferences& refs = {}) {
  TrainResult r = train_gd(d, cfg, refs);
  gd_ledger.add(r.trace, d.n());
  return r;
}

// ---------------------------------------------------------------------------
// Loss-ratio and margin instances: figure-one model at p = 20 n.

constexpr std::size_t kRatioN = 100;
constexpr std::size_t kRatioP = 2000;
constexpr std::size_t kRatioIters = 5000;
constexpr std::uint64_t kRatioBase = 0x51a7e5ULL;

// Frozen from `acceptance --calibrate`: the empirical sup of A_t^max over 20
// seeds and the empirical minimum margin ratio over 100 seeds.
constexpr double kCalibratedSupAmax = 9.005006;
constexpr double kCalibratedMinMarginRatio = 4.793303;
constexpr double kAmaxCap = 2.0 * kCalibratedSupAmax;
constexpr double kMarginFloor = 0.5 * kCalibratedMinMarginRatio;

ModelSpec ratio_spec() { return ModelSpec::boolean_rare_weak(kRatioP, 100, 0.2); }

Dataset ratio_instance(std::uint64_t seed) {
  const ModelSpec spec = ratio_spec();
  return apply_noise(sample_clean(spec, kRatioN, derive_seed(kRatioBase, seed, 1)),
                     NoiseSpec::random_flip(0.05), derive_seed(kRatioBase, seed, 2));
}

double sup_a_max(std::uint64_t seed) {
  GdConfig cfg;
  cfg.max_iters = kRatioIters;
  cfg.log_stride = 100;
  return run_gd(ratio_instance(seed), cfg).trace.sup_a_max;
}

double margin_ratio_of(std::uint64_t seed) {
  const Dataset d = ratio_instance(seed);
  return margin_ratio(max_margin(d), mu_of(ratio_spec()), kRatioP);
}

// ---------------------------------------------------------------------------

SweepConfig interpolation_sweep() {
  SweepConfig cfg = preset("fig1", 100);
  cfg.p_grid = {500, 1000, 3000};
  cfg.record_timing = false;
  return cfg;
}

std::string sweep_csv(const SweepConfig& cfg, std::size_t threads) {
  const SweepResult r = run_sweep(cfg, {.threads = threads});
  const fs::path path = fs::temp_directory_path() / fmt("mmlab_accept_%zu.csv", threads);
  emit_csv(r, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(path);
  return ss.str();
}

std::string first_sweep_csv;

Outcome interpolation() {
  const SweepConfig cfg = interpolation_sweep();
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult r = run_sweep(cfg, {.threads = 1});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t separable = 0, interpolating = 0;
  for (const auto& rec : r.records) {
    if (!rec.separable) continue;
    ++separable;
    if (rec.train_err == 0.0) ++interpolating;
  }
  const std::size_t total = cfg.resolve().size() * cfg.trials;
  const fs::path path = fs::temp_directory_path() / "mmlab_accept_first.csv";
  emit_csv(r, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  first_sweep_csv = ss.str();
  fs::remove(path);

  const bool pass = r.failures.empty() && separable > 0 && interpolating == separable &&
                    static_cast<double>(separable) >= 0.99 * static_cast<double>(total);
  return {pass, fmt("%zu/%zu separable, %zu/%zu separable trials with zero train error, %.0fs on 1 thread",
                    separable, total, interpolating, separable, secs)};
}

Outcome threshold() {
  // Only the largest dimension of the preset grid enters the criterion.
  SweepConfig cfg = preset("fig4", 100);
  cfg.p_grid = {3000};
  cfg.record_timing = false;
  const SweepResult r = run_sweep(cfg, {});
  double at_half = NAN, at_065 = NAN;
  std::string all;
  for (const auto& a : r.aggregates) {
    all += fmt(" beta=%.2f:%.4f", *a.point.beta, a.mean_test_err);
    if (*a.point.beta == 0.5) at_half = a.mean_test_err;
    if (*a.point.beta == 0.65) at_065 = a.mean_test_err;
  }
  const double eta = cfg.eta;
  const bool near_bayes = std::abs(at_065 - eta) <= 0.05;
  const bool gap = at_half - at_065 >= 0.05;
  return {near_bayes && gap,
          fmt("p=3000 mean test error%s; |err(0.65) - eta| = %.4f (need <= 0.05), err(0.5) - err(0.65) = %.4f "
              "(need >= 0.05)",
              all.c_str(), std::abs(at_065 - eta), at_half - at_065)};
}

Dataset random_small_instance(std::mt19937_64& eng, std::uint64_t seed) {
  std::uniform_int_distribution<std::size_t> n_dist(1, 8), p_dist(3, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = n_dist(eng);
  const std::size_t p = p_dist(eng);
  const std::size_t s = 1 + static_cast<std::size_t>(u(eng) * static_cast<double>(p - 1));
  const Rotation rot = u(eng) < 0.3 ? Rotation::seeded_orthogonal(seed) : Rotation::identity();
  ModelSpec spec;
  switch (seed % 3) {
    case 0: spec = ModelSpec::rare_weak(p, s, 2.0 * u(eng), rot); break;
    case 1: spec = ModelSpec::boolean_rare_weak(p, s, 0.05 + 0.4 * u(eng), rot); break;
    default: {
      Vector mu(static_cast<Eigen::Index>(p)), sigma(static_cast<Eigen::Index>(p));
      std::normal_distribution<double> normal;
      for (Eigen::Index j = 0; j < mu.size(); ++j) {
        mu[j] = normal(eng);
        sigma[j] = 0.05 + 0.95 * u(eng);
      }
      spec = ModelSpec::gaussian(mu, sigma, rot);
    }
  }
  const NoiseSpec noise = NoiseSpec::random_flip(0.2 * u(eng));
  return apply_noise(sample_clean(spec, n, derive_seed(seed, 1)), noise, derive_seed(seed, 2));
}

Outcome solver_correctness() {
  std::mt19937_64 eng(20240301);
  std::size_t agree = 0, separable = 0, kkt_ok = 0;
  double worst_rel = 0.0, worst_kkt = 0.0;
  const std::size_t total = 200;
  for (std::uint64_t i = 0; i < total; ++i) {
    const Dataset d = random_small_instance(eng, i);
    std::optional<Classifier> fast, slow;
    try {
      fast = max_margin(d);
    } catch (const NotSeparable&) {
    }
    try {
      slow = brute_force_max_margin(d);
    } catch (const NotSeparable&) {
    }
    if (!fast && !slow) {
      ++agree;
      ++kkt_ok;
      continue;
    }
    if (!fast || !slow) continue;
    ++separable;
    const double rel = (fast->w - slow->w).norm() / slow->w.norm();
    worst_rel = std::max(worst_rel, rel);
    if (rel <= 1e-6) ++agree;
    const KktResiduals k = kkt_residuals(fast->w, *fast->dual, d);
    worst_kkt = std::max(worst_kkt, k.max());
    if (k.feasibility <= 1e-8 && k.stationarity <= 1e-8 && k.complementary_slackness <= 1e-8) ++kkt_ok;
  }
  return {agree == total && kkt_ok == total,
          fmt("%zu/%zu agree (%zu separable), max relative w error %.2e, max KKT residual %.2e", agree,
              total, separable, worst_rel, worst_kkt)};
}

Outcome implicit_bias() {
  const std::size_t instances = 20;
  std::size_t converged = 0, monotone = 0, separable = 0;
  double worst_gap = 0.0;
  const auto spec = ModelSpec::boolean_rare_weak(400, 100, 0.2);
  for (std::uint64_t seed = 0; seed < 200 && separable < instances; ++seed) {
    const Dataset d = apply_noise(sample_clean(spec, 20, derive_seed(0xb1a5ULL, seed, 1)),
                                  NoiseSpec::random_flip(0.05), derive_seed(0xb1a5ULL, seed, 2));
    Classifier w;
    try {
      w = max_margin(d);
    } catch (const NotSeparable&) {
      continue;
    }
    ++separable;
    GdConfig cfg;
    cfg.max_iters = 20'000;
    cfg.log_stride = 100;
    const TrainResult r = run_gd(d, cfg, {w.w, mu_of(spec)});
    const auto& e = r.trace.entries;
    const double gap = e.back().direction_gap;
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 1e-2) ++converged;
    bool nonincreasing = true;
    for (std::size_t i = e.size() / 2 + 1; i < e.size(); ++i) {
      if (e[i].direction_gap > e[i - 1].direction_gap) nonincreasing = false;
    }
    if (nonincreasing) ++monotone;
  }
  return {separable == instances && converged == instances && monotone == instances,
          fmt("n=20 p=400, 20000 iterations: %zu/%zu reach gap <= 1e-2 (worst %.2e), %zu/%zu nonincreasing over "
              "the last half",
              converged, separable, worst_gap, monotone, separable)};
}

Outcome monotone_loss() {
  // Extra runs beyond those made by the other criteria, across all three models.
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 eng(seed);
    const Dataset d = random_small_instance(eng, seed + 1000);
    GdConfig cfg;
    cfg.max_iters = 2000;
    cfg.log_stride = 1;
    run_gd(d, cfg);
  }
  return {gd_ledger.violations == 0 && gd_ledger.runs > 0,
          fmt("%zu violations across %zu runs and %zu logged steps (%zu runs ended at a numerically stationary "
              "iterate)",
              gd_ledger.violations, gd_ledger.runs, gd_ledger.logged, gd_ledger.stationary)};
}

Outcome loss_ratio() {
  double sup = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) sup = std::max(sup, sup_a_max(seed));
  return {std::isfinite(sup) && sup <= kAmaxCap,
          fmt("n=%zu p=%zu, %zu iterations: sup A_max over 20 seeds %.4f, cap %.4f (2 x calibrated %.4f)", kRatioN,
              kRatioP, kRatioIters, sup, kAmaxCap, kCalibratedSupAmax)};
}

Outcome margin_lower_bound() {
  double lowest = INFINITY;
  std::size_t positive = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double r = margin_ratio_of(seed);
    lowest = std::min(lowest, r);
    if (r > 0.0) ++positive;
  }
  return {positive == 100 && lowest >= kMarginFloor,
          fmt("%zu/100 positive, minimum %.4f, floor %.4f (0.5 x calibrated %.4f)", positive, lowest, kMarginFloor,
              kCalibratedMinMarginRatio)};
}

Outcome risk_consistency() {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal;
  std::size_t within = 0;
  double worst = 0.0;
  const std::size_t m_test = 100'000;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto p = static_cast<Eigen::Index>(2 + static_cast<std::size_t>(u(eng) * 29.0));
    Vector mu(p), sigma(p);
    const double scale = 1.5 * u(eng) / std::sqrt(static_cast<double>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
      mu[j] = scale * normal(eng);
      sigma[j] = 0.05 + 0.95 * u(eng);
    }
    const Rotation rot = u(eng) < 0.5 ? Rotation::seeded_orthogonal(i) : Rotation::identity();
    const ModelSpec spec = ModelSpec::gaussian(mu, sigma, rot);
    const double eta = 0.3 * u(eng);
    const NoiseSpec noise = NoiseSpec::random_flip(eta);
    Vector w(p);
    for (Eigen::Index j = 0; j < p; ++j) w[j] = normal(eng);
    const Dataset train = apply_noise(sample_clean(spec, 20, derive_seed(i, 1)), noise, derive_seed(i, 2));
    try {
      w = max_margin(train).w;
    } catch (const NotSeparable&) {
      // keep the random direction
    }
    const double exact = analytic_risk_gaussian(w, spec, eta);
    const RiskEstimate mc = mc_risk(w, spec, noise, m_test, derive_seed(i, 3));
    const double sd = std::sqrt(exact * (1.0 - exact) / static_cast<double>(m_test));
    const double z = std::abs(mc.estimate - exact) / sd;
    worst = std::max(worst, z);
    if (z <= 3.0) ++within;
  }
  return {within >= 48, fmt("%zu/50 within 3 binomial sd (largest deviation %.2f sd)", within, worst)};
}

Outcome gradient_check() {
  std::mt19937_64 eng(99);
  std::uniform_int_distribution<std::size_t> n_dist(1, 10), p_dist(1, 20);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const std::size_t n = n_dist(eng), p = p_dist(eng);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Labels y(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(k, j) = normal(eng);
      y[k] = normal(eng) > 0.0 ? 1 : -1;
    }
    const Dataset d(x, y, y);
    Vector v(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = 0.5 * normal(eng);
    const Vector g = grad_exp_loss(v, d);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      Vector up = v, down = v;
      up[j] += h;
      down[j] -= h;
      const double fd = (exp_loss(up, d) - exp_loss(down, d)) / (2.0 * h);
      const double denom = std::max(std::abs(g[j]), std::abs(fd));
      const double rel = denom == 0.0 ? 0.0 : std::abs(fd - g[j]) / denom;
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-5, fmt("max relative coordinate error %.2e over 100 comparisons", worst)};
}

Outcome determinism() {
  const SweepConfig cfg = interpolation_sweep();
  if (first_sweep_csv.empty()) first_sweep_csv = sweep_csv(cfg, 1);
  const std::string four = sweep_csv(cfg, 4);
  const std::string eight = sweep_csv(cfg, 8);
  const bool same = four == first_sweep_csv && eight == first_sweep_csv;
  return {same, fmt("1/4/8-thread CSVs %s (%zu bytes each)", same ? "byte-identical" : "differ",
                    first_sweep_csv.size())};
}

void calibrate() {
  double sup = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double s = sup_a_max(seed);
    std::printf("seed %2llu sup A_max %.6f\n", static_cast<unsigned long long>(seed), s);
    sup = std::max(sup, s);
  }
  double lowest = INFINITY;
  for (std::uint64_t seed = 0; seed < 100; ++seed) lowest = std::min(lowest, margin_ratio_of(seed));
  std::printf("sup A_max over 20 seeds: %.6f\nmin margin ratio over 100 seeds: %.6f\n", sup, lowest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  bool calibrate_only = false;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_flag("--calibrate", calibrate_only, "print calibration statistics and exit");
  CLI11_PARSE(app, argc, argv);

  if (calibrate_only) {
    calibrate();
    return 0;
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"interpolation", interpolation},
      {"threshold", threshold},
      {"solver correctness", solver_correctness},
      {"implicit bias", implicit_bias},
      {"monotone loss", monotone_loss},
      {"loss-ratio boundedness", loss_ratio},
      {"margin lower bound", margin_lower_bound},
      {"risk consistency", risk_consistency},
      {"gradient check", gradient_check},
      {"determinism", determinism},
  };
  // Monotone loss summarises every GD run, so it is evaluated after the others.
  std::vector<std::size_t> order = {0, 1, 2, 3, 5, 6, 7, 8, 9, 4};
  std::set<int> selected(only.begin(), only.end());

  std::vector<std::pair<std::size_t, Outcome>> results;
  for (std::size_t idx : order) {
    if (!selected.empty() && !selected.count(static_cast<int>(idx + 1))) continue;
    Outcome o;
    try {
      o = criteria[idx].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", idx + 1, criteria[idx].first, o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(idx, o);
  }
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });
  std::printf("%zu/%zu criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
  return failed == 0 ? 0 : 1;
}
