#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmlab/datagen.hpp"
#include "mmlab/io.hpp"

namespace mmlab {

struct GridPoint {
  std::size_t grid_id = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t s = 0;
  double gamma = 0.0;
  double eta = 0.0;
  std::optional<double> beta;  // s = round(p^beta) when set
};

/// A sweep over the Cartesian product of the non-empty grids. Empty grids fall
/// back to the scalar field of the same name.
struct SweepConfig {
  std::string name = "custom";
  ModelKind model = ModelKind::BooleanRareWeak;
  NoiseKind noise = NoiseKind::RandomFlip;
  std::size_t n = 100;
  std::size_t p = 1000;
  std::size_t s = 100;
  double gamma = 0.2;
  double eta = 0.05;

  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> p_grid;
  std::vector<std::size_t> s_grid;
  std::vector<double> gamma_grid;
  std::vector<double> eta_grid;
  std::vector<double> beta_grid;

  std::size_t trials = 100;
  std::uint64_t base_seed = 20210201;
  std::size_t m_test = 10'000;
  bool run_gd = false;
  std::size_t gd_iters = 2'000;
  bool record_events = false;
  /// When false, wall_ms is written as 0 so outputs are byte-reproducible.
  bool record_timing = true;
  double delta = 0.1;

  /// Grid points in a fixed nesting order (n, eta, gamma, s or beta, p).
  std::vector<GridPoint> resolve() const;
  void validate() const;
};

struct EventSummary {
  bool all_pass = false;
  double minimal_c = 0.0;
  double minimal_c_prime = 0.0;
  bool clean_pass = false;
  bool noisy_pass = false;
  bool witness_separable = false;
};

struct TrialRecord {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  std::size_t grid_id = 0;
  std::size_t p = 0;
  std::size_t s = 0;
  double gamma = 0.0;
  double eta = 0.0;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool separable = false;
  double train_err = kNaN;
  double test_err = kNaN;
  double test_ci = kNaN;
  double min_margin = kNaN;
  double norm_w = kNaN;
  double mu_dot_w = kNaN;
  double margin_ratio = kNaN;
  std::size_t n_noisy = 0;
  double sup_a_max = kNaN;
  double dir_gap = kNaN;
  double wall_ms = 0.0;
  std::optional<EventSummary> events;
};

struct GridAggregate {
  GridPoint point;
  std::size_t records = 0;
  std::size_t separable = 0;
  double mean_test_err = TrialRecord::kNaN;
  double stderr_test_err = TrialRecord::kNaN;
  double mean_train_err = TrialRecord::kNaN;
};

struct SweepResult {
  SweepConfig config;
  /// Sorted by (grid_id, trial).
  std::vector<TrialRecord> records;
  std::vector<GridAggregate> aggregates;
  /// Trials that threw something other than NotSeparable, as "grid:trial: message".
  std::vector<std::string> failures;
};

struct SweepOptions {
  /// 0 means hardware concurrency. MML_THREADS caps either way.
  std::size_t threads = 0;
  /// JSON-lines file of completed records; existing entries are skipped on rerun.
  std::optional<std::filesystem::path> checkpoint;
  /// Stop after this many new trials (simulates an interrupted run).
  std::optional<std::size_t> max_new_trials;
};

std::size_t effective_threads(std::size_t requested);

ModelSpec model_for(const SweepConfig& cfg, const GridPoint& point);

/// generate -> noise -> exact solve -> risk and diagnostics -> optional GD.
/// NotSeparable is recorded, not thrown. `test_seed` overrides the derived
/// seed of the test sample.
TrialRecord run_trial(const SweepConfig& cfg, const GridPoint& point, std::size_t trial,
                      std::uint64_t trial_seed, std::optional<std::uint64_t> test_seed = {});

std::uint64_t trial_seed(const SweepConfig& cfg, std::size_t grid_id, std::size_t trial);

SweepResult run_sweep(const SweepConfig& cfg, const SweepOptions& options = {});

/// Rebuilds aggregates from records (sorted in place).
SweepResult assemble(const SweepConfig& cfg, std::vector<TrialRecord> records);

/// fig1..fig4 with `trials` trials per grid point.
SweepConfig preset(std::string_view name, std::size_t trials = 100);
std::vector<std::size_t> log_spaced_grid(std::size_t lo, std::size_t hi, std::size_t count);

std::string sweep_csv_header();
std::string to_csv_row(const TrialRecord& r);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);
std::vector<TrialRecord> read_sweep_csv(const std::filesystem::path& path);
/// SVG of mean test error against the swept axis, one curve per series, with
/// a dotted reference line at each noise level.
std::string render_svg(const SweepResult& result);
void emit_plot(const SweepResult& result, const std::filesystem::path& path);

Json to_json(const SweepConfig& cfg);
SweepConfig sweep_config_from_json(const Json& j, SweepConfig base = {});
Json to_json(const TrialRecord& r);
TrialRecord trial_record_from_json(const Json& j);

}  // namespace mmlab
