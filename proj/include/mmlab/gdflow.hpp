#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "mmlab/datagen.hpp"
#include "mmlab/linalg.hpp"

namespace mmlab {

struct StepSizePolicy {
  enum class Kind { Fixed, SmoothnessBound };
  Kind kind = Kind::SmoothnessBound;
  double alpha = 0.0;

  static StepSizePolicy fixed(double alpha) { return {Kind::Fixed, alpha}; }
  /// alpha = 1 / (n max_k |x_k|^2), a descent step on the sublevel set {R <= n}.
  static StepSizePolicy smoothness_bound() { return {Kind::SmoothnessBound, 0.0}; }
};

struct GdConfig {
  StepSizePolicy step = StepSizePolicy::smoothness_bound();
  std::size_t max_iters = 10'000;
  std::size_t log_stride = 100;
  std::optional<double> direction_gap_target;
  bool keep_loss_snapshots = false;

  void validate() const;
};

/// Optional quantities tracked along the trajectory.
struct GdReferences {
  std::optional<Vector> w;   // reference direction, usually the exact max-margin solution
  std::optional<Vector> mu;  // model mean, for mu . v_t
};

struct TraceEntry {
  std::size_t iter = 0;
  double loss = 0.0;      // R(v_t)
  double log_loss = 0.0;  // log R(v_t)
  double a_max = 1.0;
  double mu_dot_v = std::numeric_limits<double>::quiet_NaN();
  double norm_v = 0.0;
  double direction_gap = std::numeric_limits<double>::quiet_NaN();
};

struct TrainTrace {
  std::vector<TraceEntry> entries;
  /// Per-example log-losses -v_t . z_k at each logged iteration, when requested.
  std::vector<Vector> log_loss_snapshots;
  double sup_a_max = 1.0;
  double step_size = 0.0;
  std::size_t iterations = 0;
  bool stopped_early = false;
  /// Set when a smoothness-bound step no longer lowered the computed loss; the
  /// step is discarded and training ends at the current iterate.
  bool stationary = false;
  /// Monotone-loss violations seen (only possible under a fixed step).
  std::size_t loss_increases = 0;
};

struct TrainResult {
  Vector v;
  TrainTrace trace;
};

/// R(v) = sum_k exp(-y_k v . x_k); log-sum-exp in long double when an exponent exceeds 700.
double exp_loss(const Vector& v, const Dataset& data);
double log_exp_loss(const Vector& v, const Dataset& data);
Vector grad_exp_loss(const Vector& v, const Dataset& data);

/// max_{k,l} exp(-v.z_k) / exp(-v.z_l), evaluated through exponent differences.
double loss_ratio_max(const Vector& v, const Dataset& data);

/// 1 - cos(v, w), in [0, 2]. Throws DomainError for a zero vector.
double direction_gap(const Vector& v, const Vector& w);

double smoothness_step(const Dataset& data);

/// Gradient descent from v = 0 on the exponential loss. Iterates are kept as
/// v_t = sum_k beta_k z_k, which the update preserves exactly.
/// Throws DivergingLoss if the loss increases beyond rounding under the
/// smoothness step; a rounding-level increase ends training as stationary.
TrainResult train_gd(const Dataset& data, const GdConfig& cfg, const GdReferences& refs = {});

}  // namespace mmlab
