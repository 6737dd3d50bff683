#pragma once

#include <optional>

#include "mmlab/datagen.hpp"
#include "mmlab/linalg.hpp"

namespace mmlab {

struct SolverConfig {
  double kkt_tol = 1e-8;
  std::size_t max_passes = 1'000'000;
  /// Cap on sum(alpha) = |w|^2; exceeding it is reported as NotSeparable.
  double unboundedness_guard = 1e14;

  void validate() const;
};

/// Optimality residuals of a primal/dual pair for the hard-margin problem.
struct KktResiduals {
  double feasibility = 0.0;              // max(0, 1 - min_k y_k w.x_k)
  double stationarity = 0.0;             // |w - sum_k alpha_k y_k x_k| / |w|
  double complementary_slackness = 0.0;  // max(0, max_k alpha_k (y_k w.x_k - 1))

  double max() const;
};

struct Classifier {
  Vector w;
  IndexSet support_set;
  std::optional<Vector> dual;
  KktResiduals kkt;
};

/// Minimum-norm w with y_k (w . x_k) >= 1 for all k, via greedy coordinate
/// ascent on the dual  max_{alpha >= 0} sum(alpha) - |sum alpha_k z_k|^2 / 2
/// with exact active-set refinement. Throws NotSeparable when no such w exists.
Classifier max_margin(const Dataset& data, const SolverConfig& cfg = {});

/// Enumerates every candidate active set; n <= 12.
Classifier brute_force_max_margin(const Dataset& data);

KktResiduals kkt_residuals(const Vector& w, const Vector& alpha, const Dataset& data);

struct MarginStats {
  double min_margin = 0.0;
  std::size_t argmin = 0;
  Vector margins;
};

MarginStats margin_stats(const Vector& w, const Dataset& data);
inline MarginStats margin_stats(const Classifier& c, const Dataset& data) {
  return margin_stats(c.w, data);
}

/// Fraction of training examples with y_k (w . x_k) <= 0.
double train_error(const Vector& w, const Dataset& data);

}  // namespace mmlab
