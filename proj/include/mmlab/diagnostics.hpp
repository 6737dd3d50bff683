#pragma once

#include <cstdint>
#include <optional>

#include "mmlab/datagen.hpp"
#include "mmlab/linalg.hpp"
#include "mmlab/solver.hpp"

namespace mmlab {

/// Standard normal CDF through erfc, accurate in the far left tail.
double normal_cdf(double x);

struct WitnessResult {
  bool separates = false;
  double min_margin = 0.0;  // min_k z_k . v for v = sum_j z_j
};

/// Evaluates the explicit separator v = sum_j y_j x_j.
WitnessResult separability_witness(const Dataset& data);

/// Empirical versions of the high-probability events used by the analysis of
/// the max-margin classifier. Statistics are reported even when the event fails.
struct EventReport {
  // (1) p/c <= |z_k|^2 <= c p
  double max_norm_ratio = 0.0;  // max_k |z_k|^2 / p
  double min_norm_ratio = 0.0;  // min_k |z_k|^2 / p
  bool norms_pass = false;
  // (2) |z_i . z_j| < c (|mu|^2 + sqrt(p log(n/delta)))
  double max_cross_ratio = 0.0;
  bool cross_pass = false;
  // (3) |mu . z_k - |mu|^2| < |mu|^2 / 2 on clean examples; nullopt when mu = 0
  std::optional<double> clean_deviation;
  bool clean_pass = false;
  // (4) |mu . z_k + |mu|^2| < |mu|^2 / 2 on noisy examples; nullopt when mu = 0
  std::optional<double> noisy_deviation;
  bool noisy_pass = false;
  // (5) |N| <= (eta + c') n
  double noisy_fraction = 0.0;
  bool noise_count_pass = false;
  // (6) linear separability
  bool solver_separable = false;
  bool witness_separable = false;
  double witness_min_margin = 0.0;

  /// Smallest c >= 1 for which events (1) and (2) hold (event (2) is strict,
  /// so any larger c passes).
  double minimal_c = 1.0;
  double minimal_c_prime = 0.0;

  bool all_pass() const;
};

EventReport check_events(const Dataset& data, const Vector& mu, double delta, double c,
                         double c_prime, double eta, const SolverConfig& solver = {});

/// (mu . w) sqrt(p) / (|w| |mu|^2): the empirical 1/c in mu.w >= |w||mu|^2/(c sqrt p).
double margin_ratio(const Vector& w, const Vector& mu, std::size_t p);
inline double margin_ratio(const Classifier& c, const Vector& mu, std::size_t p) {
  return margin_ratio(c.w, mu, p);
}

/// Exact risk of sign(w . x) under the Gaussian class-conditional model with
/// random flips: (1-eta) Phi(-m) + eta Phi(m), m = mu.w / sqrt(sum_j sigma_j (U^T w)_j^2).
double analytic_risk_gaussian(const Vector& w, const Vector& mu, const Vector& sigma_diag,
                              double eta);
double analytic_risk_gaussian(const Vector& w, const ModelSpec& spec, double eta);

struct RiskEstimate {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;  // 95% binomial
  std::size_t m_test = 0;
  std::size_t errors = 0;
};

/// Monte-Carlo test error on m_test fresh samples from (spec, noise). Samples
/// are drawn in independently seeded chunks.
RiskEstimate mc_risk(const Vector& w, const ModelSpec& spec, const NoiseSpec& noise,
                     std::size_t m_test, std::uint64_t seed);

double theorem_bound(double mu_norm_sq, double p, double eta, double c);
double corollary_bound(double gamma, double s, double p, double eta, double c);

struct BayesReference {
  double exact_gaussian = 0.0;  // eta + (1 - 2 eta) Phi(-|mu|)
  double exp_bound = 0.0;       // eta + exp(-c |mu|^2)
};

BayesReference bayes_reference(double mu_norm, double eta, double c = 1.0);

struct RiskReport {
  std::optional<double> analytic;
  RiskEstimate monte_carlo;
  double theorem_bound = 0.0;
  BayesReference bayes;
  double margin_ratio = 0.0;
};

/// Bundles the risk quantities for one classifier. The analytic value is
/// filled only for the Gaussian model with random or no noise.
RiskReport risk_report(const Vector& w, const ModelSpec& spec, const NoiseSpec& noise,
                       std::size_t m_test, std::uint64_t seed, double c = 1.0);

}  // namespace mmlab
