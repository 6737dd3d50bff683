#include "mmlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mmlab/error.hpp"
#include "mmlab/seed.hpp"

namespace mmlab {

namespace {

constexpr std::size_t kRiskChunk = 2048;
constexpr double kZ95 = 1.959963984540054;

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

WitnessResult separability_witness(const Dataset& data) {
  const Matrix z = data.signed_rows();
  const Vector v = z.colwise().sum().transpose();
  WitnessResult r;
  r.min_margin = (z * v).minCoeff();
  r.separates = r.min_margin > 0.0;
  return r;
}

bool EventReport::all_pass() const {
  return norms_pass && cross_pass && clean_pass && noisy_pass && noise_count_pass && solver_separable;
}

EventReport check_events(const Dataset& data, const Vector& mu, double delta, double c,
                         double c_prime, double eta, const SolverConfig& solver) {
  if (static_cast<std::size_t>(mu.size()) != data.p()) throw ConfigError("mu has wrong dimension");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  const Matrix z = data.signed_rows();
  const Eigen::MatrixXd gram = z * z.transpose();

  EventReport r;
  r.max_norm_ratio = gram.diagonal().maxCoeff() / p;
  r.min_norm_ratio = gram.diagonal().minCoeff() / p;
  r.norms_pass = r.min_norm_ratio >= 1.0 / c && r.max_norm_ratio <= c;

  const double mu2 = mu.squaredNorm();
  const double scale = mu2 + std::sqrt(p * std::log(n / delta));
  double cross = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j) cross = std::max(cross, std::abs(gram(i, j)));
  }
  r.max_cross_ratio = scale > 0.0 ? cross / scale : (cross > 0.0 ? INFINITY : 0.0);
  r.cross_pass = r.max_cross_ratio < c;

  if (mu2 > 0.0) {
    const Vector proj = z * mu;
    double clean = 0.0;
    double noisy = 0.0;
    const Labels& y = data.y();
    const Labels& yt = data.y_tilde();
    for (Eigen::Index k = 0; k < proj.size(); ++k) {
      if (y[k] == yt[k]) {
        clean = std::max(clean, std::abs(proj[k] - mu2) / mu2);
      } else {
        noisy = std::max(noisy, std::abs(proj[k] + mu2) / mu2);
      }
    }
    r.clean_deviation = clean;
    r.noisy_deviation = noisy;
    r.clean_pass = clean < 0.5;
    r.noisy_pass = noisy < 0.5;
  }

  r.noisy_fraction = static_cast<double>(data.noisy_set().size()) / n;
  r.noise_count_pass = r.noisy_fraction <= eta + c_prime;

  const WitnessResult witness = separability_witness(data);
  r.witness_separable = witness.separates;
  r.witness_min_margin = witness.min_margin;
  try {
    (void)max_margin(data, solver);
    r.solver_separable = true;
  } catch (const NotSeparable&) {
    r.solver_separable = false;
  }

  r.minimal_c = std::max({1.0, r.max_norm_ratio,
                          r.min_norm_ratio > 0.0 ? 1.0 / r.min_norm_ratio : INFINITY,
                          r.max_cross_ratio});
  r.minimal_c_prime = std::max(0.0, r.noisy_fraction - eta);
  return r;
}

double margin_ratio(const Vector& w, const Vector& mu, std::size_t p) {
  if (w.size() != mu.size()) throw ConfigError("margin_ratio needs vectors of equal length");
  const double wn = w.norm();
  const double mu2 = mu.squaredNorm();
  if (wn == 0.0 || mu2 == 0.0) throw DomainError("margin_ratio is undefined for zero w or mu");
  return mu.dot(w) * std::sqrt(static_cast<double>(p)) / (wn * mu2);
}

double analytic_risk_gaussian(const Vector& w, const Vector& mu, const Vector& sigma_diag,
                              double eta) {
  if (w.size() != mu.size() || w.size() != sigma_diag.size()) {
    throw ConfigError("analytic_risk_gaussian needs vectors of equal length");
  }
  const double spread = std::sqrt(sigma_diag.dot(w.cwiseAbs2()));
  if (!(spread > 0.0)) throw DomainError("analytic risk is undefined for w = 0");
  const double m = mu.dot(w) / spread;
  return (1.0 - eta) * normal_cdf(-m) + eta * normal_cdf(m);
}

double analytic_risk_gaussian(const Vector& w, const ModelSpec& spec, double eta) {
  spec.validate();
  if (spec.kind == ModelKind::BooleanRareWeak) {
    throw ConfigError("no closed-form risk for the Boolean model");
  }
  if (static_cast<std::size_t>(w.size()) != spec.p) throw ConfigError("w has wrong dimension");
  const Vector sigma = spec.kind == ModelKind::GaussianCC
                           ? spec.sigma_diag
                           : Vector::Ones(static_cast<Eigen::Index>(spec.p));
  if (!spec.rotation.seeded) return analytic_risk_gaussian(w, spec.mu, sigma, eta);
  const Vector latent_w = rotation_matrix(spec.p, spec.rotation).transpose() * w;
  return analytic_risk_gaussian(latent_w, spec.mu, sigma, eta);
}

RiskEstimate mc_risk(const Vector& w, const ModelSpec& spec, const NoiseSpec& noise,
                     std::size_t m_test, std::uint64_t seed) {
  spec.validate();
  noise.validate();
  if (m_test < 100) throw ConfigError("mc_risk needs m_test >= 100");
  if (static_cast<std::size_t>(w.size()) != spec.p) throw ConfigError("w has wrong dimension");

  // w . (U q + y~ U mu) = (U^T w) . (q + y~ mu), so draw in the latent basis.
  const Vector latent_w =
      spec.rotation.seeded ? Vector(rotation_matrix(spec.p, spec.rotation).transpose() * w) : w;

  RiskEstimate r;
  r.m_test = m_test;
  for (std::size_t chunk = 0, done = 0; done < m_test; ++chunk) {
    const std::size_t rows = std::min(kRiskChunk, m_test - done);
    const Dataset clean = sample_latent(spec, rows, derive_seed(seed, chunk, 0));
    const Dataset noisy = apply_noise(clean, noise, derive_seed(seed, chunk, 1),
                                      {spec.mu.data(), spec.p});
    const Vector scores = noisy.x() * latent_w;
    for (Eigen::Index k = 0; k < scores.size(); ++k) {
      if (!(scores[k] * noisy.y()[k] > 0.0)) ++r.errors;
    }
    done += rows;
  }
  const double m = static_cast<double>(m_test);
  r.estimate = static_cast<double>(r.errors) / m;
  const double smoothed = (static_cast<double>(r.errors) + 0.5) / (m + 1.0);
  r.ci_halfwidth = kZ95 * std::sqrt(smoothed * (1.0 - smoothed) / m);
  return r;
}

double theorem_bound(double mu_norm_sq, double p, double eta, double c) {
  if (!(p > 0.0)) throw ConfigError("theorem_bound needs p > 0");
  return eta + std::exp(-c * mu_norm_sq * mu_norm_sq / p);
}

double corollary_bound(double gamma, double s, double p, double eta, double c) {
  if (!(p > 0.0)) throw ConfigError("corollary_bound needs p > 0");
  const double g2 = gamma * gamma;
  return eta + std::exp(-c * g2 * g2 * s * s / p);
}

BayesReference bayes_reference(double mu_norm, double eta, double c) {
  if (!(eta >= 0.0 && eta < 0.5)) throw ConfigError("bayes_reference needs eta in [0, 1/2)");
  return {eta + (1.0 - 2.0 * eta) * normal_cdf(-mu_norm),
          eta + std::exp(-c * mu_norm * mu_norm)};
}

RiskReport risk_report(const Vector& w, const ModelSpec& spec, const NoiseSpec& noise,
                       std::size_t m_test, std::uint64_t seed, double c) {
  RiskReport r;
  if (spec.kind != ModelKind::BooleanRareWeak && noise.kind != NoiseKind::MarginTargetedFlip) {
    r.analytic = analytic_risk_gaussian(w, spec, noise.eta);
  }
  r.monte_carlo = mc_risk(w, spec, noise, m_test, seed);
  const double mu2 = mu_norm_sq(spec);
  r.theorem_bound = theorem_bound(mu2, static_cast<double>(spec.p), noise.eta, c);
  r.bayes = bayes_reference(std::sqrt(mu2), noise.eta, c);
  if (mu2 > 0.0 && w.norm() > 0.0) r.margin_ratio = margin_ratio(w, mu_of(spec), spec.p);
  return r;
}

}  // namespace mmlab
