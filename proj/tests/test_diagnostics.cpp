#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mmlab/diagnostics.hpp"
#include "mmlab/error.hpp"
#include "support.hpp"

using namespace mmlab;
using mmlab::testing::make_dataset;

namespace {

Dataset fig1_draw(std::size_t p, std::uint64_t seed) {
  const auto spec = ModelSpec::boolean_rare_weak(p, 100, 0.2);
  return apply_noise(sample_clean(spec, 100, seed), NoiseSpec::random_flip(0.05), seed + 1);
}

}  // namespace

TEST_CASE("normal cdf reference values") {
  // Reference values from an independent arbitrary-precision evaluation.
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(-2.0) == doctest::Approx(0.02275013194817921).epsilon(1e-15));
  CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-13));
  CHECK(normal_cdf(2.0) + normal_cdf(-2.0) == doctest::Approx(1.0).epsilon(1e-16));
}

TEST_CASE("analytic risk closed forms") {
  Vector mu(3);
  mu << 1.2, -0.4, 0.9;
  const Vector ones = Vector::Ones(3);
  CHECK(analytic_risk_gaussian(mu, mu, ones, 0.0) == doctest::Approx(normal_cdf(-mu.norm())).epsilon(1e-15));

  const Vector zero = Vector::Zero(3);
  for (double eta : {0.0, 0.1, 0.3}) {
    CHECK(analytic_risk_gaussian(Vector::Ones(3), zero, ones, eta) == 0.5);
  }

  // m = mu.w / |w| = 2 with mu = (2, 0), w = (1, 0).
  Vector mu2(2), w2(2);
  mu2 << 2.0, 0.0;
  w2 << 1.0, 0.0;
  const double r = analytic_risk_gaussian(w2, mu2, Vector::Ones(2), 0.05);
  CHECK(r == doctest::Approx(0.0704751187533613).epsilon(1e-14));
  CHECK(r == doctest::Approx(0.95 * normal_cdf(-2.0) + 0.05 * normal_cdf(2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(analytic_risk_gaussian(zero, mu, ones, 0.1), DomainError);
  CHECK_THROWS_AS(analytic_risk_gaussian(Vector::Ones(5), ModelSpec::boolean_rare_weak(5, 2, 0.2), 0.1),
                  ConfigError);
}

TEST_CASE("analytic risk is scale invariant, bounded below by eta and Bayes-optimal along mu") {
  std::mt19937_64 eng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    Vector mu(6), w(6), sigma(6);
    for (Eigen::Index j = 0; j < 6; ++j) {
      mu[j] = normal(eng);
      w[j] = normal(eng);
      sigma[j] = 0.1 + 0.9 * std::abs(std::tanh(normal(eng)));
    }
    const double eta = 0.45 * std::abs(std::tanh(normal(eng)));
    const double r = analytic_risk_gaussian(w, mu, sigma, eta);
    CHECK(analytic_risk_gaussian(7.5 * w, mu, sigma, eta) == doctest::Approx(r).epsilon(1e-14));
    CHECK(r >= eta);
    const double along = analytic_risk_gaussian(mu, mu, Vector::Ones(6), eta);
    CHECK(along == doctest::Approx(bayes_reference(mu.norm(), eta).exact_gaussian).epsilon(1e-14));
  }
}

TEST_CASE("rotated Gaussian model risk uses the latent direction") {
  const auto rot = Rotation::seeded_orthogonal(4);
  Vector mu = Vector::Zero(5);
  mu[0] = 1.5;
  const Vector sigma = Vector::LinSpaced(5, 0.2, 1.0);
  const auto plain = ModelSpec::gaussian(mu, sigma);
  const auto turned = ModelSpec::gaussian(mu, sigma, rot);
  const Matrix u = rotation_matrix(5, rot);
  const Vector w = Vector::LinSpaced(5, 1.0, -0.3);
  CHECK(analytic_risk_gaussian(u * w, turned, 0.1) ==
        doctest::Approx(analytic_risk_gaussian(w, plain, 0.1)).epsilon(1e-13));
}

TEST_CASE("Bayes reference") {
  CHECK(bayes_reference(0.0, 0.2).exact_gaussian == 0.5);
  CHECK(bayes_reference(1.3, 0.0).exact_gaussian == doctest::Approx(normal_cdf(-1.3)).epsilon(1e-15));
  CHECK(bayes_reference(2.0, 0.1).exact_gaussian == doctest::Approx(0.118200105558543).epsilon(1e-14));
  CHECK(bayes_reference(2.0, 0.1, 0.5).exp_bound == doctest::Approx(0.1 + std::exp(-2.0)));
  CHECK_THROWS_AS(bayes_reference(1.0, 0.5), ConfigError);
}

TEST_CASE("theorem and corollary bounds") {
  CHECK(theorem_bound(0.0, 100.0, 0.05, 1.0) == doctest::Approx(1.05));
  CHECK(corollary_bound(0.2, 100.0, 1000.0, 0.05, 1.0) ==
        doctest::Approx(1.034127320055285).epsilon(1e-14));

  double prev = theorem_bound(9.0, 10.0, 0.1, 1.0);
  for (double p = 20.0; p < 1e7; p *= 2.0) {
    const double b = theorem_bound(9.0, p, 0.1, 1.0);
    CHECK(b >= prev);
    CHECK(b <= 1.1);
    prev = b;
  }
  CHECK(prev == doctest::Approx(1.1).epsilon(1e-4));

  prev = theorem_bound(0.0, 500.0, 0.1, 1.0);
  for (double m2 = 0.5; m2 < 100.0; m2 += 0.5) {
    const double b = theorem_bound(m2, 500.0, 0.1, 1.0);
    CHECK(b <= prev);
    prev = b;
  }

  // For the Boolean model |mu|^4 = 16 gamma^4 s^2, so the constants differ by 16.
  for (double gamma : {0.05, 0.1, 0.2, 0.3}) {
    for (double s : {10.0, 50.0, 100.0}) {
      const double mu2 = 4.0 * gamma * gamma * s;
      CHECK(corollary_bound(gamma, s, 1000.0, 0.05, 16.0) ==
            doctest::Approx(theorem_bound(mu2, 1000.0, 0.05, 1.0)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(theorem_bound(1.0, 0.0, 0.1, 1.0), ConfigError);
}

TEST_CASE("margin ratio") {
  Vector mu = Vector::Zero(16);
  mu[0] = 2.0;  // |mu|^2 = 4
  CHECK(margin_ratio(mu, mu, 16) == doctest::Approx(2.0).epsilon(1e-15));
  Vector perp = Vector::Zero(16);
  perp[3] = 1.0;
  CHECK(margin_ratio(perp, mu, 16) == 0.0);
  CHECK_THROWS_AS(margin_ratio(Vector::Zero(16), mu, 16), DomainError);
  CHECK_THROWS_AS(margin_ratio(mu, Vector::Zero(16), 16), DomainError);
}

TEST_CASE("separability witness") {
  const Dataset single = make_dataset({{3.0, 4.0}}, {-1});
  const WitnessResult one = separability_witness(single);
  CHECK(one.separates);
  CHECK(one.min_margin == doctest::Approx(25.0));

  const Dataset cancel = make_dataset({{1.0, 2.0}, {1.0, 2.0}}, {1, -1});
  CHECK_FALSE(separability_witness(cancel).separates);

  // The witness direction is only guaranteed to separate once p is large
  // relative to n; at p = 2000 about half of the figure-one draws pass.
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Dataset d = fig1_draw(2000, seed);
    const Matrix z = d.signed_rows();
    Vector v = Vector::Zero(2000);
    for (Eigen::Index k = 0; k < z.rows(); ++k) v += z.row(k).transpose();
    double lowest = INFINITY;
    for (Eigen::Index k = 0; k < z.rows(); ++k) lowest = std::min(lowest, z.row(k).dot(v));
    const WitnessResult w = separability_witness(d);
    CHECK(w.min_margin == doctest::Approx(lowest).epsilon(1e-12));
    CHECK(w.separates == (lowest > 0.0));
  }
  CHECK(separability_witness(fig1_draw(2000, 4)).separates);

  std::size_t passes = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) passes += separability_witness(fig1_draw(3000, seed)).separates;
  CHECK(passes >= 36);
}

TEST_CASE("event statistics on constructed inputs") {
  const Dataset lone = make_dataset({{1.0, 1.0, 1.0, 1.0}}, {1});
  const EventReport r = check_events(lone, Vector::Ones(4), 0.1, 2.0, 0.0, 0.0);
  CHECK(r.cross_pass);
  CHECK(r.max_cross_ratio == 0.0);
  CHECK(r.max_norm_ratio == 1.0);
  CHECK(r.min_norm_ratio == 1.0);

  // Rows of +-1 entries: |z_k|^2 = p for every k.
  const auto spec = ModelSpec::boolean_rare_weak(64, 8, 0.2);
  const Dataset signs = sample_clean(spec, 12, 2);
  const EventReport s = check_events(signs, mu_of(spec), 0.1, 1.0, 0.0, 0.0);
  CHECK(s.max_norm_ratio == 1.0);
  CHECK(s.min_norm_ratio == 1.0);
  CHECK(s.norms_pass);

  const EventReport flat = check_events(signs, Vector::Zero(64), 0.1, 1.0, 0.0, 0.0);
  CHECK_FALSE(flat.clean_deviation.has_value());
  CHECK_FALSE(flat.noisy_deviation.has_value());
}

TEST_CASE("figure-one events hold at the reported minimal constants") {
  const auto spec = ModelSpec::boolean_rare_weak(1000, 100, 0.2);
  const Dataset d = fig1_draw(1000, 5);
  const Vector mu = mu_of(spec);
  const EventReport probe = check_events(d, mu, 0.1, 1.0, 0.0, 0.05);
  CHECK(std::isfinite(probe.minimal_c));
  CHECK(probe.minimal_c >= 1.0);

  const double c = std::nextafter(probe.minimal_c, INFINITY);
  const EventReport r = check_events(d, mu, 0.1, c, probe.minimal_c_prime, 0.05);
  CHECK(r.norms_pass);
  CHECK(r.cross_pass);
  CHECK(r.noise_count_pass);
  CHECK(r.solver_separable);
  REQUIRE(r.clean_deviation.has_value());
  CHECK(*r.clean_deviation >= 0.0);
  CHECK(*r.noisy_deviation >= 0.0);

  const EventReport tight = check_events(d, mu, 0.1, probe.minimal_c * 0.999, 0.0, 0.05);
  CHECK_FALSE((tight.norms_pass && tight.cross_pass));
}

TEST_CASE("event statistics ignore sample order") {
  const auto spec = ModelSpec::rare_weak(200, 20, 0.6);
  const Dataset d = apply_noise(sample_clean(spec, 30, 9), NoiseSpec::random_flip(0.2), 10);
  std::vector<Eigen::Index> perm(30);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  Matrix x(30, 200);
  Labels y(30), yt(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    x.row(i) = d.x().row(perm[static_cast<std::size_t>(i)]);
    y[i] = d.y()[perm[static_cast<std::size_t>(i)]];
    yt[i] = d.y_tilde()[perm[static_cast<std::size_t>(i)]];
  }
  const Vector mu = mu_of(spec);
  const EventReport a = check_events(d, mu, 0.1, 3.0, 0.1, 0.2);
  const EventReport b = check_events(Dataset(x, y, yt), mu, 0.1, 3.0, 0.1, 0.2);
  CHECK(a.max_norm_ratio == b.max_norm_ratio);
  CHECK(a.min_norm_ratio == b.min_norm_ratio);
  CHECK(a.max_cross_ratio == doctest::Approx(b.max_cross_ratio).epsilon(1e-15));
  CHECK(*a.clean_deviation == doctest::Approx(*b.clean_deviation).epsilon(1e-15));
  CHECK(*a.noisy_deviation == doctest::Approx(*b.noisy_deviation).epsilon(1e-15));
  CHECK(a.noisy_fraction == b.noisy_fraction);
  CHECK(a.solver_separable == b.solver_separable);
  CHECK(a.minimal_c == doctest::Approx(b.minimal_c).epsilon(1e-15));
}

TEST_CASE("witness separability implies solver separability") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Dataset d = testing::mixed_model_instance(12, 20 + seed, seed);
    const Vector mu = Vector::Ones(static_cast<Eigen::Index>(d.p()));
    const EventReport r = check_events(d, mu, 0.1, 2.0, 0.0, 0.1);
    if (r.witness_separable) CHECK(r.solver_separable);
    CHECK(r.max_cross_ratio >= 0.0);
    CHECK(r.noisy_fraction >= 0.0);
  }
}

TEST_CASE("Monte Carlo risk with a null mean is a coin flip") {
  const auto spec = ModelSpec::rare_weak(10, 3, 0.0);
  const RiskEstimate r = mc_risk(Vector::Ones(10), spec, NoiseSpec::random_flip(0.1), 20'000, 4);
  CHECK(std::abs(r.estimate - 0.5) <= r.ci_halfwidth * 1.5);
  CHECK(r.ci_halfwidth > 0.0);
  CHECK(r.m_test == 20'000);
  CHECK_THROWS_AS(mc_risk(Vector::Ones(10), spec, NoiseSpec::none(), 99, 4), ConfigError);
}

TEST_CASE("Monte Carlo risk agrees with the analytic risk") {
  Vector mu(4);
  mu << 0.8, -0.3, 0.5, 0.0;
  const Vector sigma = (Vector(4) << 1.0, 0.4, 0.7, 0.2).finished();
  for (const Rotation& rot : {Rotation::identity(), Rotation::seeded_orthogonal(12)}) {
    const auto spec = ModelSpec::gaussian(mu, sigma, rot);
    const Vector w = (Vector(4) << 1.0, 0.2, 0.4, -0.6).finished();
    const double exact = analytic_risk_gaussian(w, spec, 0.1);
    const RiskEstimate mc = mc_risk(w, spec, NoiseSpec::random_flip(0.1), 50'000, 21);
    CHECK(std::abs(mc.estimate - exact) <= 3.0 * std::sqrt(exact * (1.0 - exact) / 50'000.0));
    const RiskEstimate again = mc_risk(w, spec, NoiseSpec::random_flip(0.1), 50'000, 21);
    CHECK(again.errors == mc.errors);
  }
}

TEST_CASE("Monte Carlo risk on a solved figure-one instance lies between eta and one half") {
  const auto spec = ModelSpec::boolean_rare_weak(500, 100, 0.2);
  const Dataset d = fig1_draw(500, 33);
  const Classifier c = max_margin(d);
  const RiskEstimate r = mc_risk(c.w, spec, NoiseSpec::random_flip(0.05), 10'000, 34);
  CHECK(r.estimate > 0.05);
  CHECK(r.estimate < 0.5);

  const RiskReport report = risk_report(c.w, spec, NoiseSpec::random_flip(0.05), 10'000, 34);
  CHECK_FALSE(report.analytic.has_value());
  CHECK(report.monte_carlo.errors == r.errors);
  CHECK(report.margin_ratio > 0.0);
  CHECK(report.theorem_bound == doctest::Approx(theorem_bound(16.0, 500.0, 0.05, 1.0)));
}

TEST_CASE("risk report fills the analytic value for Gaussian models") {
  const auto spec = ModelSpec::rare_weak(20, 5, 0.6);
  const Vector w = mu_of(spec);
  const RiskReport r = risk_report(w, spec, NoiseSpec::random_flip(0.1), 5'000, 2);
  REQUIRE(r.analytic.has_value());
  CHECK(*r.analytic == doctest::Approx(r.bayes.exact_gaussian).epsilon(1e-14));
}
