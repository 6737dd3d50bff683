#include "mmlab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mmlab/error.hpp"
#include "mmlab/seed.hpp"

namespace mmlab {

namespace {

constexpr double kUnitScale = 0x1.0p-53;

double uniform01(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * kUnitScale; }

Labels check_labels(Labels y, Eigen::Index n, const char* what) {
  if (y.size() != n) throw ConfigError(std::string(what) + " has wrong length");
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (y[k] != 1 && y[k] != -1) throw ConfigError(std::string(what) + " entries must be +1 or -1");
  }
  return y;
}

// Fills row `out` with q + y~ mu in the latent basis and returns y~.
int draw_latent_row(const ModelSpec& spec, std::uint64_t row_seed, std::span<double> out) {
  std::mt19937_64 eng(row_seed);
  const int y_tilde = (eng() >> 63) ? 1 : -1;
  const std::size_t p = spec.p;

  switch (spec.kind) {
    case ModelKind::GaussianCC: {
      std::normal_distribution<double> normal;
      for (std::size_t j = 0; j < p; ++j) {
        out[j] = std::sqrt(spec.sigma_diag[j]) * normal(eng) + y_tilde * spec.mu[j];
      }
      break;
    }
    case ModelKind::RareWeak: {
      std::normal_distribution<double> normal;
      for (std::size_t j = 0; j < p; ++j) out[j] = normal(eng) + y_tilde * spec.mu[j];
      break;
    }
    case ModelKind::BooleanRareWeak: {
      const double agree = 0.5 + spec.gamma;
      for (std::size_t j = 0; j < spec.s; ++j) {
        out[j] = uniform01(eng) < agree ? y_tilde : -y_tilde;
      }
      std::uint64_t bits = 0;
      for (std::size_t j = spec.s, used = 64; j < p; ++j, ++used) {
        if (used == 64) {
          bits = eng();
          used = 0;
        }
        out[j] = (bits >> used) & 1U ? 1.0 : -1.0;
      }
      break;
    }
  }
  return y_tilde;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::GaussianCC: return "gaussian";
    case ModelKind::RareWeak: return "rare_weak";
    case ModelKind::BooleanRareWeak: return "boolean";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "gaussian" || name == "GaussianCC") return ModelKind::GaussianCC;
  if (name == "rare_weak" || name == "RareWeak") return ModelKind::RareWeak;
  if (name == "boolean" || name == "BooleanRareWeak") return ModelKind::BooleanRareWeak;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::RandomFlip: return "random_flip";
    case NoiseKind::MarginTargetedFlip: return "margin_targeted";
  }
  return "?";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "none") return NoiseKind::None;
  if (name == "random_flip" || name == "random") return NoiseKind::RandomFlip;
  if (name == "margin_targeted" || name == "targeted") return NoiseKind::MarginTargetedFlip;
  throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

ModelSpec ModelSpec::gaussian(Vector mu, Vector sigma_diag, Rotation rotation) {
  ModelSpec spec;
  spec.kind = ModelKind::GaussianCC;
  spec.p = static_cast<std::size_t>(mu.size());
  spec.mu = std::move(mu);
  spec.sigma_diag = std::move(sigma_diag);
  spec.rotation = rotation;
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::rare_weak(std::size_t p, std::size_t s, double gamma, Rotation rotation) {
  ModelSpec spec;
  spec.kind = ModelKind::RareWeak;
  spec.p = p;
  spec.s = s;
  spec.gamma = gamma;
  spec.rotation = rotation;
  if (s > p) throw ConfigError("rare-weak model requires s <= p");
  spec.mu = Vector::Zero(static_cast<Eigen::Index>(p));
  spec.mu.head(static_cast<Eigen::Index>(s)).setConstant(gamma);
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::boolean_rare_weak(std::size_t p, std::size_t s, double gamma,
                                       Rotation rotation) {
  ModelSpec spec;
  spec.kind = ModelKind::BooleanRareWeak;
  spec.p = p;
  spec.s = s;
  spec.gamma = gamma;
  spec.rotation = rotation;
  if (s > p) throw ConfigError("Boolean rare-weak model requires s <= p");
  // E[x_j | y~] = y~ (2 gamma) on the relevant coordinates.
  spec.mu = Vector::Zero(static_cast<Eigen::Index>(p));
  spec.mu.head(static_cast<Eigen::Index>(s)).setConstant(2.0 * gamma);
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  if (p == 0) throw ConfigError("dimension p must be positive");
  if (static_cast<std::size_t>(mu.size()) != p) throw ConfigError("mu must have length p");
  if (!mu.allFinite()) throw ConfigError("mu must be finite");
  switch (kind) {
    case ModelKind::GaussianCC:
      if (static_cast<std::size_t>(sigma_diag.size()) != p) {
        throw ConfigError("sigma_diag must have length p");
      }
      for (Eigen::Index j = 0; j < sigma_diag.size(); ++j) {
        if (!(sigma_diag[j] > 0.0 && sigma_diag[j] <= 1.0)) {
          throw ConfigError("sigma_diag entries must lie in (0, 1]");
        }
      }
      break;
    case ModelKind::RareWeak:
      if (s > p) throw ConfigError("rare-weak model requires s <= p");
      if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ConfigError("rare-weak model requires gamma >= 0");
      }
      break;
    case ModelKind::BooleanRareWeak:
      if (s > p) throw ConfigError("Boolean rare-weak model requires s <= p");
      if (!(gamma > 0.0 && gamma < 0.5)) {
        throw ConfigError("Boolean rare-weak model requires gamma in (0, 1/2)");
      }
      break;
  }
}

void NoiseSpec::validate() const {
  if (!(eta >= 0.0 && eta < 0.5)) throw ConfigError("noise level eta must lie in [0, 1/2)");
  if (kind == NoiseKind::None && eta != 0.0) throw ConfigError("noise kind 'none' requires eta = 0");
}

Dataset::Dataset(Matrix x, Labels y, Labels y_tilde)
    : x_(std::move(x)),
      y_(check_labels(std::move(y), x_.rows(), "y")),
      y_tilde_(check_labels(std::move(y_tilde), x_.rows(), "y_tilde")) {
  for (Eigen::Index k = 0; k < y_.size(); ++k) {
    if (y_[k] != y_tilde_[k]) noisy_.push_back(static_cast<std::size_t>(k));
  }
}

Matrix Dataset::signed_rows() const {
  Matrix z = x_;
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    if (y_[k] < 0) z.row(k) *= -1.0;
  }
  return z;
}

Dataset Dataset::scaled(double lambda) const { return Dataset(x_ * lambda, y_, y_tilde_); }

Dataset Dataset::with_labels(Labels y) const { return Dataset(x_, std::move(y), y_tilde_); }

Matrix rotation_matrix(std::size_t p, const Rotation& rotation) {
  const auto dim = static_cast<Eigen::Index>(p);
  if (!rotation.seeded) return Matrix::Identity(dim, dim);
  std::mt19937_64 eng(derive_seed(rotation.seed, 0x726f74ULL));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = normal(eng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Vector mu_of(const ModelSpec& spec) {
  spec.validate();
  if (!spec.rotation.seeded) return spec.mu;
  return rotation_matrix(spec.p, spec.rotation) * spec.mu;
}

double mu_norm_sq(const ModelSpec& spec) {
  spec.validate();
  // Rotations are isometries.
  return spec.mu.squaredNorm();
}

Dataset sample_latent(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ConfigError("sample size n must be positive");
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.p));
  Labels y_tilde(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    y_tilde[row] = draw_latent_row(spec, derive_seed(seed, k), {x.row(row).data(), spec.p});
  }
  return Dataset(std::move(x), y_tilde, y_tilde);
}

Dataset sample_clean(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  Dataset latent = sample_latent(spec, n, seed);
  if (!spec.rotation.seeded) return latent;
  const Matrix u = rotation_matrix(spec.p, spec.rotation);
  Matrix rotated = latent.x() * u.transpose();
  return Dataset(std::move(rotated), latent.y(), latent.y_tilde());
}

Dataset apply_noise(const Dataset& clean, const NoiseSpec& noise, std::uint64_t seed,
                    std::span<const double> mu) {
  noise.validate();
  if (noise.is_identity()) return clean;

  const std::size_t n = clean.n();
  Labels y = clean.y_tilde();
  switch (noise.kind) {
    case NoiseKind::None: break;
    case NoiseKind::RandomFlip:
      for (std::size_t k = 0; k < n; ++k) {
        std::mt19937_64 eng(derive_seed(seed, k));
        if (uniform01(eng) < noise.eta) y[static_cast<Eigen::Index>(k)] *= -1;
      }
      break;
    case NoiseKind::MarginTargetedFlip: {
      if (mu.size() != clean.p()) {
        throw ConfigError("margin-targeted noise needs the model mean (length p)");
      }
      const Eigen::Map<const Vector> mean(mu.data(), static_cast<Eigen::Index>(mu.size()));
      const Vector scores = (clean.x() * mean).cwiseProduct(clean.y_tilde().cast<double>());
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
      });
      const auto flips = static_cast<std::size_t>(std::floor(noise.eta * static_cast<double>(n) + 1e-9));
      for (std::size_t i = 0; i < flips; ++i) y[static_cast<Eigen::Index>(order[i])] *= -1;
      break;
    }
  }
  return clean.with_labels(std::move(y));
}

bool AssumptionReport::all_hold() const {
  return failure_probability.holds && sample_size.holds && dimension.holds && mean_norm.holds &&
         noise_level.holds && latent_energy.holds;
}

AssumptionReport check_assumptions(const ModelSpec& spec, std::size_t n, double delta, double eta,
                                   double C, double kappa) {
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(spec.p);
  const double mu2 = spec.mu.squaredNorm();
  const double log_n_delta = std::log(nn / delta);

  AssumptionReport r;
  r.failure_probability = {delta >= 0.0 && delta < 1.0 / C, delta, 1.0 / C};
  r.sample_size.lhs = nn;
  r.sample_size.rhs = C * std::log(1.0 / delta);
  r.sample_size.holds = r.sample_size.lhs >= r.sample_size.rhs;
  r.dimension.lhs = p;
  r.dimension.rhs = C * std::max(mu2 * nn, nn * nn * log_n_delta);
  r.dimension.holds = r.dimension.lhs >= r.dimension.rhs;
  r.mean_norm.lhs = mu2;
  r.mean_norm.rhs = C * log_n_delta;
  r.mean_norm.holds = r.mean_norm.lhs >= r.mean_norm.rhs;
  r.noise_level = {eta <= 1.0 / C, eta, 1.0 / C};

  double energy = 0.0;
  switch (spec.kind) {
    case ModelKind::GaussianCC: energy = spec.sigma_diag.sum(); break;
    case ModelKind::RareWeak: energy = p; break;
    case ModelKind::BooleanRareWeak:
      energy = static_cast<double>(spec.s) * (1.0 - 4.0 * spec.gamma * spec.gamma) +
               (p - static_cast<double>(spec.s));
      break;
  }
  r.latent_energy = {energy >= kappa * p, energy, kappa * p};
  return r;
}

}  // namespace mmlab
