#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mmlab/linalg.hpp"

namespace mmlab {

enum class ModelKind { GaussianCC, RareWeak, BooleanRareWeak };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// The unitary map applied to the latent sample, x = U q + y~ mu.
struct Rotation {
  bool seeded = false;
  std::uint64_t seed = 0;

  static Rotation identity() { return {}; }
  static Rotation seeded_orthogonal(std::uint64_t seed) { return {true, seed}; }
  bool operator==(const Rotation&) const = default;
};

/// One of the three class-conditional models.
///
/// `mu` and `sigma_diag` are expressed in the latent basis; `mu_of` returns
/// the mean in the observed (rotated) basis. For the rare-weak families `mu`
/// is derived from (p, s, gamma) by the factories.
struct ModelSpec {
  ModelKind kind = ModelKind::RareWeak;
  std::size_t p = 0;
  Vector mu;
  std::size_t s = 0;
  double gamma = 0.0;
  Vector sigma_diag;
  Rotation rotation;

  static ModelSpec gaussian(Vector mu, Vector sigma_diag, Rotation rotation = {});
  static ModelSpec rare_weak(std::size_t p, std::size_t s, double gamma, Rotation rotation = {});
  static ModelSpec boolean_rare_weak(std::size_t p, std::size_t s, double gamma,
                                     Rotation rotation = {});

  /// Throws ConfigError when an invariant of the chosen family is violated.
  void validate() const;
};

enum class NoiseKind { None, RandomFlip, MarginTargetedFlip };

std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double eta = 0.0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec random_flip(double eta) { return {NoiseKind::RandomFlip, eta}; }
  static NoiseSpec margin_targeted(double eta) { return {NoiseKind::MarginTargetedFlip, eta}; }

  bool is_identity() const { return kind == NoiseKind::None || eta == 0.0; }
  void validate() const;
};

/// Immutable training sample with the clean labels from the noise coupling.
class Dataset {
 public:
  Dataset() = default;
  /// Throws ConfigError on shape mismatch or labels outside {-1, +1}.
  Dataset(Matrix x, Labels y, Labels y_tilde);

  const Matrix& x() const { return x_; }
  const Labels& y() const { return y_; }
  const Labels& y_tilde() const { return y_tilde_; }
  /// Indices k with y_k != y~_k, ascending.
  const IndexSet& noisy_set() const { return noisy_; }

  std::size_t n() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(x_.cols()); }

  /// Rows z_k = y_k x_k.
  Matrix signed_rows() const;
  Dataset scaled(double lambda) const;
  Dataset with_labels(Labels y) const;

 private:
  Matrix x_;
  Labels y_;
  Labels y_tilde_;
  IndexSet noisy_;
};

/// Orthogonal p x p factor of a seeded Gaussian matrix (sign-normalised QR).
Matrix rotation_matrix(std::size_t p, const Rotation& rotation);

Vector mu_of(const ModelSpec& spec);
double mu_norm_sq(const ModelSpec& spec);

/// Draws n rows x = q + y~ mu in the latent basis, one seeded stream per row.
Dataset sample_latent(const ModelSpec& spec, std::size_t n, std::uint64_t seed);

/// Clean sample (y = y~). Deterministic in (spec, n, seed); row k depends only
/// on (seed, k) and the rotation seed.
Dataset sample_clean(const ModelSpec& spec, std::size_t n, std::uint64_t seed);

/// Applies label noise, leaving x and y~ untouched. MarginTargetedFlip needs
/// the mean `mu` (observed basis) to rank examples by mu . z_k.
Dataset apply_noise(const Dataset& clean, const NoiseSpec& noise, std::uint64_t seed,
                    std::span<const double> mu = {});

struct Inequality {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AssumptionReport {
  Inequality failure_probability;  // (A.1) delta < 1/C
  Inequality sample_size;          // (A.2) n >= C log(1/delta)
  Inequality dimension;            // (A.3) p >= C max{|mu|^2 n, n^2 log(n/delta)}
  Inequality mean_norm;            // (A.4) |mu|^2 >= C log(n/delta)
  Inequality noise_level;          // eta <= 1/C
  Inequality latent_energy;        // E|q|^2 >= kappa p

  bool all_hold() const;
};

AssumptionReport check_assumptions(const ModelSpec& spec, std::size_t n, double delta,
                                   double eta, double C, double kappa);

}  // namespace mmlab
