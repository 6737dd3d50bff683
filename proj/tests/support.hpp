#pragma once

#include <random>

#include "mmlab/datagen.hpp"

namespace mmlab::testing {

inline Dataset make_dataset(std::initializer_list<std::initializer_list<double>> rows,
                            std::initializer_list<int> labels) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) x(i, j++) = v;
    ++i;
  }
  Labels y(static_cast<Eigen::Index>(labels.size()));
  i = 0;
  for (int l : labels) y[i++] = l;
  return Dataset(x, y, y);
}

inline Dataset gaussian_instance(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal;
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Labels y(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(k, j) = normal(eng);
    y[k] = (eng() & 1U) ? 1 : -1;
  }
  return Dataset(x, y, y);
}

/// Small instance drawn from one of the three generative models, chosen by seed.
inline Dataset mixed_model_instance(std::size_t n, std::size_t p, std::uint64_t seed) {
  const std::size_t s = std::max<std::size_t>(1, p / 2);
  ModelSpec spec;
  switch (seed % 3) {
    case 0: spec = ModelSpec::rare_weak(p, s, 1.0); break;
    case 1: spec = ModelSpec::boolean_rare_weak(p, s, 0.3); break;
    default: {
      Vector mu = Vector::Constant(static_cast<Eigen::Index>(p), 0.7);
      Vector sigma = Vector::LinSpaced(static_cast<Eigen::Index>(p), 0.3, 1.0);
      spec = ModelSpec::gaussian(mu, sigma);
    }
  }
  return apply_noise(sample_clean(spec, n, seed), NoiseSpec::random_flip(0.1), seed + 1);
}

inline Matrix random_orthogonal(std::size_t p, std::uint64_t seed) {
  return rotation_matrix(p, Rotation::seeded_orthogonal(seed));
}

inline Dataset rotate_rows(const Dataset& d, const Matrix& u) {
  return Dataset(d.x() * u.transpose(), d.y(), d.y_tilde());
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace mmlab::testing
