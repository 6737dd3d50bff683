#include "mmlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmlab/error.hpp"

namespace mmlab {

namespace {

using Dense = Eigen::MatrixXd;

double violation(double alpha_k, double grad_k) {
  return alpha_k > 0.0 ? std::abs(grad_k) : std::max(0.0, grad_k);
}

// Largest KKT violation of the dual; lowest index wins ties.
std::pair<Eigen::Index, double> worst_violation(const Vector& alpha, const Vector& grad) {
  Eigen::Index arg = 0;
  double worst = -1.0;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    const double v = violation(alpha[k], grad[k]);
    if (v > worst) {
      worst = v;
      arg = k;
    }
  }
  return {arg, worst};
}

struct EigenBasis {
  Vector values;
  Dense vectors;
};

EigenBasis symmetric_eigen(const Dense& a) {
  Eigen::SelfAdjointEigenSolver<Dense> es(a);
  return {es.eigenvalues(), es.eigenvectors()};
}

// Columns spanning the eigenvalues at or below `rel_cutoff * lambda_max`.
Dense null_basis(const EigenBasis& eb, double rel_cutoff) {
  const double top = std::max(eb.values.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::Index count = 0;
  while (count < eb.values.size() && eb.values[count] <= rel_cutoff * top) ++count;
  return eb.vectors.leftCols(count);
}

// Minimum-norm solution of the PSD system a x = b with spectrum truncated at
// `rel_cutoff * lambda_max`.
Vector pseudo_solve(const EigenBasis& eb, const Vector& b, double rel_cutoff) {
  const double top = std::max(eb.values.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Vector coeffs = eb.vectors.transpose() * b;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    coeffs[i] = eb.values[i] > rel_cutoff * top ? coeffs[i] / eb.values[i] : 0.0;
  }
  return eb.vectors * coeffs;
}

Dense principal(const Dense& q, const std::vector<Eigen::Index>& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Dense sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = q(idx[i], idx[j]);
  }
  return sub;
}

// Maximises the dual over the face {alpha_j = 0 for j outside the support}
// and moves toward that maximiser as far as nonnegativity allows. The dual
// objective never decreases. Returns false when the face is unbounded.
bool refine_on_support(const Dense& q, Vector& alpha) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    if (alpha[k] > 0.0) support.push_back(k);
  }
  if (support.empty()) return false;

  const Dense q_ss = principal(q, support);
  const auto m = static_cast<Eigen::Index>(support.size());
  const Vector ones = Vector::Ones(m);
  const EigenBasis eb = symmetric_eigen(q_ss);
  const Vector target = pseudo_solve(eb, ones, 1e-13);
  if ((q_ss * target - ones).cwiseAbs().maxCoeff() > 1e-9) return false;

  Vector current(m);
  for (Eigen::Index i = 0; i < m; ++i) current[i] = alpha[support[i]];

  double step = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (target[i] <= 0.0) step = std::min(step, current[i] / (current[i] - target[i]));
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    double value = current[i] + step * (target[i] - current[i]);
    if (value <= 0.0 || (step < 1.0 && target[i] <= 0.0 &&
                         current[i] / (current[i] - target[i]) <= step)) {
      value = 0.0;
    }
    alpha[support[i]] = value;
  }
  return true;
}

// Gordan alternative: a nonnegative d != 0 with sum_k d_k z_k = 0 proves that
// no w has z_k . w > 0 for all k. The unbounded part of the dual iterate lies
// in null(Q) and points along such a d.
bool has_gordan_certificate(const Matrix& z, const Dense& q, const Dense& q_null,
                            const Vector& alpha) {
  if (q_null.cols() == 0) return false;
  const Vector d = q_null * (q_null.transpose() * alpha);
  const double top = d.maxCoeff();
  if (!(top > 0.0)) return false;

  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (d[k] > 1e-6 * top) active.push_back(k);
  }
  const Dense q_aa = principal(q, active);
  const Dense sub_null = null_basis(symmetric_eigen(q_aa), 1e-10);
  if (sub_null.cols() == 0) return false;

  Vector d_active(static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) d_active[static_cast<Eigen::Index>(i)] = d[active[i]];
  const Vector cert = sub_null * (sub_null.transpose() * d_active);
  if (!(cert.minCoeff() > 0.0)) return false;

  Vector combo = Vector::Zero(z.cols());
  for (std::size_t i = 0; i < active.size(); ++i) {
    combo += cert[static_cast<Eigen::Index>(i)] * z.row(active[i]).transpose();
  }
  const double scale = std::sqrt(q.diagonal().maxCoeff());
  return combo.norm() <= 1e-9 * cert.sum() * scale;
}

// z_k . w with long double accumulation; support margins sit near 1 while
// alpha can be large, so their rounding error matters.
Vector precise_margins(const Matrix& z, const Vector& w) {
  Vector out(z.rows());
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    long double acc = 0.0L;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      acc += static_cast<long double>(z(k, j)) * static_cast<long double>(w[j]);
    }
    out[k] = static_cast<double>(acc);
  }
  return out;
}

// sum_k alpha_k z_k with long double accumulation; the terms can be far
// larger than their sum when the margin is small.
Vector precise_combination(const Matrix& z, const Vector& alpha) {
  Vector out(z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    long double acc = 0.0L;
    for (Eigen::Index k = 0; k < z.rows(); ++k) {
      acc += static_cast<long double>(alpha[k]) * static_cast<long double>(z(k, j));
    }
    out[j] = static_cast<double>(acc);
  }
  return out;
}

// Rescales alpha so the largest support margin sits just below 1, by the
// rounding error of a margin evaluated on a double w. At the dual optimum
// every support margin equals 1, so this moves the iterate by at most the
// remaining KKT violation plus that rounding allowance.
void normalise_support_margins(const Matrix& z, Vector& alpha) {
  const Vector w = precise_combination(z, alpha);
  const Vector margins = precise_margins(z, w);
  double top = 0.0;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    if (alpha[k] > 0.0) top = std::max(top, margins[k]);
  }
  if (!(top > 0.0)) return;
  const double rounding = 2.0 * std::numeric_limits<double>::epsilon() *
                          z.rowwise().norm().maxCoeff() * w.norm() / top;
  alpha *= (1.0 - rounding) / top;
}

Classifier make_classifier(const Matrix& z, const Vector& alpha, const Dataset& data) {
  Classifier c;
  c.w = precise_combination(z, alpha);
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    if (alpha[k] > 0.0) c.support_set.push_back(static_cast<std::size_t>(k));
  }
  c.kkt = kkt_residuals(c.w, alpha, data);
  c.dual = alpha;
  return c;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(kkt_tol > 0.0)) throw ConfigError("kkt_tol must be positive");
  if (max_passes == 0) throw ConfigError("max_passes must be positive");
  if (!(unboundedness_guard > 0.0)) throw ConfigError("unboundedness_guard must be positive");
}

double KktResiduals::max() const {
  return std::max({feasibility, stationarity, complementary_slackness});
}

KktResiduals kkt_residuals(const Vector& w, const Vector& alpha, const Dataset& data) {
  const Vector yd = data.y().cast<double>();
  const Vector margins = precise_margins(data.signed_rows(), w);
  KktResiduals r;
  r.feasibility = std::max(0.0, 1.0 - margins.minCoeff());
  const Vector combo = data.x().transpose() * alpha.cwiseProduct(yd);
  const double wn = w.norm();
  r.stationarity = wn > 0.0 ? (w - combo).norm() / wn : combo.norm();
  double cs = 0.0;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    cs = std::max(cs, alpha[k] * (margins[k] - 1.0));
  }
  r.complementary_slackness = cs;
  return r;
}

Classifier max_margin(const Dataset& data, const SolverConfig& cfg) {
  cfg.validate();
  if (data.n() == 0 || data.p() == 0) throw ConfigError("max_margin needs n >= 1 and p >= 1");

  const Matrix z = data.signed_rows();
  const Dense q = z * z.transpose();
  const Eigen::Index n = q.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(q(k, k) > 0.0)) {
      throw NotSeparable("example " + std::to_string(k) + " is the zero vector");
    }
  }

  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Ones(n);
  std::optional<Dense> q_null;
  IndexSet last_support;
  std::size_t passes_since_refine = 0;

  for (std::size_t pass = 0; pass < cfg.max_passes; ++pass) {
    for (Eigen::Index step = 0; step < n; ++step) {
      const auto [k, worst] = worst_violation(alpha, grad);
      if (worst <= 0.5 * cfg.kkt_tol) break;
      const double updated = std::max(0.0, alpha[k] + grad[k] / q(k, k));
      const double delta = updated - alpha[k];
      alpha[k] = updated;
      grad.noalias() -= delta * q.col(k);
    }
    grad = Vector::Ones(n) - q * alpha;

    auto [k, worst] = worst_violation(alpha, grad);
    if (worst <= cfg.kkt_tol) {
      normalise_support_margins(z, alpha);
      return make_classifier(z, alpha, data);
    }
    if (alpha.sum() > cfg.unboundedness_guard) {
      throw NotSeparable("dual norm exceeded the unboundedness guard");
    }
    if (worst >= 1.0 - 1e-12 && pass % 4 == 0) {
      if (!q_null) q_null = null_basis(symmetric_eigen(q), 1e-10);
      if (has_gordan_certificate(z, q, *q_null, alpha)) {
        throw NotSeparable("a nonnegative combination of the signed examples vanishes");
      }
    }

    IndexSet support;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (alpha[i] > 0.0) support.push_back(static_cast<std::size_t>(i));
    }
    ++passes_since_refine;
    if (support == last_support || passes_since_refine >= 16) {
      if (refine_on_support(q, alpha)) grad = Vector::Ones(n) - q * alpha;
      passes_since_refine = 0;
    }
    last_support = std::move(support);
  }
  throw NotSeparable("KKT violations persisted after max_passes");
}

Classifier brute_force_max_margin(const Dataset& data) {
  const std::size_t n = data.n();
  if (n == 0 || n > 12) throw ConfigError("brute_force_max_margin needs 1 <= n <= 12");

  const Matrix z = data.signed_rows();
  const Dense q = z * z.transpose();
  std::optional<Vector> best_alpha;
  double best_norm = std::numeric_limits<double>::infinity();

  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    std::vector<Eigen::Index> subset;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (1U << k)) subset.push_back(static_cast<Eigen::Index>(k));
    }
    const Dense q_ss = principal(q, subset);
    const auto m = static_cast<Eigen::Index>(subset.size());
    const Vector beta = pseudo_solve(symmetric_eigen(q_ss), Vector::Ones(m), 1e-12);
    if (beta.minCoeff() < -1e-10) continue;

    Vector alpha = Vector::Zero(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < m; ++i) alpha[subset[i]] = std::max(0.0, beta[i]);
    const Vector w = z.transpose() * alpha;
    if ((z * w).minCoeff() < 1.0 - 1e-10) continue;
    const double norm = w.norm();
    if (norm < best_norm) {
      best_norm = norm;
      best_alpha = std::move(alpha);
    }
  }
  if (!best_alpha) throw NotSeparable("no candidate active set is feasible");
  return make_classifier(z, *best_alpha, data);
}

MarginStats margin_stats(const Vector& w, const Dataset& data) {
  if (static_cast<std::size_t>(w.size()) != data.p()) throw ConfigError("w has wrong dimension");
  MarginStats s;
  s.margins = (data.x() * w).cwiseProduct(data.y().cast<double>());
  Eigen::Index arg = 0;
  s.min_margin = s.margins.minCoeff(&arg);
  s.argmin = static_cast<std::size_t>(arg);
  return s;
}

double train_error(const Vector& w, const Dataset& data) {
  const Vector margins = margin_stats(w, data).margins;
  return static_cast<double>((margins.array() <= 0.0).count()) / static_cast<double>(margins.size());
}

}  // namespace mmlab
