#include "mmlab/gdflow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmlab/error.hpp"

namespace mmlab {

namespace {

constexpr double kSafeExponent = 700.0;

void check_dims(const Vector& v, const Dataset& data) {
  if (static_cast<std::size_t>(v.size()) != data.p()) {
    throw ConfigError("vector length does not match the data dimension");
  }
}

// Signed margins v . z_k.
Vector margins_of(const Vector& v, const Dataset& data) {
  return (data.x() * v).cwiseProduct(data.y().cast<double>());
}

double log_sum_exp_neg(const Vector& margins) {
  const double top = (-margins).maxCoeff();
  long double acc = 0.0L;
  for (Eigen::Index k = 0; k < margins.size(); ++k) {
    acc += std::exp(static_cast<long double>(-margins[k] - top));
  }
  return top + static_cast<double>(std::log(acc));
}

// R itself, summed directly unless an exponent leaves the double range.
double direct_loss(const Vector& margins, double log_loss) {
  return (-margins).maxCoeff() > kSafeExponent ? std::exp(log_loss) : (-margins).array().exp().sum();
}

}  // namespace

void GdConfig::validate() const {
  if (step.kind == StepSizePolicy::Kind::Fixed && !(step.alpha > 0.0)) {
    throw ConfigError("fixed step size must be positive");
  }
  if (log_stride == 0) throw ConfigError("log_stride must be positive");
  if (direction_gap_target && !(*direction_gap_target >= 0.0)) {
    throw ConfigError("direction_gap_target must be nonnegative");
  }
}

double exp_loss(const Vector& v, const Dataset& data) {
  check_dims(v, data);
  const Vector margins = margins_of(v, data);
  if ((-margins).maxCoeff() > kSafeExponent) {
    long double acc = 0.0L;
    for (Eigen::Index k = 0; k < margins.size(); ++k) {
      acc += std::exp(static_cast<long double>(-margins[k]));
    }
    return static_cast<double>(acc);
  }
  return (-margins).array().exp().sum();
}

double log_exp_loss(const Vector& v, const Dataset& data) {
  check_dims(v, data);
  return log_sum_exp_neg(margins_of(v, data));
}

Vector grad_exp_loss(const Vector& v, const Dataset& data) {
  check_dims(v, data);
  const Vector weights = (-margins_of(v, data)).array().exp();
  return -(data.x().transpose() * weights.cwiseProduct(data.y().cast<double>()));
}

double loss_ratio_max(const Vector& v, const Dataset& data) {
  check_dims(v, data);
  const Vector margins = margins_of(v, data);
  return std::exp(margins.maxCoeff() - margins.minCoeff());
}

double direction_gap(const Vector& v, const Vector& w) {
  if (v.size() != w.size()) throw ConfigError("direction_gap needs vectors of equal length");
  const double nv = v.norm();
  const double nw = w.norm();
  if (nv == 0.0 || nw == 0.0) throw DomainError("direction_gap is undefined for a zero vector");
  return std::clamp(1.0 - v.dot(w) / (nv * nw), 0.0, 2.0);
}

double smoothness_step(const Dataset& data) {
  const double max_sq = data.x().rowwise().squaredNorm().maxCoeff();
  if (!(max_sq > 0.0)) throw DomainError("smoothness step undefined when every example is zero");
  return 1.0 / (static_cast<double>(data.n()) * max_sq);
}

TrainResult train_gd(const Dataset& data, const GdConfig& cfg, const GdReferences& refs) {
  cfg.validate();
  if (cfg.direction_gap_target && !refs.w) {
    throw ConfigError("early stopping on the direction gap needs a reference w");
  }
  if (refs.w) check_dims(*refs.w, data);
  if (refs.mu) check_dims(*refs.mu, data);

  const Matrix z = data.signed_rows();
  const Eigen::MatrixXd q = z * z.transpose();
  const Eigen::Index n = q.rows();
  const bool guarded = cfg.step.kind == StepSizePolicy::Kind::SmoothnessBound;
  const double alpha = guarded ? smoothness_step(data) : cfg.step.alpha;

  const std::optional<Vector> z_w = refs.w ? std::optional<Vector>(z * *refs.w) : std::nullopt;
  const double w_norm = refs.w ? refs.w->norm() : 0.0;
  const std::optional<Vector> z_mu = refs.mu ? std::optional<Vector>(z * *refs.mu) : std::nullopt;

  TrainResult result;
  TrainTrace& trace = result.trace;
  trace.step_size = alpha;

  Vector beta = Vector::Zero(n);
  Vector margins = Vector::Zero(n);
  double log_loss = log_sum_exp_neg(margins);
  double loss = direct_loss(margins, log_loss);

  auto record = [&](std::size_t iter) {
    TraceEntry e;
    e.iter = iter;
    e.log_loss = log_loss;
    e.loss = loss;
    e.a_max = std::exp(margins.maxCoeff() - margins.minCoeff());
    e.norm_v = std::sqrt(std::max(0.0, beta.dot(margins)));
    if (z_mu) e.mu_dot_v = z_mu->dot(beta);
    if (z_w && e.norm_v > 0.0 && w_norm > 0.0) {
      e.direction_gap = std::clamp(1.0 - z_w->dot(beta) / (w_norm * e.norm_v), 0.0, 2.0);
    }
    trace.entries.push_back(e);
    if (cfg.keep_loss_snapshots) trace.log_loss_snapshots.push_back(-margins);
    return e;
  };

  record(0);
  Vector weights(n);
  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    weights = (-margins).array().exp();
    if (!weights.allFinite()) throw DivergingLoss("per-example loss overflowed");
    const Vector next_margins = margins + alpha * (q * weights);

    const double next_log = log_sum_exp_neg(next_margins);
    if (!std::isfinite(next_log)) throw DivergingLoss("loss is no longer finite");
    const double next = direct_loss(next_margins, next_log);
    if (next_log > log_loss || next > loss) {
      if (guarded) {
        if (next_log > log_loss + std::log1p(1e-9)) {
          throw DivergingLoss("loss increased at iteration " + std::to_string(t + 1));
        }
        // The exact step decreases the loss, so a computed increase means the
        // decrease has fallen below rounding: the iterate is stationary.
        trace.stationary = true;
        if (trace.entries.back().iter != t) record(t);
        break;
      }
      ++trace.loss_increases;
    }
    beta.noalias() += alpha * weights;
    margins = next_margins;
    log_loss = next_log;
    loss = next;
    trace.sup_a_max = std::max(trace.sup_a_max, std::exp(margins.maxCoeff() - margins.minCoeff()));
    trace.iterations = t + 1;

    if ((t + 1) % cfg.log_stride == 0 || t + 1 == cfg.max_iters) {
      const TraceEntry e = record(t + 1);
      if (cfg.direction_gap_target && e.direction_gap <= *cfg.direction_gap_target) {
        trace.stopped_early = true;
        break;
      }
    }
  }

  result.v = z.transpose() * beta;
  return result;
}

}  // namespace mmlab
