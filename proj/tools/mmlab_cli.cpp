// mmlab: command-line front end.
//
// Every subcommand reads an optional JSON config (--config) and then applies
// its flags on top, so a flag always overrides the file. Exit codes: 0 on
// success, 1 for configuration errors, 2 for runtime failures.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmlab/diagnostics.hpp"
#include "mmlab/error.hpp"
#include "mmlab/gdflow.hpp"
#include "mmlab/harness.hpp"
#include "mmlab/io.hpp"
#include "mmlab/seed.hpp"
#include "mmlab/solver.hpp"

using namespace mmlab;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

// Config layer: file first, then every flag the user actually passed.
struct Layer {
  std::string config_path;
  Json j = Json::object();

  void load() {
    if (!config_path.empty()) {
      j = read_json_file(config_path);
      if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    }
  }
  template <class T>
  void set(const char* key, const CLI::Option* opt, const T& value) {
    if (opt->count() > 0) j[key] = value;
  }
  template <class T>
  T get(const char* key, T fallback) const {
    try {
      return j.contains(key) ? j[key].get<T>() : fallback;
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
  template <class T>
  T need(const char* key) const {
    if (!j.contains(key)) throw ConfigError(std::string("missing required setting '") + key + "'");
    return get<T>(key, T{});
  }
};

void print_json(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(j, out);
  }
}

// Model spec from "spec" (a full spec object) or from the flat keys
// model, p, s, gamma, mu, sigma_diag, rotation_seed.
ModelSpec spec_from(const Layer& l) {
  if (l.j.contains("spec")) return model_spec_from_json(l.j["spec"]);
  Json s;
  s["kind"] = l.get<std::string>("model", "boolean");
  if (s["kind"] == "gaussian") {
    s["mu"] = l.need<std::vector<double>>("mu");
    s["sigma_diag"] = l.need<std::vector<double>>("sigma_diag");
    s["p"] = s["mu"].size();
  } else {
    s["p"] = l.need<std::size_t>("p");
    s["s"] = l.need<std::size_t>("s");
    s["gamma"] = l.need<double>("gamma");
  }
  if (l.j.contains("rotation_seed")) {
    s["rotation"] = {{"kind", "seeded_orthogonal"}, {"seed", l.get<std::uint64_t>("rotation_seed", 0)}};
  }
  return model_spec_from_json(s);
}

NoiseSpec noise_from(const Layer& l) {
  if (l.j.contains("noise") && l.j["noise"].is_object()) return noise_spec_from_json(l.j["noise"]);
  return noise_spec_from_json({{"kind", l.get<std::string>("noise", "random_flip")}, {"eta", l.get<double>("eta", 0.0)}});
}

// Model spec for a dataset: explicit settings win, else the manifest next to the CSV.
std::optional<ModelSpec> dataset_spec(const Layer& l, const fs::path& data) {
  if (l.j.contains("spec") || l.j.contains("model") || l.j.contains("mu")) return spec_from(l);
  const fs::path m = manifest_path(data);
  if (fs::exists(m)) return model_spec_from_json(read_json_file(m).at("spec"));
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct Generate {
  Layer l;
  std::string model, out, noise;
  std::size_t n = 0, p = 0, s = 0;
  double gamma = 0.0, eta = 0.0;
  std::uint64_t seed = 0, rotation_seed = 0;
  std::vector<double> mu, sigma;
  CLI::Option *o_model, *o_n, *o_p, *o_s, *o_gamma, *o_eta, *o_noise, *o_seed, *o_rot, *o_mu, *o_sigma, *o_out;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("generate", "draw a training sample and write it as CSV with a JSON manifest");
    c->add_option("--config", l.config_path, "JSON config file");
    o_model = c->add_option("--model", model, "boolean | rare_weak | gaussian");
    o_n = c->add_option("-n,--n", n, "sample size");
    o_p = c->add_option("-p,--p", p, "dimension");
    o_s = c->add_option("-s,--s", s, "sparsity");
    o_gamma = c->add_option("--gamma", gamma, "signal strength");
    o_mu = c->add_option("--mu", mu, "gaussian mean (comma separated)")->delimiter(',');
    o_sigma = c->add_option("--sigma", sigma, "gaussian diagonal covariance (comma separated)")->delimiter(',');
    o_rot = c->add_option("--rotation-seed", rotation_seed, "apply a seeded orthogonal rotation");
    o_noise = c->add_option("--noise", noise, "none | random_flip | margin_targeted");
    o_eta = c->add_option("--eta", eta, "noise rate");
    o_seed = c->add_option("--seed", seed, "sample seed");
    o_out = c->add_option("-o,--out", out, "output CSV");
    c->callback([this] { run(); });
  }

  void run() {
    l.load();
    l.set("model", o_model, model);
    l.set("n", o_n, n);
    l.set("p", o_p, p);
    l.set("s", o_s, s);
    l.set("gamma", o_gamma, gamma);
    l.set("mu", o_mu, mu);
    l.set("sigma_diag", o_sigma, sigma);
    l.set("rotation_seed", o_rot, rotation_seed);
    l.set("noise", o_noise, noise);
    l.set("eta", o_eta, eta);
    l.set("seed", o_seed, seed);
    l.set("out", o_out, out);

    const ModelSpec spec = spec_from(l);
    const NoiseSpec ns = noise_from(l);
    const auto count = l.need<std::size_t>("n");
    const auto sample_seed = l.get<std::uint64_t>("seed", 0);
    const fs::path path = l.need<std::string>("out");
    const Vector mu_obs = mu_of(spec);
    const Dataset clean = sample_clean(spec, count, sample_seed);
    const Dataset d = apply_noise(clean, ns, derive_seed(sample_seed, 0x6e6f697365ULL),
                                  std::span<const double>(mu_obs.data(), static_cast<std::size_t>(mu_obs.size())));
    write_dataset_csv(d, path);
    write_dataset_manifest(manifest_path(path), spec, ns, sample_seed, count);
    std::cout << "wrote " << path.string() << " (n=" << d.n() << ", p=" << d.p() << ", noisy=" << d.noisy_set().size()
              << ")\n";
  }
};

struct Solve {
  Layer l;
  std::string data, out;
  double kkt_tol = 0.0;
  std::size_t max_passes = 0;
  CLI::Option *o_data, *o_out, *o_tol, *o_passes;
  bool brute = false;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("solve", "exact maximum-margin classifier of a dataset");
    c->add_option("--config", l.config_path, "JSON config file");
    o_data = c->add_option("-d,--data", data, "dataset CSV");
    o_out = c->add_option("-o,--out", out, "classifier JSON (stdout if omitted)");
    o_tol = c->add_option("--kkt-tol", kkt_tol, "KKT tolerance");
    o_passes = c->add_option("--max-passes", max_passes, "coordinate ascent pass limit");
    c->add_flag("--brute-force", brute, "enumerate active sets instead (n <= 12)");
    c->callback([this] { run(); });
  }

  void run() {
    l.load();
    l.set("data", o_data, data);
    l.set("out", o_out, out);
    l.set("kkt_tol", o_tol, kkt_tol);
    l.set("max_passes", o_passes, max_passes);
    const Dataset d = read_dataset_csv(l.need<std::string>("data"));
    SolverConfig cfg;
    cfg.kkt_tol = l.get("kkt_tol", cfg.kkt_tol);
    cfg.max_passes = l.get("max_passes", cfg.max_passes);
    const Classifier c = brute ? brute_force_max_margin(d) : max_margin(d, cfg);
    Json j = to_json(c);
    j["min_margin"] = margin_stats(c, d).min_margin;
    j["train_error"] = train_error(c.w, d);
    print_json(j, l.get<std::string>("out", ""));
  }
};

struct Train {
  Layer l;
  std::string data, trace, losses, out;
  std::size_t iters = 0, stride = 0;
  double step = 0.0, gap = 0.0;
  CLI::Option *o_data, *o_trace, *o_losses, *o_out, *o_iters, *o_stride, *o_step, *o_gap;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("train", "gradient descent on the exponential loss");
    c->add_option("--config", l.config_path, "JSON config file");
    o_data = c->add_option("-d,--data", data, "dataset CSV");
    o_iters = c->add_option("--iters", iters, "iteration budget");
    o_stride = c->add_option("--log-stride", stride, "log every k iterations");
    o_step = c->add_option("--step", step, "fixed step size (default: smoothness bound)");
    o_gap = c->add_option("--gap-target", gap, "stop once the direction gap to the exact solution is below this");
    o_trace = c->add_option("--trace", trace, "trace CSV");
    o_losses = c->add_option("--losses", losses, "per-example log-loss CSV");
    o_out = c->add_option("-o,--out", out, "summary JSON (stdout if omitted)");
    c->callback([this] { run(); });
  }

  void run() {
    l.load();
    l.set("data", o_data, data);
    l.set("iters", o_iters, iters);
    l.set("log_stride", o_stride, stride);
    l.set("step", o_step, step);
    l.set("gap_target", o_gap, gap);
    l.set("trace", o_trace, trace);
    l.set("losses", o_losses, losses);
    l.set("out", o_out, out);

    const fs::path path = l.need<std::string>("data");
    const Dataset d = read_dataset_csv(path);
    GdConfig cfg;
    cfg.max_iters = l.get("iters", cfg.max_iters);
    cfg.log_stride = l.get("log_stride", cfg.log_stride);
    if (l.j.contains("step")) cfg.step = StepSizePolicy::fixed(l.get("step", 0.0));
    if (l.j.contains("gap_target")) cfg.direction_gap_target = l.get("gap_target", 0.0);
    const std::string loss_path = l.get<std::string>("losses", "");
    cfg.keep_loss_snapshots = !loss_path.empty();

    GdReferences refs;
    if (const auto spec = dataset_spec(l, path)) refs.mu = mu_of(*spec);
    try {
      refs.w = max_margin(d).w;
    } catch (const NotSeparable&) {
      if (cfg.direction_gap_target) throw;
    }
    const TrainResult r = train_gd(d, cfg, refs);
    if (const auto t = l.get<std::string>("trace", ""); !t.empty()) write_trace_csv(r.trace, t);
    if (!loss_path.empty()) write_loss_snapshots_csv(r.trace, loss_path);

    const TraceEntry& last = r.trace.entries.back();
    Json j;
    j["iterations"] = r.trace.iterations;
    j["step_size"] = r.trace.step_size;
    j["final_loss"] = last.loss;
    j["sup_A_max"] = r.trace.sup_a_max;
    j["norm_v"] = last.norm_v;
    j["direction_gap"] = refs.w ? Json(last.direction_gap) : Json(nullptr);
    j["stopped_early"] = r.trace.stopped_early;
    j["stationary"] = r.trace.stationary;
    j["loss_increases"] = r.trace.loss_increases;
    j["train_error"] = train_error(r.v, d);
    print_json(j, l.get<std::string>("out", ""));
  }
};

// Flat model settings shared by the diagnose subcommands.
struct ModelFlags {
  std::string model;
  std::size_t p = 0, s = 0;
  double gamma = 0.0;
  std::vector<double> mu, sigma;
  CLI::Option *o_model = nullptr, *o_p = nullptr, *o_s = nullptr, *o_gamma = nullptr, *o_mu = nullptr,
              *o_sigma = nullptr;

  void attach(CLI::App* sub) {
    o_model = sub->add_option("--model", model, "boolean | rare_weak | gaussian");
    o_p = sub->add_option("-p,--p", p, "dimension");
    o_s = sub->add_option("-s,--s", s, "sparsity");
    o_gamma = sub->add_option("--gamma", gamma, "signal strength");
    o_mu = sub->add_option("--mu", mu, "gaussian mean (comma separated)")->delimiter(',');
    o_sigma = sub->add_option("--sigma", sigma, "gaussian diagonal covariance (comma separated)")->delimiter(',');
  }
  void apply(Layer& l) const {
    l.set("model", o_model, model);
    l.set("p", o_p, p);
    l.set("s", o_s, s);
    l.set("gamma", o_gamma, gamma);
    l.set("mu", o_mu, mu);
    l.set("sigma_diag", o_sigma, sigma);
  }
};

struct Events {
  Layer l;
  std::string data, out;
  double delta = 0.0, c = 0.0, c_prime = 0.0, eta = 0.0;
  CLI::Option *o_data, *o_out, *o_delta, *o_c, *o_cp, *o_eta;

  void attach(CLI::App* parent) {
    auto* sub = parent->add_subcommand("events", "empirical check of the high-probability events on a dataset");
    sub->add_option("--config", l.config_path, "JSON config file");
    o_data = sub->add_option("-d,--data", data, "dataset CSV (its manifest supplies the model)");
    o_delta = sub->add_option("--delta", delta, "failure probability (default 0.1)");
    o_c = sub->add_option("-c,--c", c, "constant c (default 2)");
    o_cp = sub->add_option("--c-prime", c_prime, "constant c' (default 0.05)");
    o_eta = sub->add_option("--eta", eta, "noise rate (default: from the manifest)");
    o_out = sub->add_option("-o,--out", out, "report JSON (stdout if omitted)");
    sub->callback([this] { run(); });
  }

  void run() {
    l.load();
    l.set("data", o_data, data);
    l.set("delta", o_delta, delta);
    l.set("c", o_c, c);
    l.set("c_prime", o_cp, c_prime);
    l.set("eta", o_eta, eta);
    l.set("out", o_out, out);
    const fs::path path = l.need<std::string>("data");
    const Dataset d = read_dataset_csv(path);
    const auto spec = dataset_spec(l, path);
    if (!spec) throw ConfigError("events need the model: give model settings or keep the manifest next to the CSV");
    double rate = l.get("eta", 0.0);
    if (!l.j.contains("eta") && fs::exists(manifest_path(path))) {
      rate = noise_spec_from_json(read_json_file(manifest_path(path)).at("noise")).eta;
    }
    const EventReport r =
        check_events(d, mu_of(*spec), l.get("delta", 0.1), l.get("c", 2.0), l.get("c_prime", 0.05), rate);
    print_json(to_json(r), l.get<std::string>("out", ""));
  }
};

struct Risk {
  Layer l;
  ModelFlags model;
  std::string classifier, data, noise, out;
  double eta = 0.0, c = 0.0;
  std::size_t m_test = 0;
  std::uint64_t seed = 0;
  CLI::Option *o_clf, *o_data, *o_noise, *o_eta, *o_m, *o_seed, *o_c, *o_out;

  void attach(CLI::App* parent) {
    auto* sub = parent->add_subcommand("risk", "test risk of a saved classifier");
    sub->add_option("--config", l.config_path, "JSON config file");
    o_clf = sub->add_option("--classifier", classifier, "classifier JSON from `solve`");
    o_data = sub->add_option("-d,--data", data, "dataset CSV whose manifest supplies model and noise");
    model.attach(sub);
    o_noise = sub->add_option("--noise", noise, "none | random_flip | margin_targeted");
    o_eta = sub->add_option("--eta", eta, "noise rate");
    o_m = sub->add_option("--m-test", m_test, "Monte Carlo sample size (default 10000)");
    o_seed = sub->add_option("--seed", seed, "Monte Carlo seed");
    o_c = sub->add_option("-c,--c", c, "constant in the bound (default 1)");
    o_out = sub->add_option("-o,--out", out, "report JSON (stdout if omitted)");
    sub->callback([this] { run(); });
  }

  void run() {
    l.load();
    l.set("classifier", o_clf, classifier);
    l.set("data", o_data, data);
    model.apply(l);
    l.set("noise", o_noise, noise);
    l.set("eta", o_eta, eta);
    l.set("m_test", o_m, m_test);
    l.set("seed", o_seed, seed);
    l.set("c", o_c, c);
    l.set("out", o_out, out);

    const Classifier clf = classifier_from_json(read_json_file(l.need<std::string>("classifier")));
    std::optional<ModelSpec> spec;
    NoiseSpec ns;
    if (l.j.contains("data")) {
      const fs::path path = l.get<std::string>("data", "");
      spec = dataset_spec(l, path);
      if (fs::exists(manifest_path(path))) ns = noise_spec_from_json(read_json_file(manifest_path(path)).at("noise"));
    } else {
      spec = spec_from(l);
    }
    if (!spec) throw ConfigError("risk needs the model: give model settings or a dataset with a manifest");
    if (l.j.contains("noise")) ns.kind = noise_kind_from_string(l.get<std::string>("noise", ""));
    if (l.j.contains("eta")) {
      ns.eta = l.get("eta", 0.0);
      if (ns.kind == NoiseKind::None) ns.kind = NoiseKind::RandomFlip;
    }
    ns.validate();
    const RiskReport r = risk_report(clf.w, *spec, ns, l.get<std::size_t>("m_test", 10'000),
                                     l.get<std::uint64_t>("seed", 1), l.get("c", 1.0));
    print_json(to_json(r), l.get<std::string>("out", ""));
  }
};

struct Bound {
  Layer l;
  double gamma = 0.0, s = 0.0, p = 0.0, eta = 0.0, c = 0.0;
  CLI::Option *o_gamma, *o_s, *o_p, *o_eta, *o_c;

  void attach(CLI::App* parent) {
    auto* sub = parent->add_subcommand("bound", "evaluate the risk bound for a rare-weak configuration");
    sub->add_option("--config", l.config_path, "JSON config file");
    o_gamma = sub->add_option("--gamma", gamma, "signal strength");
    o_s = sub->add_option("-s,--s", s, "sparsity");
    o_p = sub->add_option("-p,--p", p, "dimension");
    o_eta = sub->add_option("--eta", eta, "noise rate (default 0)");
    o_c = sub->add_option("-c,--c", c, "constant in the bound (default 1)");
    sub->callback([this] { run(); });
  }

  void run() {
    l.load();
    l.set("gamma", o_gamma, gamma);
    l.set("s", o_s, s);
    l.set("p", o_p, p);
    l.set("eta", o_eta, eta);
    l.set("c", o_c, c);
    const double g = l.need<double>("gamma");
    const double sv = l.need<double>("s");
    const double pv = l.need<double>("p");
    const double e = l.get("eta", 0.0);
    const double cv = l.get("c", 1.0);
    if (!(g > 0.0) || !(sv >= 1.0) || !(pv >= sv) || !(e >= 0.0 && e < 0.5) || !(cv > 0.0)) {
      throw ConfigError("bound needs gamma > 0, 1 <= s <= p, 0 <= eta < 1/2 and c > 0");
    }
    const double mu_sq = sv * g * g;
    Json j;
    j["gamma"] = g;
    j["s"] = sv;
    j["p"] = pv;
    j["eta"] = e;
    j["c"] = cv;
    j["mu_norm_sq"] = mu_sq;
    j["mu_norm_4_over_p"] = mu_sq * mu_sq / pv;
    j["bound"] = corollary_bound(g, sv, pv, e, cv);
    j["theorem_bound"] = theorem_bound(mu_sq, pv, e, cv);
    j["bayes_gaussian"] = bayes_reference(std::sqrt(mu_sq), e, cv).exact_gaussian;
    print_json(j, "");
  }
};

struct Assumptions {
  Layer l;
  ModelFlags model;
  std::size_t n = 0;
  double delta = 0.0, eta = 0.0, big_c = 0.0, kappa = 0.0;
  CLI::Option *o_n, *o_delta, *o_eta, *o_c, *o_kappa;

  void attach(CLI::App* parent) {
    auto* sub = parent->add_subcommand("assumptions", "check the sample-size, dimension and signal conditions");
    sub->add_option("--config", l.config_path, "JSON config file");
    model.attach(sub);
    o_n = sub->add_option("-n,--n", n, "sample size");
    o_delta = sub->add_option("--delta", delta, "failure probability (default 0.1)");
    o_eta = sub->add_option("--eta", eta, "noise rate (default 0)");
    o_c = sub->add_option("--C", big_c, "constant C (default 1)");
    o_kappa = sub->add_option("--kappa", kappa, "latent energy constant (default 0.5)");
    sub->callback([this] { run(); });
  }

  void run() {
    l.load();
    model.apply(l);
    l.set("n", o_n, n);
    l.set("delta", o_delta, delta);
    l.set("eta", o_eta, eta);
    l.set("C", o_c, big_c);
    l.set("kappa", o_kappa, kappa);
    const AssumptionReport r = check_assumptions(spec_from(l), l.need<std::size_t>("n"), l.get("delta", 0.1),
                                                 l.get("eta", 0.0), l.get("C", 1.0), l.get("kappa", 0.5));
    Json j = to_json(r);
    j["all_hold"] = r.all_hold();
    print_json(j, "");
  }
};

struct Diagnose {
  Events events;
  Risk risk;
  Bound bound;
  Assumptions assumptions;

  void attach(CLI::App& app) {
    auto* d = app.add_subcommand("diagnose", "event checks, risk, bounds and assumptions");
    d->require_subcommand(1);
    events.attach(d);
    risk.attach(d);
    bound.attach(d);
    assumptions.attach(d);
  }
};

struct Sweep {
  Layer l;
  std::string preset_name, out, plot, checkpoint, model, noise;
  std::size_t trials = 0, threads = 0, n = 0, p = 0, s = 0, m_test = 0, gd_iters = 0;
  double gamma = 0.0, eta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> p_grid, s_grid, n_grid;
  std::vector<double> gamma_grid, eta_grid, beta_grid;
  bool gd = false, events = false, no_timing = false;
  CLI::Option *o_preset, *o_trials, *o_n, *o_p, *o_s, *o_gamma, *o_eta, *o_seed, *o_m, *o_pg, *o_sg, *o_ng, *o_gg,
      *o_eg, *o_bg, *o_gd, *o_gdi, *o_ev, *o_model, *o_noise, *o_timing;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("sweep", "run a seeded, resumable simulation sweep");
    c->add_option("--config", l.config_path, "JSON sweep config");
    o_preset = c->add_option("--preset", preset_name, "fig1 | fig2 | fig3 | fig4");
    o_trials = c->add_option("--trials", trials, "trials per grid point");
    o_model = c->add_option("--model", model, "boolean | rare_weak | gaussian");
    o_noise = c->add_option("--noise", noise, "none | random_flip | margin_targeted");
    o_n = c->add_option("-n,--n", n, "sample size");
    o_p = c->add_option("-p,--p", p, "dimension");
    o_s = c->add_option("-s,--s", s, "sparsity");
    o_gamma = c->add_option("--gamma", gamma, "signal strength");
    o_eta = c->add_option("--eta", eta, "noise rate");
    o_pg = c->add_option("--p-grid", p_grid, "dimensions (comma separated)")->delimiter(',');
    o_sg = c->add_option("--s-grid", s_grid, "sparsities")->delimiter(',');
    o_ng = c->add_option("--n-grid", n_grid, "sample sizes")->delimiter(',');
    o_gg = c->add_option("--gamma-grid", gamma_grid, "signal strengths")->delimiter(',');
    o_eg = c->add_option("--eta-grid", eta_grid, "noise rates")->delimiter(',');
    o_bg = c->add_option("--beta-grid", beta_grid, "exponents for s = round(p^beta)")->delimiter(',');
    o_seed = c->add_option("--seed", seed, "base seed");
    o_m = c->add_option("--m-test", m_test, "test sample size");
    o_gd = c->add_flag("--gd", gd, "also run gradient descent per trial");
    o_gdi = c->add_option("--gd-iters", gd_iters, "gradient descent iterations");
    o_ev = c->add_flag("--events", events, "record event summaries");
    o_timing = c->add_flag("--no-timing", no_timing, "write wall_ms as 0 for byte-reproducible output");
    c->add_option("--threads", threads, "worker threads (0 = all cores; MML_THREADS caps)");
    c->add_option("--checkpoint", checkpoint, "JSON-lines journal for resuming");
    c->add_option("-o,--out", out, "results CSV")->required();
    c->add_option("--plot", plot, "also write an SVG plot");
    c->callback([this] { run(); });
  }

  void run() {
    l.load();
    l.set("preset", o_preset, preset_name);
    l.set("trials", o_trials, trials);
    l.set("model", o_model, model);
    l.set("noise", o_noise, noise);
    l.set("n", o_n, n);
    l.set("p", o_p, p);
    l.set("s", o_s, s);
    l.set("gamma", o_gamma, gamma);
    l.set("eta", o_eta, eta);
    l.set("base_seed", o_seed, seed);
    l.set("m_test", o_m, m_test);
    l.set("run_gd", o_gd, gd);
    l.set("gd_iters", o_gdi, gd_iters);
    l.set("record_events", o_ev, events);
    l.set("record_timing", o_timing, !no_timing);
    auto grid = [&](const char* key, const CLI::Option* opt, const auto& values) {
      if (opt->count() > 0) l.j["grids"][key] = values;
    };
    grid("p", o_pg, p_grid);
    grid("s", o_sg, s_grid);
    grid("n", o_ng, n_grid);
    grid("gamma", o_gg, gamma_grid);
    grid("eta", o_eg, eta_grid);
    grid("beta", o_bg, beta_grid);

    const SweepConfig cfg = sweep_config_from_json(l.j);
    cfg.validate();
    SweepOptions options;
    options.threads = threads;
    if (!checkpoint.empty()) options.checkpoint = checkpoint;

    std::cerr << "sweep '" << cfg.name << "': " << cfg.resolve().size() << " grid points x " << cfg.trials
              << " trials on " << effective_threads(threads) << " thread(s)\n";
    const SweepResult r = run_sweep(cfg, options);
    emit_csv(r, out);
    write_json_file(to_json(cfg), manifest_path(out));
    if (!plot.empty()) emit_plot(r, plot);

    std::printf("%-8s %-6s %-6s %-6s %-6s %-10s %-10s %-9s\n", "grid_id", "p", "s", "gamma", "eta", "test_err",
                "stderr", "separable");
    for (const auto& a : r.aggregates) {
      std::printf("%-8zu %-6zu %-6zu %-6.3g %-6.3g %-10.4f %-10.4f %zu/%zu\n", a.point.grid_id, a.point.p, a.point.s,
                  a.point.gamma, a.point.eta, a.mean_test_err, a.stderr_test_err, a.separable, a.records);
    }
    for (const auto& f : r.failures) std::cerr << "trial failed: " << f << '\n';
    if (!r.failures.empty()) throw std::runtime_error(std::to_string(r.failures.size()) + " trial(s) failed");
  }
};

struct Plot {
  std::string csv, config, out;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("plot", "render a sweep CSV as SVG");
    c->add_option("-i,--csv", csv, "results CSV from `sweep`")->required();
    c->add_option("--config", config, "sweep config JSON (default: the sidecar written by `sweep`)");
    c->add_option("-o,--out", out, "output SVG")->required();
    c->callback([this] { run(); });
  }

  void run() {
    const fs::path cfg_path = config.empty() ? manifest_path(csv) : fs::path(config);
    const SweepConfig cfg = sweep_config_from_json(read_json_file(cfg_path));
    emit_plot(assemble(cfg, read_sweep_csv(csv)), out);
    std::cout << "wrote " << out << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmlab: max-margin classification under label noise"};
  app.require_subcommand(1);
  Generate generate;
  Solve solve;
  Train train;
  Diagnose diagnose;
  Sweep sweep;
  Plot plot;
  generate.attach(app);
  solve.attach(app);
  train.attach(app);
  diagnose.attach(app);
  sweep.attach(app);
  plot.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NotSeparable& e) {
    std::cerr << "not separable: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
