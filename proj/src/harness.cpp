#include "mmlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "mmlab/diagnostics.hpp"
#include "mmlab/error.hpp"
#include "mmlab/gdflow.hpp"
#include "mmlab/seed.hpp"
#include "mmlab/solver.hpp"

namespace mmlab {

namespace {

template <typename T>
std::vector<T> or_scalar(const std::vector<T>& grid, T scalar) {
  return grid.empty() ? std::vector<T>{scalar} : grid;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double json_double(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return TrialRecord::kNaN;
  return it->get<double>();
}

}  // namespace

std::vector<GridPoint> SweepConfig::resolve() const {
  if (!s_grid.empty() && !beta_grid.empty()) {
    throw ConfigError("s_grid and beta_grid are mutually exclusive");
  }
  std::vector<GridPoint> points;
  for (std::size_t nn : or_scalar(n_grid, n)) {
    for (double e : or_scalar(eta_grid, eta)) {
      for (double g : or_scalar(gamma_grid, gamma)) {
        const std::size_t inner = beta_grid.empty() ? or_scalar(s_grid, s).size() : beta_grid.size();
        for (std::size_t si = 0; si < inner; ++si) {
          for (std::size_t pp : or_scalar(p_grid, p)) {
            GridPoint gp;
            gp.grid_id = points.size();
            gp.n = nn;
            gp.p = pp;
            gp.gamma = g;
            gp.eta = e;
            if (beta_grid.empty()) {
              gp.s = or_scalar(s_grid, s)[si];
            } else {
              gp.beta = beta_grid[si];
              gp.s = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(pp), *gp.beta)));
            }
            points.push_back(gp);
          }
        }
      }
    }
  }
  return points;
}

void SweepConfig::validate() const {
  if (trials == 0) throw ConfigError("trials must be at least 1");
  if (m_test < 100) throw ConfigError("m_test must be at least 100");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  for (const auto& gp : resolve()) {
    if (gp.n == 0) throw ConfigError("n must be positive");
    if (gp.s > gp.p) {
      throw ConfigError("grid point " + std::to_string(gp.grid_id) + " has s > p");
    }
    NoiseSpec{noise, gp.eta}.validate();
    (void)model_for(*this, gp);
  }
}

std::size_t effective_threads(std::size_t requested) {
  std::size_t threads = requested == 0 ? std::max(1U, std::thread::hardware_concurrency()) : requested;
  if (const char* cap = std::getenv("MML_THREADS")) {
    const long value = std::strtol(cap, nullptr, 10);
    if (value > 0) threads = std::min(threads, static_cast<std::size_t>(value));
  }
  return std::max<std::size_t>(threads, 1);
}

ModelSpec model_for(const SweepConfig& cfg, const GridPoint& point) {
  switch (cfg.model) {
    case ModelKind::BooleanRareWeak: return ModelSpec::boolean_rare_weak(point.p, point.s, point.gamma);
    case ModelKind::RareWeak: return ModelSpec::rare_weak(point.p, point.s, point.gamma);
    case ModelKind::GaussianCC: {
      Vector mu = Vector::Zero(static_cast<Eigen::Index>(point.p));
      mu.head(static_cast<Eigen::Index>(point.s)).setConstant(point.gamma);
      return ModelSpec::gaussian(std::move(mu), Vector::Ones(static_cast<Eigen::Index>(point.p)));
    }
  }
  throw ConfigError("unknown model");
}

std::uint64_t trial_seed(const SweepConfig& cfg, std::size_t grid_id, std::size_t trial) {
  return derive_seed(cfg.base_seed, grid_id, trial);
}

TrialRecord run_trial(const SweepConfig& cfg, const GridPoint& point, std::size_t trial,
                      std::uint64_t seed, std::optional<std::uint64_t> test_seed) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.grid_id = point.grid_id;
  rec.p = point.p;
  rec.s = point.s;
  rec.gamma = point.gamma;
  rec.eta = point.eta;
  rec.n = point.n;
  rec.trial = trial;
  rec.seed = seed;

  const ModelSpec spec = model_for(cfg, point);
  const NoiseSpec noise{point.eta == 0.0 ? NoiseKind::None : cfg.noise, point.eta};
  const Vector mu = mu_of(spec);
  const Dataset clean = sample_clean(spec, point.n, derive_seed(seed, 1));
  const Dataset data = apply_noise(clean, noise, derive_seed(seed, 2), {mu.data(), spec.p});
  rec.n_noisy = data.noisy_set().size();

  if (cfg.record_events) {
    const EventReport ev = check_events(data, mu, cfg.delta, INFINITY, 0.0, point.eta);
    rec.events = EventSummary{ev.all_pass(),        ev.minimal_c,  ev.minimal_c_prime,
                              ev.clean_pass,        ev.noisy_pass, ev.witness_separable};
  }

  auto finish = [&] {
    if (cfg.record_timing) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return rec;
  };

  Classifier c;
  try {
    c = max_margin(data);
  } catch (const NotSeparable&) {
    rec.separable = false;
    return finish();
  }
  rec.separable = true;
  const MarginStats ms = margin_stats(c, data);
  rec.min_margin = ms.min_margin;
  rec.train_err = train_error(c.w, data);
  rec.norm_w = c.w.norm();
  rec.mu_dot_w = mu.dot(c.w);
  if (mu.squaredNorm() > 0.0) rec.margin_ratio = margin_ratio(c.w, mu, spec.p);

  const std::uint64_t tseed = test_seed.value_or(derive_seed(seed, 3));
  if (spec.kind == ModelKind::GaussianCC && noise.kind != NoiseKind::MarginTargetedFlip) {
    rec.test_err = analytic_risk_gaussian(c.w, spec, noise.eta);
    rec.test_ci = 0.0;
  } else {
    const RiskEstimate risk = mc_risk(c.w, spec, noise, cfg.m_test, tseed);
    rec.test_err = risk.estimate;
    rec.test_ci = risk.ci_halfwidth;
  }

  if (cfg.run_gd) {
    GdConfig gd;
    gd.max_iters = cfg.gd_iters;
    gd.log_stride = std::max<std::size_t>(cfg.gd_iters, 1);
    const TrainResult tr = train_gd(data, gd, {c.w, mu});
    rec.sup_a_max = tr.trace.sup_a_max;
    if (tr.v.norm() > 0.0) rec.dir_gap = direction_gap(tr.v, c.w);
  }
  return finish();
}

SweepResult assemble(const SweepConfig& cfg, std::vector<TrialRecord> records) {
  std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.grid_id, a.trial) < std::tie(b.grid_id, b.trial);
  });
  SweepResult result;
  result.config = cfg;
  const auto points = cfg.resolve();
  result.aggregates.resize(points.size());
  for (std::size_t g = 0; g < points.size(); ++g) result.aggregates[g].point = points[g];

  std::vector<std::vector<double>> test(points.size()), train(points.size());
  for (const auto& r : records) {
    if (r.grid_id >= points.size()) throw ConfigError("record grid_id outside the configured grid");
    auto& agg = result.aggregates[r.grid_id];
    ++agg.records;
    if (r.separable) {
      ++agg.separable;
      test[r.grid_id].push_back(r.test_err);
      train[r.grid_id].push_back(r.train_err);
    }
  }
  for (std::size_t g = 0; g < points.size(); ++g) {
    auto& agg = result.aggregates[g];
    const auto& t = test[g];
    if (t.empty()) continue;
    double sum = 0.0;
    for (double v : t) sum += v;
    agg.mean_test_err = sum / static_cast<double>(t.size());
    double ss = 0.0;
    for (double v : t) ss += (v - agg.mean_test_err) * (v - agg.mean_test_err);
    agg.stderr_test_err =
        t.size() > 1 ? std::sqrt(ss / static_cast<double>(t.size() - 1) / static_cast<double>(t.size())) : 0.0;
    double tr = 0.0;
    for (double v : train[g]) tr += v;
    agg.mean_train_err = tr / static_cast<double>(train[g].size());
  }
  result.records = std::move(records);
  return result;
}

SweepResult run_sweep(const SweepConfig& cfg, const SweepOptions& options) {
  cfg.validate();
  const auto points = cfg.resolve();

  std::vector<TrialRecord> done;
  std::set<std::pair<std::size_t, std::size_t>> completed;
  if (options.checkpoint && std::filesystem::exists(*options.checkpoint)) {
    std::ifstream in(*options.checkpoint);
    std::string line;
    std::uintmax_t good_bytes = 0;
    bool torn = false;
    while (std::getline(in, line)) {
      if (in.eof()) {
        torn = true;  // last line lacks its newline: interrupted write
        break;
      }
      if (line.empty()) {
        ++good_bytes;
        continue;
      }
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::exception&) {
        torn = true;
        break;
      }
      good_bytes += line.size() + 1;
      TrialRecord r = trial_record_from_json(j);
      if (r.grid_id >= points.size() || r.trial >= cfg.trials ||
          r.seed != trial_seed(cfg, r.grid_id, r.trial)) {
        throw ConfigError("checkpoint does not match this sweep configuration");
      }
      if (completed.insert({r.grid_id, r.trial}).second) done.push_back(std::move(r));
    }
    in.close();
    if (torn) std::filesystem::resize_file(*options.checkpoint, good_bytes);
  }

  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t g = 0; g < points.size(); ++g) {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      if (!completed.count({g, t})) tasks.emplace_back(g, t);
    }
  }
  if (options.max_new_trials && *options.max_new_trials < tasks.size()) {
    tasks.resize(*options.max_new_trials);
  }

  std::ofstream journal;
  if (options.checkpoint) {
    journal.open(*options.checkpoint, std::ios::app);
    if (!journal) throw IoError("cannot open checkpoint '" + options.checkpoint->string() + "'");
  }

  std::vector<std::optional<TrialRecord>> slots(tasks.size());
  std::vector<std::string> failures;
  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr io_failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || abort.load()) return;
      const auto [g, t] = tasks[i];
      try {
        TrialRecord rec = run_trial(cfg, points[g], t, trial_seed(cfg, g, t));
        std::lock_guard lock(writer);
        if (journal.is_open()) {
          journal << to_json(rec).dump() << '\n';
          journal.flush();
          if (!journal) throw IoError("failed writing checkpoint");
        }
        slots[i] = std::move(rec);
      } catch (const IoError&) {
        std::lock_guard lock(writer);
        if (!io_failure) io_failure = std::current_exception();
        abort = true;
        return;
      } catch (const std::exception& e) {
        std::lock_guard lock(writer);
        failures.push_back(std::to_string(g) + ":" + std::to_string(t) + ": " + e.what());
      }
    }
  };

  const std::size_t threads = std::min(effective_threads(options.threads), std::max<std::size_t>(tasks.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (io_failure) std::rethrow_exception(io_failure);

  for (auto& slot : slots) {
    if (slot) done.push_back(std::move(*slot));
  }
  SweepResult result = assemble(cfg, std::move(done));
  std::sort(failures.begin(), failures.end());
  result.failures = std::move(failures);
  return result;
}

std::vector<std::size_t> log_spaced_grid(std::size_t lo, std::size_t hi, std::size_t count) {
  if (lo == 0 || hi < lo || count == 0) throw ConfigError("bad log-spaced grid bounds");
  std::vector<std::size_t> grid;
  const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const auto v = static_cast<std::size_t>(std::llround(static_cast<double>(lo) * std::pow(ratio, frac)));
    if (grid.empty() || grid.back() != v) grid.push_back(v);
  }
  return grid;
}

SweepConfig preset(std::string_view name, std::size_t trials) {
  SweepConfig cfg;
  cfg.name = std::string(name);
  cfg.model = ModelKind::BooleanRareWeak;
  cfg.noise = NoiseKind::RandomFlip;
  cfg.n = 100;
  cfg.trials = trials;
  if (name == "fig1") {
    cfg.s = 100;
    cfg.gamma = 0.2;
    cfg.eta = 0.05;
    cfg.p_grid = log_spaced_grid(100, 3000, 16);
  } else if (name == "fig2") {
    cfg.s = 50;
    cfg.gamma_grid = {0.1, 0.2, 0.3};
    cfg.eta = 0.10;
    cfg.p_grid = log_spaced_grid(100, 3000, 16);
  } else if (name == "fig3") {
    cfg.p = 500;
    cfg.s_grid = {100, 150, 200, 250, 300, 350, 400, 450, 500};
    cfg.gamma_grid = {0.1, 0.2, 0.3};
    cfg.eta = 0.10;
  } else if (name == "fig4") {
    cfg.gamma = 0.1;
    cfg.eta = 0.10;
    cfg.beta_grid = {0.5, 0.55, 0.65};
    cfg.p_grid = log_spaced_grid(100, 3000, 16);
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected fig1..fig4)");
  }
  return cfg;
}

std::string sweep_csv_header() {
  return "grid_id,p,s,gamma,eta,n,trial,seed,separable,train_err,test_err,test_ci,norm_w,"
         "mu_dot_w,margin_ratio,n_noisy,sup_Amax,dir_gap,wall_ms";
}

std::string to_csv_row(const TrialRecord& r) {
  std::ostringstream out;
  out << r.grid_id << ',' << r.p << ',' << r.s << ',' << format_double(r.gamma) << ','
      << format_double(r.eta) << ',' << r.n << ',' << r.trial << ',' << r.seed << ','
      << (r.separable ? 1 : 0) << ',' << format_double(r.train_err) << ','
      << format_double(r.test_err) << ',' << format_double(r.test_ci) << ','
      << format_double(r.norm_w) << ',' << format_double(r.mu_dot_w) << ','
      << format_double(r.margin_ratio) << ',' << r.n_noisy << ',' << format_double(r.sup_a_max)
      << ',' << format_double(r.dir_gap) << ',' << format_double(r.wall_ms);
  return out.str();
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  if (result.records.empty()) throw ConfigError("refusing to write an empty sweep result");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << sweep_csv_header() << '\n';
  for (const auto& r : result.records) out << to_csv_row(r) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<TrialRecord> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != sweep_csv_header()) {
    throw IoError("'" + path.string() + "' is not a sweep CSV");
  }
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 19) throw IoError("sweep CSV row has " + std::to_string(f.size()) + " fields");
    TrialRecord r;
    r.grid_id = std::stoull(f[0]);
    r.p = std::stoull(f[1]);
    r.s = std::stoull(f[2]);
    r.gamma = parse_double(f[3]);
    r.eta = parse_double(f[4]);
    r.n = std::stoull(f[5]);
    r.trial = std::stoull(f[6]);
    r.seed = std::stoull(f[7]);
    r.separable = f[8] == "1";
    r.train_err = parse_double(f[9]);
    r.test_err = parse_double(f[10]);
    r.test_ci = parse_double(f[11]);
    r.norm_w = parse_double(f[12]);
    r.mu_dot_w = parse_double(f[13]);
    r.margin_ratio = parse_double(f[14]);
    r.n_noisy = std::stoull(f[15]);
    r.sup_a_max = parse_double(f[16]);
    r.dir_gap = parse_double(f[17]);
    r.wall_ms = parse_double(f[18]);
    records.push_back(r);
  }
  return records;
}

std::string render_svg(const SweepResult& result) {
  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;
  };
  const auto& aggs = result.aggregates;
  auto field = [](const GridPoint& g, int which) -> double {
    switch (which) {
      case 0: return static_cast<double>(g.p);
      case 1: return static_cast<double>(g.s);
      case 2: return g.gamma;
      case 3: return g.eta;
      case 4: return static_cast<double>(g.n);
      default: return g.beta.value_or(-1.0);
    }
  };
  static constexpr const char* kNames[] = {"p", "s", "gamma", "eta", "n", "beta"};

  int x_field = 0;
  for (int f = 0; f < 5; ++f) {
    std::set<double> vals;
    for (const auto& a : aggs) vals.insert(field(a.point, f));
    if (vals.size() > 1) {
      x_field = f;
      break;
    }
  }
  const bool has_beta = std::any_of(aggs.begin(), aggs.end(), [](const auto& a) { return a.point.beta.has_value(); });
  std::vector<int> key_fields;
  for (int f = 0; f < 6; ++f) {
    if (f == x_field || (f == 1 && has_beta) || (f == 5 && !has_beta)) continue;
    key_fields.push_back(f);
  }
  std::vector<int> varying;
  for (int f : key_fields) {
    std::set<double> vals;
    for (const auto& a : aggs) vals.insert(field(a.point, f));
    if (vals.size() > 1) varying.push_back(f);
  }

  std::map<std::vector<double>, Series> series;
  std::set<double> etas;
  double x_lo = INFINITY, x_hi = -INFINITY, y_hi = 0.5;
  for (const auto& a : aggs) {
    etas.insert(a.point.eta);
    if (!std::isfinite(a.mean_test_err)) continue;
    std::vector<double> key;
    std::string label;
    for (int f : varying) {
      key.push_back(field(a.point, f));
      label += (label.empty() ? "" : ", ") + std::string(kNames[f]) + "=" + fmt_short(field(a.point, f));
    }
    auto& s = series[key];
    s.label = label.empty() ? "test error" : label;
    const double x = field(a.point, x_field);
    s.pts.emplace_back(x, a.mean_test_err);
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_hi = std::max(y_hi, a.mean_test_err);
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  y_hi = std::ceil(y_hi * 10.0) / 10.0;

  const double W = 720, H = 480, L = 70, R = 170, T = 30, B = 60;
  auto sx = [&](double x) { return L + (x - x_lo) / (x_hi - x_lo) * (W - L - R); };
  auto sy = [&](double y) { return H - B - y / y_hi * (H - T - B); };
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\">" << result.config.name
      << ": test error vs " << kNames[x_field] << "</text>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double yv = y_hi * i / 5.0;
    svg << "<line x1=\"" << sx(xv) << "\" y1=\"" << H - B << "\" x2=\"" << sx(xv) << "\" y2=\""
        << H - B + 5 << "\" stroke=\"black\"/>";
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
        << fmt_short(xv) << "</text>\n";
    svg << "<line x1=\"" << L - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << L << "\" y2=\"" << sy(yv)
        << "\" stroke=\"black\"/>";
    svg << "<text x=\"" << L - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
        << fmt_short(yv) << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << kNames[x_field] << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (T + H - B) / 2 << ")\">mean test error</text>\n";

  for (double eta : etas) {
    svg << "<line class=\"noise-level\" data-eta=\"" << format_double(eta) << "\" x1=\"" << L
        << "\" y1=\"" << sy(eta) << "\" x2=\"" << W - R << "\" y2=\"" << sy(eta)
        << "\" stroke=\"#808000\" stroke-width=\"2\" stroke-dasharray=\"2,4\"/>\n";
  }

  std::size_t idx = 0;
  for (auto& [key, s] : series) {
    std::sort(s.pts.begin(), s.pts.end());
    const char* color = kColors[idx % 8];
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : s.pts) svg << sx(x) << ',' << sy(y) << ' ';
    svg << "\"/>\n";
    for (const auto& [x, y] : s.pts) {
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2.5\" fill=\"" << color << "\"/>";
    }
    svg << '\n';
    const double ly = T + 20.0 + 18.0 * static_cast<double>(idx);
    svg << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << W - R + 35 << "\" y=\""
        << ly + 4 << "\">" << s.label << "</text>\n";
    ++idx;
  }
  const double ly = T + 20.0 + 18.0 * static_cast<double>(idx);
  svg << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"#808000\" stroke-width=\"2\" stroke-dasharray=\"2,4\"/><text x=\"" << W - R + 35
      << "\" y=\"" << ly + 4 << "\">noise level</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const SweepResult& result, const std::filesystem::path& path) {
  if (result.records.empty()) throw ConfigError("refusing to plot an empty sweep result");
  const std::string svg = render_svg(result);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << svg;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Json to_json(const SweepConfig& cfg) {
  Json j;
  j["name"] = cfg.name;
  j["model"] = std::string(to_string(cfg.model));
  j["noise"] = std::string(to_string(cfg.noise));
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["s"] = cfg.s;
  j["gamma"] = cfg.gamma;
  j["eta"] = cfg.eta;
  j["grids"] = {{"n", cfg.n_grid},         {"p", cfg.p_grid},     {"s", cfg.s_grid},
                {"gamma", cfg.gamma_grid}, {"eta", cfg.eta_grid}, {"beta", cfg.beta_grid}};
  j["trials"] = cfg.trials;
  j["base_seed"] = cfg.base_seed;
  j["m_test"] = cfg.m_test;
  j["run_gd"] = cfg.run_gd;
  j["gd_iters"] = cfg.gd_iters;
  j["record_events"] = cfg.record_events;
  j["record_timing"] = cfg.record_timing;
  j["delta"] = cfg.delta;
  return j;
}

SweepConfig sweep_config_from_json(const Json& j, SweepConfig cfg) {
  try {
    if (j.contains("preset")) cfg = preset(j["preset"].get<std::string>(), j.value("trials", cfg.trials));
    cfg.name = j.value("name", cfg.name);
    if (j.contains("model")) cfg.model = model_kind_from_string(j["model"].get<std::string>());
    if (j.contains("noise")) cfg.noise = noise_kind_from_string(j["noise"].get<std::string>());
    cfg.n = j.value("n", cfg.n);
    cfg.p = j.value("p", cfg.p);
    cfg.s = j.value("s", cfg.s);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.eta = j.value("eta", cfg.eta);
    if (j.contains("grids")) {
      const auto& g = j["grids"];
      if (g.contains("n")) cfg.n_grid = g["n"].get<std::vector<std::size_t>>();
      if (g.contains("p")) cfg.p_grid = g["p"].get<std::vector<std::size_t>>();
      if (g.contains("s")) cfg.s_grid = g["s"].get<std::vector<std::size_t>>();
      if (g.contains("gamma")) cfg.gamma_grid = g["gamma"].get<std::vector<double>>();
      if (g.contains("eta")) cfg.eta_grid = g["eta"].get<std::vector<double>>();
      if (g.contains("beta")) cfg.beta_grid = g["beta"].get<std::vector<double>>();
    }
    cfg.trials = j.value("trials", cfg.trials);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.m_test = j.value("m_test", cfg.m_test);
    cfg.run_gd = j.value("run_gd", cfg.run_gd);
    cfg.gd_iters = j.value("gd_iters", cfg.gd_iters);
    cfg.record_events = j.value("record_events", cfg.record_events);
    cfg.record_timing = j.value("record_timing", cfg.record_timing);
    cfg.delta = j.value("delta", cfg.delta);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad sweep config: ") + e.what());
  }
  return cfg;
}

Json to_json(const TrialRecord& r) {
  Json j;
  j["grid_id"] = r.grid_id;
  j["p"] = r.p;
  j["s"] = r.s;
  j["gamma"] = r.gamma;
  j["eta"] = r.eta;
  j["n"] = r.n;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["separable"] = r.separable;
  j["train_err"] = r.train_err;
  j["test_err"] = r.test_err;
  j["test_ci"] = r.test_ci;
  j["min_margin"] = r.min_margin;
  j["norm_w"] = r.norm_w;
  j["mu_dot_w"] = r.mu_dot_w;
  j["margin_ratio"] = r.margin_ratio;
  j["n_noisy"] = r.n_noisy;
  j["sup_Amax"] = r.sup_a_max;
  j["dir_gap"] = r.dir_gap;
  j["wall_ms"] = r.wall_ms;
  if (r.events) {
    j["events"] = {{"all_pass", r.events->all_pass},
                   {"minimal_c", r.events->minimal_c},
                   {"minimal_c_prime", r.events->minimal_c_prime},
                   {"clean_pass", r.events->clean_pass},
                   {"noisy_pass", r.events->noisy_pass},
                   {"witness_separable", r.events->witness_separable}};
  }
  return j;
}

TrialRecord trial_record_from_json(const Json& j) {
  try {
    TrialRecord r;
    r.grid_id = j.at("grid_id").get<std::size_t>();
    r.p = j.at("p").get<std::size_t>();
    r.s = j.at("s").get<std::size_t>();
    r.gamma = json_double(j, "gamma");
    r.eta = json_double(j, "eta");
    r.n = j.at("n").get<std::size_t>();
    r.trial = j.at("trial").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.separable = j.at("separable").get<bool>();
    r.train_err = json_double(j, "train_err");
    r.test_err = json_double(j, "test_err");
    r.test_ci = json_double(j, "test_ci");
    r.min_margin = json_double(j, "min_margin");
    r.norm_w = json_double(j, "norm_w");
    r.mu_dot_w = json_double(j, "mu_dot_w");
    r.margin_ratio = json_double(j, "margin_ratio");
    r.n_noisy = j.at("n_noisy").get<std::size_t>();
    r.sup_a_max = json_double(j, "sup_Amax");
    r.dir_gap = json_double(j, "dir_gap");
    r.wall_ms = json_double(j, "wall_ms");
    if (j.contains("events")) {
      const auto& e = j["events"];
      r.events = EventSummary{e.at("all_pass").get<bool>(),   json_double(e, "minimal_c"),
                              json_double(e, "minimal_c_prime"), e.at("clean_pass").get<bool>(),
                              e.at("noisy_pass").get<bool>(), e.at("witness_separable").get<bool>()};
    }
    return r;
  } catch (const Json::exception& e) {
    throw IoError(std::string("bad checkpoint record: ") + e.what());
  }
}

}  // namespace mmlab
