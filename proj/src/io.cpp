#include "mmlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "mmlab/error.hpp"

namespace mmlab {

namespace {

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const Json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

Json index_json(const IndexSet& s) {
  Json arr = Json::array();
  for (auto k : s) arr.push_back(k);
  return arr;
}

Json inequality_json(const Inequality& q) { return {{"holds", q.holds}, {"lhs", q.lhs}, {"rhs", q.rhs}}; }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str()) throw IoError("not a number: '" + text + "'");
  return v;
}

Json to_json(const ModelSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["p"] = spec.p;
  if (spec.kind == ModelKind::GaussianCC) {
    j["mu"] = vector_json(spec.mu);
    j["sigma_diag"] = vector_json(spec.sigma_diag);
  } else {
    j["s"] = spec.s;
    j["gamma"] = spec.gamma;
  }
  j["rotation"] = spec.rotation.seeded
                      ? Json{{"kind", "seeded_orthogonal"}, {"seed", spec.rotation.seed}}
                      : Json{{"kind", "identity"}};
  return j;
}

ModelSpec model_spec_from_json(const Json& j) {
  try {
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    Rotation rot;
    if (j.contains("rotation") && j["rotation"].value("kind", "identity") == "seeded_orthogonal") {
      rot = Rotation::seeded_orthogonal(j["rotation"].at("seed").get<std::uint64_t>());
    }
    switch (kind) {
      case ModelKind::GaussianCC:
        return ModelSpec::gaussian(vector_from_json(j.at("mu")), vector_from_json(j.at("sigma_diag")),
                                   rot);
      case ModelKind::RareWeak:
        return ModelSpec::rare_weak(j.at("p").get<std::size_t>(), j.at("s").get<std::size_t>(),
                                    j.at("gamma").get<double>(), rot);
      case ModelKind::BooleanRareWeak:
        return ModelSpec::boolean_rare_weak(j.at("p").get<std::size_t>(),
                                            j.at("s").get<std::size_t>(),
                                            j.at("gamma").get<double>(), rot);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what());
  }
  throw ConfigError("bad model spec");
}

Json to_json(const NoiseSpec& noise) {
  return {{"kind", std::string(to_string(noise.kind))}, {"eta", noise.eta}};
}

NoiseSpec noise_spec_from_json(const Json& j) {
  try {
    NoiseSpec n{noise_kind_from_string(j.at("kind").get<std::string>()), j.value("eta", 0.0)};
    n.validate();
    return n;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad noise spec: ") + e.what());
  }
}

Json to_json(const Classifier& c) {
  Json j;
  j["w"] = vector_json(c.w);
  j["support_set"] = index_json(c.support_set);
  j["alpha"] = c.dual ? vector_json(*c.dual) : Json::array();
  j["kkt_residuals"] = {{"feasibility", c.kkt.feasibility},
                        {"stationarity", c.kkt.stationarity},
                        {"complementary_slackness", c.kkt.complementary_slackness}};
  return j;
}

Classifier classifier_from_json(const Json& j) {
  try {
    Classifier c;
    c.w = vector_from_json(j.at("w"));
    for (const auto& k : j.at("support_set")) c.support_set.push_back(k.get<std::size_t>());
    if (j.contains("alpha") && !j["alpha"].empty()) c.dual = vector_from_json(j["alpha"]);
    if (j.contains("kkt_residuals")) {
      const auto& r = j["kkt_residuals"];
      c.kkt.feasibility = r.value("feasibility", 0.0);
      c.kkt.stationarity = r.value("stationarity", 0.0);
      c.kkt.complementary_slackness = r.value("complementary_slackness", 0.0);
    }
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad classifier JSON: ") + e.what());
  }
}

Json to_json(const EventReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return {
      {"norms", {{"max_ratio", r.max_norm_ratio}, {"min_ratio", r.min_norm_ratio}, {"pass", r.norms_pass}}},
      {"cross", {{"max_ratio", r.max_cross_ratio}, {"pass", r.cross_pass}}},
      {"clean_mean", {{"max_deviation", opt(r.clean_deviation)}, {"pass", r.clean_pass}}},
      {"noisy_mean", {{"max_deviation", opt(r.noisy_deviation)}, {"pass", r.noisy_pass}}},
      {"noise_count", {{"fraction", r.noisy_fraction}, {"pass", r.noise_count_pass}}},
      {"separability",
       {{"solver", r.solver_separable},
        {"witness", r.witness_separable},
        {"witness_min_margin", r.witness_min_margin}}},
      {"minimal_c", r.minimal_c},
      {"minimal_c_prime", r.minimal_c_prime},
      {"all_pass", r.all_pass()},
  };
}

Json to_json(const RiskReport& r) {
  return {
      {"analytic", r.analytic ? Json(*r.analytic) : Json(nullptr)},
      {"monte_carlo",
       {{"estimate", r.monte_carlo.estimate},
        {"ci_halfwidth", r.monte_carlo.ci_halfwidth},
        {"m_test", r.monte_carlo.m_test}}},
      {"theorem_bound", r.theorem_bound},
      {"bayes", {{"exact_gaussian", r.bayes.exact_gaussian}, {"exp_bound", r.bayes.exp_bound}}},
      {"margin_ratio", r.margin_ratio},
  };
}

Json to_json(const AssumptionReport& r) {
  return {
      {"A1_failure_probability", inequality_json(r.failure_probability)},
      {"A2_sample_size", inequality_json(r.sample_size)},
      {"A3_dimension", inequality_json(r.dimension)},
      {"A4_mean_norm", inequality_json(r.mean_norm)},
      {"noise_level", inequality_json(r.noise_level)},
      {"latent_energy", inequality_json(r.latent_energy)},
      {"all_hold", r.all_hold()},
  };
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "y,y_tilde";
  for (std::size_t j = 1; j <= data.p(); ++j) out << ",x_" << j;
  out << '\n';
  for (Eigen::Index k = 0; k < data.x().rows(); ++k) {
    out << data.y()[k] << ',' << data.y_tilde()[k];
    for (Eigen::Index j = 0; j < data.x().cols(); ++j) out << ',' << format_double(data.x()(k, j));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "y" || header[1] != "y_tilde") {
    throw IoError("dataset header must start with y,y_tilde");
  }
  const std::size_t p = header.size() - 2;
  std::vector<std::vector<double>> rows;
  std::vector<int> y, yt;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != p + 2) throw IoError("row has " + std::to_string(f.size()) + " fields");
    y.push_back(std::stoi(f[0]));
    yt.push_back(std::stoi(f[1]));
    std::vector<double> row(p);
    for (std::size_t j = 0; j < p; ++j) row[j] = parse_double(f[j + 2]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("dataset has no rows");
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  Labels ly(static_cast<Eigen::Index>(rows.size())), lyt(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    for (std::size_t j = 0; j < p; ++j) x(r, static_cast<Eigen::Index>(j)) = rows[k][j];
    ly[r] = y[k];
    lyt[r] = yt[k];
  }
  try {
    return Dataset(std::move(x), ly, lyt);
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid dataset: ") + e.what());
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_dataset_manifest(const std::filesystem::path& path, const ModelSpec& spec,
                            const NoiseSpec& noise, std::uint64_t seed, std::size_t n) {
  Json j;
  j["spec"] = to_json(spec);
  j["noise"] = to_json(noise);
  j["seed"] = seed;
  j["n"] = n;
  j["p"] = spec.p;
  write_json_file(j, path);
}

void write_trace_csv(const TrainTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "iter,R,A_max,mu_dot_v,norm_v,direction_gap\n";
  for (const auto& e : trace.entries) {
    out << e.iter << ',' << format_double(e.loss) << ',' << format_double(e.a_max) << ','
        << format_double(e.mu_dot_v) << ',' << format_double(e.norm_v) << ','
        << format_double(e.direction_gap) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_loss_snapshots_csv(const TrainTrace& trace, const std::filesystem::path& path) {
  if (trace.log_loss_snapshots.size() != trace.entries.size()) {
    throw ConfigError("trace has no per-example loss snapshots");
  }
  auto out = open_out(path);
  out << "iter";
  const auto n = trace.log_loss_snapshots.empty() ? 0 : trace.log_loss_snapshots.front().size();
  for (Eigen::Index k = 1; k <= n; ++k) out << ",loss_" << k;
  out << '\n';
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    out << trace.entries[i].iter;
    const Vector& logs = trace.log_loss_snapshots[i];
    for (Eigen::Index k = 0; k < logs.size(); ++k) out << ',' << format_double(std::exp(logs[k]));
    out << '\n';
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace mmlab
