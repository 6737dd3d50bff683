#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmlab/diagnostics.hpp"
#include "mmlab/error.hpp"
#include "mmlab/gdflow.hpp"
#include "mmlab/harness.hpp"
#include "mmlab/io.hpp"
#include "mmlab/solver.hpp"

namespace py = pybind11;
using namespace mmlab;

namespace {

// Reports and sweep records cross the boundary as JSON text; the Python side
// turns them into dicts.
std::string dump(const Json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "max-margin classification under label noise";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NotSeparable>(m, "NotSeparable", PyExc_RuntimeError);
  py::register_exception<DivergingLoss>(m, "DivergingLoss", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static(
          "gaussian",
          [](const Vector& mu, const Vector& sigma, std::optional<std::uint64_t> rot) {
            return ModelSpec::gaussian(mu, sigma, rot ? Rotation::seeded_orthogonal(*rot) : Rotation{});
          },
          py::arg("mu"), py::arg("sigma_diag"), py::arg("rotation_seed") = py::none())
      .def_static(
          "rare_weak",
          [](std::size_t p, std::size_t s, double gamma, std::optional<std::uint64_t> rot) {
            return ModelSpec::rare_weak(p, s, gamma, rot ? Rotation::seeded_orthogonal(*rot) : Rotation{});
          },
          py::arg("p"), py::arg("s"), py::arg("gamma"), py::arg("rotation_seed") = py::none())
      .def_static(
          "boolean",
          [](std::size_t p, std::size_t s, double gamma, std::optional<std::uint64_t> rot) {
            return ModelSpec::boolean_rare_weak(p, s, gamma, rot ? Rotation::seeded_orthogonal(*rot) : Rotation{});
          },
          py::arg("p"), py::arg("s"), py::arg("gamma"), py::arg("rotation_seed") = py::none())
      .def_property_readonly("kind", [](const ModelSpec& s) { return std::string(to_string(s.kind)); })
      .def_readonly("p", &ModelSpec::p)
      .def_readonly("s", &ModelSpec::s)
      .def_readonly("gamma", &ModelSpec::gamma)
      .def_property_readonly("mu", [](const ModelSpec& s) { return mu_of(s); }, "mean in the observed basis")
      .def("to_json", [](const ModelSpec& s) { return dump(to_json(s)); });

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def_static("none", &NoiseSpec::none)
      .def_static("random_flip", &NoiseSpec::random_flip, py::arg("eta"))
      .def_static("margin_targeted", &NoiseSpec::margin_targeted, py::arg("eta"))
      .def_property_readonly("kind", [](const NoiseSpec& n) { return std::string(to_string(n.kind)); })
      .def_readonly("eta", &NoiseSpec::eta);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<Matrix, Labels, Labels>(), py::arg("x"), py::arg("y"), py::arg("y_tilde"))
      .def(py::init([](Matrix x, Labels y) { return Dataset(x, y, y); }), py::arg("x"), py::arg("y"))
      .def_property_readonly("x", &Dataset::x)
      .def_property_readonly("y", &Dataset::y)
      .def_property_readonly("y_tilde", &Dataset::y_tilde)
      .def_property_readonly("noisy_set", &Dataset::noisy_set)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("p", &Dataset::p);

  m.def("sample_clean", &sample_clean, py::arg("spec"), py::arg("n"), py::arg("seed"));
  m.def(
      "apply_noise",
      [](const Dataset& clean, const NoiseSpec& noise, std::uint64_t seed, std::optional<Vector> mu) {
        if (!mu) return apply_noise(clean, noise, seed);
        return apply_noise(clean, noise, seed, std::span<const double>(mu->data(), static_cast<std::size_t>(mu->size())));
      },
      py::arg("clean"), py::arg("noise"), py::arg("seed"), py::arg("mu") = py::none());
  m.def("read_dataset_csv", [](const std::string& path) { return read_dataset_csv(path); });
  m.def("write_dataset_csv", [](const Dataset& d, const std::string& path) { write_dataset_csv(d, path); });

  py::class_<KktResiduals>(m, "KktResiduals")
      .def_readonly("feasibility", &KktResiduals::feasibility)
      .def_readonly("stationarity", &KktResiduals::stationarity)
      .def_readonly("complementary_slackness", &KktResiduals::complementary_slackness)
      .def("max", &KktResiduals::max);

  py::class_<Classifier>(m, "Classifier")
      .def_readonly("w", &Classifier::w)
      .def_readonly("support_set", &Classifier::support_set)
      .def_readonly("dual", &Classifier::dual)
      .def_readonly("kkt", &Classifier::kkt);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("kkt_tol", &SolverConfig::kkt_tol)
      .def_readwrite("max_passes", &SolverConfig::max_passes)
      .def_readwrite("unboundedness_guard", &SolverConfig::unboundedness_guard);

  m.def("max_margin", &max_margin, py::arg("data"), py::arg("config") = SolverConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("brute_force_max_margin", &brute_force_max_margin, py::arg("data"));
  m.def("kkt_residuals", &kkt_residuals, py::arg("w"), py::arg("alpha"), py::arg("data"));
  m.def("train_error", &train_error, py::arg("w"), py::arg("data"));
  m.def("margins", [](const Vector& w, const Dataset& d) { return margin_stats(w, d).margins; }, py::arg("w"),
        py::arg("data"));

  py::class_<TraceEntry>(m, "TraceEntry")
      .def_readonly("iter", &TraceEntry::iter)
      .def_readonly("loss", &TraceEntry::loss)
      .def_readonly("log_loss", &TraceEntry::log_loss)
      .def_readonly("a_max", &TraceEntry::a_max)
      .def_readonly("mu_dot_v", &TraceEntry::mu_dot_v)
      .def_readonly("norm_v", &TraceEntry::norm_v)
      .def_readonly("direction_gap", &TraceEntry::direction_gap);

  py::class_<TrainTrace>(m, "TrainTrace")
      .def_readonly("entries", &TrainTrace::entries)
      .def_readonly("sup_a_max", &TrainTrace::sup_a_max)
      .def_readonly("step_size", &TrainTrace::step_size)
      .def_readonly("iterations", &TrainTrace::iterations)
      .def_readonly("stopped_early", &TrainTrace::stopped_early)
      .def_readonly("stationary", &TrainTrace::stationary)
      .def_readonly("loss_increases", &TrainTrace::loss_increases);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("v", &TrainResult::v)
      .def_readonly("trace", &TrainResult::trace);

  m.def(
      "train_gd",
      [](const Dataset& d, std::size_t iters, std::size_t log_stride, std::optional<double> step,
         std::optional<Vector> w_ref, std::optional<Vector> mu, std::optional<double> gap_target) {
        GdConfig cfg;
        cfg.max_iters = iters;
        cfg.log_stride = log_stride;
        if (step) cfg.step = StepSizePolicy::fixed(*step);
        cfg.direction_gap_target = gap_target;
        py::gil_scoped_release release;
        return train_gd(d, cfg, {std::move(w_ref), std::move(mu)});
      },
      py::arg("data"), py::arg("iters") = 10'000, py::arg("log_stride") = 100, py::arg("step") = py::none(),
      py::arg("w_ref") = py::none(), py::arg("mu") = py::none(), py::arg("gap_target") = py::none());
  m.def("exp_loss", &exp_loss, py::arg("v"), py::arg("data"));
  m.def("grad_exp_loss", &grad_exp_loss, py::arg("v"), py::arg("data"));
  m.def("direction_gap", &direction_gap, py::arg("v"), py::arg("w"));

  m.def("normal_cdf", &normal_cdf, py::arg("x"));
  m.def("margin_ratio", py::overload_cast<const Vector&, const Vector&, std::size_t>(&margin_ratio), py::arg("w"),
        py::arg("mu"), py::arg("p"));
  m.def("analytic_risk_gaussian",
        py::overload_cast<const Vector&, const ModelSpec&, double>(&analytic_risk_gaussian), py::arg("w"),
        py::arg("spec"), py::arg("eta"));
  m.def(
      "mc_risk",
      [](const Vector& w, const ModelSpec& spec, const NoiseSpec& noise, std::size_t m_test, std::uint64_t seed) {
        const RiskEstimate r = mc_risk(w, spec, noise, m_test, seed);
        return py::make_tuple(r.estimate, r.ci_halfwidth);
      },
      py::arg("w"), py::arg("spec"), py::arg("noise"), py::arg("m_test"), py::arg("seed"),
      "(estimate, 95% CI halfwidth)");
  m.def("theorem_bound", &theorem_bound, py::arg("mu_norm_sq"), py::arg("p"), py::arg("eta"), py::arg("c"));
  m.def("corollary_bound", &corollary_bound, py::arg("gamma"), py::arg("s"), py::arg("p"), py::arg("eta"),
        py::arg("c"));
  m.def(
      "_check_events",
      [](const Dataset& d, const Vector& mu, double delta, double c, double c_prime, double eta) {
        return dump(to_json(check_events(d, mu, delta, c, c_prime, eta)));
      },
      py::arg("data"), py::arg("mu"), py::arg("delta"), py::arg("c"), py::arg("c_prime"), py::arg("eta"));

  m.def("_preset", [](const std::string& name, std::size_t trials) { return dump(to_json(preset(name, trials))); });
  m.def(
      "_run_sweep",
      [](const std::string& config, std::size_t threads) {
        const SweepConfig cfg = sweep_config_from_json(Json::parse(config));
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = run_sweep(cfg, {.threads = threads});
        }
        Json records = Json::array();
        for (const auto& rec : r.records) records.push_back(to_json(rec));
        return dump(records);
      },
      py::arg("config"), py::arg("threads") = 0);
}
