#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mmlab/datagen.hpp"
#include "mmlab/diagnostics.hpp"
#include "mmlab/gdflow.hpp"
#include "mmlab/solver.hpp"

namespace mmlab {

using Json = nlohmann::ordered_json;

/// Round-trip decimal form (17 significant digits); "nan"/"inf" for non-finite values.
std::string format_double(double value);
double parse_double(const std::string& text);

Json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const Json& j);
Json to_json(const NoiseSpec& noise);
NoiseSpec noise_spec_from_json(const Json& j);

Json to_json(const Classifier& c);
Classifier classifier_from_json(const Json& j);
Json to_json(const EventReport& r);
Json to_json(const RiskReport& r);
Json to_json(const AssumptionReport& r);

/// Header `y,y_tilde,x_1,...,x_p`.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Sidecar next to a CSV: same stem, `.json` extension.
std::filesystem::path manifest_path(const std::filesystem::path& csv_path);
void write_dataset_manifest(const std::filesystem::path& path, const ModelSpec& spec,
                            const NoiseSpec& noise, std::uint64_t seed, std::size_t n);

/// Columns `iter,R,A_max,mu_dot_v,norm_v,direction_gap`.
void write_trace_csv(const TrainTrace& trace, const std::filesystem::path& path);
/// Columns `iter,loss_1,...,loss_n` from the stored log-loss snapshots.
void write_loss_snapshots_csv(const TrainTrace& trace, const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& j, const std::filesystem::path& path);

}  // namespace mmlab
