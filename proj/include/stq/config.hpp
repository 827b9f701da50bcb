#pragma once

// Experiment configuration: JSON-backed, schema-validated, canonically
// hashable. Field names carry explicit units (mhz, mv, us) to keep the h/hbar
// and MHz/(rad/s) conventions out of config files.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stq/fid.hpp"
#include "stq/noise.hpp"
#include "stq/pulse.hpp"
#include "stq/qubit.hpp"
#include "stq/rb.hpp"

namespace stq {

struct AxisSpec {
  bool present = false;
  double f_ir_hz = 1e-3;
  double f_uv_hz = 1e0;
  std::optional<double> power;             // V^2 (charge) | Hz^2 (magnetic)
  std::optional<double> t2star_target_s;   // exactly one of power / target
};

struct ModelSpec {
  std::string id;
  AxisSpec charge;
  AxisSpec magnetic;
};

struct ValidationSpec {
  std::string metric = "r";  // r | delta_r | per_circuit
  double p_x = 75.0;
  int per_circuit_depth = 256;
  uint64_t seed_begin = 0;
  uint64_t seed_end = 10;  // exclusive
  std::size_t cross_subsample = 0;  // 0 = all ordered pairs
};

struct AttributionSpec {
  std::string model_id;
  std::vector<std::string> partitions = {"axis", "frequency:1e3"};
  int realizations = 20;
  int bootstrap = 1000;
  std::vector<int> per_circuit_ids;  // optional per-circuit attribution
};

struct PsdSpec {
  std::vector<double> sample_rates_hz = {1e5, 1e6, 1e7, 1e9};
  int points_per_decade = 24;
  double trace_seconds = 0.0;  // > 0 enables trajectory CSV export
  double trace_dt_s = 1e-3;
};

struct FidSpec {
  std::string mode = "charge";  // charge | magnetic
  double jfid_hz = 12e6;
  int realizations = 1000;
  double max_time_factor = 2.0;     // evaluate out to factor * T2*
  std::vector<std::string> models;  // empty = all models with the axis
};

struct ExperimentConfig {
  uint64_t master_seed = 1;
  std::string output_dir = "out";
  QubitParams qubit;
  std::vector<ModelSpec> models;
  RBSchedule schedule;
  uint64_t circuit_seed = 20202;  // shared across models and seeds
  CompileOptions compile;
  ValidationSpec validation;
  AttributionSpec attribution;
  PsdSpec psd;
  FidSpec fid;

  void validate() const;
  const ModelSpec& model_spec(const std::string& id) const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_canonical_json() const;
  std::string config_hash() const;  // sha256 of the canonical serialization

  FIDConfig fid_config() const;
};

inline constexpr const char* kCodeVersion = "stqlab 0.1.0";

}  // namespace stq
