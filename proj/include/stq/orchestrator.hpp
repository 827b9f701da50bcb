#pragma once

// Command drivers behind the CLI verbs. Every command reads the config,
// writes its artifacts under the output directory, and records them with
// content hashes in a per-command manifest. All outputs are pure functions
// of (config, master seed); manifests alone carry wall timestamps.

#include <string>
#include <vector>

#include "stq/config.hpp"
#include "stq/stats.hpp"

namespace stq {

struct CalibratedAxis {
  bool present = false;
  std::vector<double> frequencies_hz;
  double power = 0.0;
  double t2star_target_s = 0.0;
  double t2star_achieved_s = 0.0;
  bool failed = false;
  std::string failure;
};

struct ModelCalibration {
  std::string model_id;
  CalibratedAxis charge;
  CalibratedAxis magnetic;
};

// calibrate: closed-form powers for every T2*-targeted axis (explicit powers
// pass through with the achieved T2* annotated).
std::vector<ModelCalibration> cmd_calibrate(const ExperimentConfig& config,
                                            const std::string& out_dir);

// compile: the five generators + group sanity; warm cache is a verified no-op
void cmd_compile(const ExperimentConfig& config, const std::string& out_dir,
                 bool dump_timelines = false);

// rb: one wall-clock run per (model, seed)
void cmd_rb(const ExperimentConfig& config, const std::string& out_dir, int jobs = 1);

// validate: K-S error grids from the run outputs in out_dir
void cmd_validate(const ExperimentConfig& config, const std::string& out_dir);

// attribute: correlated split re-executions + sorted-percentile analysis
void cmd_attribute(const ExperimentConfig& config, const std::string& out_dir,
                   int jobs = 1);

// psd: continuous vs discrete spectra (and optional trajectory traces)
void cmd_psd(const ExperimentConfig& config, const std::string& out_dir);

// fid: analytic vs Monte Carlo traces with envelope fits
void cmd_fid(const ExperimentConfig& config, const std::string& out_dir);

// helpers shared with the acceptance suite
NoiseModel resolve_model(const ModelSpec& spec, const std::vector<ModelCalibration>& calib);
std::vector<ModelCalibration> calibrate_models(const ExperimentConfig& config);
std::vector<ModelCalibration> load_calibration(const std::string& out_dir);
GateCache obtain_gate_cache(const ExperimentConfig& config, const std::string& out_dir,
                            bool allow_compile);

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// run-output filenames (documented schema)
std::string run_csv_path(const std::string& out_dir, const std::string& model_id,
                         uint64_t seed);
std::string run_summary_path(const std::string& out_dir, const std::string& model_id,
                             uint64_t seed);

void write_run_outputs(const RBRun& run, const RBSchedule& schedule,
                       const std::string& out_dir);

}  // namespace stq
