#include "stq/orchestrator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include "stq/attribution.hpp"
#include "stq/csv.hpp"
#include "stq/sha256.hpp"

namespace fs = std::filesystem;

namespace stq {

namespace {

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Collects output paths and writes manifest_<cmd>.json with content hashes.
// Timestamps live only here; data files stay byte-reproducible.
class ManifestWriter {
 public:
  ManifestWriter(std::string cmd, const ExperimentConfig& config, std::string out_dir)
      : cmd_(std::move(cmd)), out_dir_(std::move(out_dir)),
        config_hash_(config.config_hash()), master_seed_(config.master_seed),
        started_(timestamp_utc()) {
    fs::create_directories(out_dir_);
  }

  void add(const std::string& path) { outputs_.push_back(path); }

  void finish() {
    nlohmann::json m;
    m["schema"] = "stq-manifest-v1";
    m["command"] = cmd_;
    m["code_version"] = kCodeVersion;
    m["config_hash"] = config_hash_;
    m["master_seed"] = master_seed_;
    m["started"] = started_;
    m["finished"] = timestamp_utc();
    nlohmann::json files = nlohmann::json::array();
    for (const auto& p : outputs_) {
      nlohmann::json f;
      f["path"] = fs::relative(p, out_dir_).string();
      f["sha256"] = Sha256::of_file(p);
      f["bytes"] = fs::file_size(p);
      files.push_back(std::move(f));
    }
    m["outputs"] = std::move(files);
    std::ofstream out(fs::path(out_dir_) / ("manifest_" + cmd_ + ".json"));
    out << m.dump(2) << "\n";
  }

 private:
  std::string cmd_, out_dir_, config_hash_;
  uint64_t master_seed_;
  std::string started_;
  std::vector<std::string> outputs_;
};

std::string axis_name(NoiseAxis a) { return a == NoiseAxis::charge ? "charge" : "magnetic"; }

CalibratedAxis calibrate_axis(const AxisSpec& spec, NoiseAxis axis,
                              const ExperimentConfig& config) {
  CalibratedAxis out;
  if (!spec.present) return out;
  out.present = true;

  FIDConfig fc = config.fid_config();
  fc.mode = axis == NoiseAxis::charge ? FIDMode::charge : FIDMode::magnetic;

  try {
    out.frequencies_hz = decade_frequencies(spec.f_ir_hz, spec.f_uv_hz);
    if (spec.power) {
      out.power = *spec.power;
    } else {
      out.t2star_target_s = *spec.t2star_target_s;
      out.power = calibrate_power(out.t2star_target_s, out.frequencies_hz, fc);
    }
    NoiseModel probe;
    probe.id = "probe";
    for (double f : out.frequencies_hz) probe.add_component(axis, f, out.power);
    out.t2star_achieved_s = solve_t2star(probe, fc);
    if (spec.power) out.t2star_target_s = out.t2star_achieved_s;
  } catch (const std::exception& e) {
    out.failed = true;
    out.failure = e.what();
  }
  return out;
}

nlohmann::json calibrated_axis_json(const CalibratedAxis& a) {
  nlohmann::json j;
  j["frequencies_hz"] = a.frequencies_hz;
  j["power"] = a.power;
  j["sqrt_power"] = std::sqrt(a.power);
  j["t2star_target_s"] = a.t2star_target_s;
  j["t2star_achieved_s"] = a.t2star_achieved_s;
  if (a.failed) j["failure"] = a.failure;
  return j;
}

CalibratedAxis calibrated_axis_from_json(const nlohmann::json& j) {
  CalibratedAxis a;
  a.present = true;
  a.frequencies_hz = j.at("frequencies_hz").get<std::vector<double>>();
  a.power = j.at("power").get<double>();
  a.t2star_target_s = j.at("t2star_target_s").get<double>();
  a.t2star_achieved_s = j.at("t2star_achieved_s").get<double>();
  a.failed = j.contains("failure");
  return a;
}

bool needs_calibration(const ExperimentConfig& config) {
  for (const auto& m : config.models) {
    if (m.charge.present && m.charge.t2star_target_s) return true;
    if (m.magnetic.present && m.magnetic.t2star_target_s) return true;
  }
  return false;
}

}  // namespace

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) throw std::runtime_error("parallel job failed: " + first_error);
}

std::vector<ModelCalibration> calibrate_models(const ExperimentConfig& config) {
  std::vector<ModelCalibration> out;
  for (const auto& m : config.models) {
    ModelCalibration c;
    c.model_id = m.id;
    c.charge = calibrate_axis(m.charge, NoiseAxis::charge, config);
    c.magnetic = calibrate_axis(m.magnetic, NoiseAxis::magnetic, config);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ModelCalibration> cmd_calibrate(const ExperimentConfig& config,
                                            const std::string& out_dir) {
  ManifestWriter manifest("calibrate", config, out_dir);
  auto calibrations = calibrate_models(config);

  nlohmann::json root;
  root["schema"] = "stq-calibration-v1";
  root["config_hash"] = config.config_hash();
  nlohmann::json models = nlohmann::json::object();
  for (const auto& c : calibrations) {
    nlohmann::json mj;
    if (c.charge.present) mj["charge"] = calibrated_axis_json(c.charge);
    if (c.magnetic.present) mj["magnetic"] = calibrated_axis_json(c.magnetic);
    models[c.model_id] = std::move(mj);
  }
  root["models"] = std::move(models);
  std::string json_path = (fs::path(out_dir) / "calibration.json").string();
  {
    std::ofstream out(json_path);
    out << root.dump(2) << "\n";
  }
  manifest.add(json_path);

  std::string csv_path = (fs::path(out_dir) / "calibration_table.csv").string();
  {
    CsvWriter csv(csv_path, {"model", "axis", "sqrt_power", "power", "f_ir_hz", "f_uv_hz",
                             "t2star_target_s", "t2star_achieved_s", "status"});
    for (const auto& c : calibrations) {
      auto row = [&](const CalibratedAxis& a, NoiseAxis axis) {
        if (!a.present) return;
        csv.row_cells({c.model_id, axis_name(axis), CsvWriter::cell(std::sqrt(a.power)),
                       CsvWriter::cell(a.power), CsvWriter::cell(a.frequencies_hz.front()),
                       CsvWriter::cell(a.frequencies_hz.back()),
                       CsvWriter::cell(a.t2star_target_s),
                       CsvWriter::cell(a.t2star_achieved_s),
                       a.failed ? "failed: " + a.failure : "ok"});
      };
      row(c.charge, NoiseAxis::charge);
      row(c.magnetic, NoiseAxis::magnetic);
    }
  }
  manifest.add(csv_path);
  manifest.finish();
  return calibrations;
}

std::vector<ModelCalibration> load_calibration(const std::string& out_dir) {
  std::string path = (fs::path(out_dir) / "calibration.json").string();
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("missing prerequisite: calibration report " + path +
                             " (run 'stqlab calibrate' first)");
  nlohmann::json root = nlohmann::json::parse(in);
  std::vector<ModelCalibration> out;
  for (const auto& [id, mj] : root.at("models").items()) {
    ModelCalibration c;
    c.model_id = id;
    if (mj.contains("charge")) c.charge = calibrated_axis_from_json(mj.at("charge"));
    if (mj.contains("magnetic")) c.magnetic = calibrated_axis_from_json(mj.at("magnetic"));
    out.push_back(std::move(c));
  }
  return out;
}

NoiseModel resolve_model(const ModelSpec& spec, const std::vector<ModelCalibration>& calib) {
  const ModelCalibration* found = nullptr;
  for (const auto& c : calib)
    if (c.model_id == spec.id) found = &c;

  NoiseModel m;
  m.id = spec.id;
  auto add_axis = [&](const AxisSpec& axis_spec, const CalibratedAxis* c, NoiseAxis axis) {
    if (!axis_spec.present) return;
    double power;
    if (axis_spec.power) {
      power = *axis_spec.power;
    } else {
      if (!c || !c->present || c->failed)
        throw std::runtime_error("missing prerequisite: calibrated power for model " +
                                 spec.id + " (run 'stqlab calibrate' first)");
      power = c->power;
    }
    m.add_decade_ladder(axis, axis_spec.f_ir_hz, axis_spec.f_uv_hz, power);
  };
  add_axis(spec.charge, found ? &found->charge : nullptr, NoiseAxis::charge);
  add_axis(spec.magnetic, found ? &found->magnetic : nullptr, NoiseAxis::magnetic);
  return m;
}

GateCache obtain_gate_cache(const ExperimentConfig& config, const std::string& out_dir,
                            bool allow_compile) {
  std::string path = (fs::path(out_dir) / "gate_cache.json").string();
  uint64_t want = compute_params_hash(config.qubit, config.compile);
  if (fs::exists(path)) {
    GateCache cache = load_gate_cache(path);
    if (cache.params_hash == want && cache.complete()) return cache;
    if (!allow_compile)
      throw std::runtime_error("missing prerequisite: gate cache at " + path +
                               " is stale (run 'stqlab compile' first)");
  } else if (!allow_compile) {
    throw std::runtime_error("missing prerequisite: gate cache " + path +
                             " (run 'stqlab compile' first)");
  }
  return compile_all(config.qubit, config.compile);
}

void cmd_compile(const ExperimentConfig& config, const std::string& out_dir,
                 bool dump_timelines) {
  ManifestWriter manifest("compile", config, out_dir);
  std::string cache_path = (fs::path(out_dir) / "gate_cache.json").string();
  uint64_t want = compute_params_hash(config.qubit, config.compile);

  bool warm = false;
  if (fs::exists(cache_path)) {
    GateCache existing = load_gate_cache(cache_path);
    warm = existing.params_hash == want && existing.complete();
  }

  std::vector<CompileResult> reports;
  GateCache cache;
  if (warm) {
    cache = load_gate_cache(cache_path);
  } else {
    cache = compile_all(config.qubit, config.compile, &reports);
    save_gate_cache(cache, cache_path);
  }
  manifest.add(cache_path);

  CliffordGroup group = CliffordGroup::build();

  nlohmann::json rep;
  rep["schema"] = "stq-compile-report-v1";
  rep["params_hash"] = want;
  rep["cache_warm"] = warm;
  rep["group_size"] = group.size();
  nlohmann::json gates = nlohmann::json::array();
  for (GeneratorId id : kAllGenerators) {
    const CompiledGate& g = cache.gate(id);
    nlohmann::json gj;
    gj["word"] = generator_name(id);
    gj["infidelity"] = g.infidelity;
    gj["duration_ns"] = g.timeline.samples_v.size();
    gj["met_threshold"] = g.infidelity <= config.compile.accept_threshold;
    gates.push_back(std::move(gj));
  }
  rep["gates"] = std::move(gates);
  std::string rep_path = (fs::path(out_dir) / "compile_report.json").string();
  {
    std::ofstream out(rep_path);
    out << rep.dump(2) << "\n";
  }
  manifest.add(rep_path);

  if (dump_timelines) {
    for (GeneratorId id : kAllGenerators) {
      const CompiledGate& g = cache.gate(id);
      if (g.timeline.samples_v.empty()) continue;
      std::string path =
          (fs::path(out_dir) / ("timeline_" + generator_name(id) + ".csv")).string();
      CsvWriter csv(path, {"time_ns", "v_mv", "j_mhz"});
      auto j = exchange_profile(g.timeline, config.qubit);
      for (std::size_t k = 0; k < g.timeline.samples_v.size(); ++k)
        csv.row({static_cast<double>(k), g.timeline.samples_v[k] * 1e3, j[k] / 1e6});
      manifest.add(path);
    }
  }
  manifest.finish();
}

std::string run_csv_path(const std::string& out_dir, const std::string& model_id,
                         uint64_t seed) {
  return (fs::path(out_dir) / "runs" / (model_id + "_seed" + std::to_string(seed) + ".csv"))
      .string();
}

std::string run_summary_path(const std::string& out_dir, const std::string& model_id,
                             uint64_t seed) {
  return (fs::path(out_dir) / "runs" /
          (model_id + "_seed" + std::to_string(seed) + "_summary.json"))
      .string();
}

void write_run_outputs(const RBRun& run, const RBSchedule& schedule,
                       const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "runs");
  std::string csv_path = run_csv_path(out_dir, run.model_id, run.seed_index);
  std::vector<std::string> header = {"pass", "circuit_id", "depth",
                                     "t_start_s", "p_survive", "p_bitflip"};
  if (schedule.shots_mode) header.push_back("shot");
  CsvWriter csv(csv_path, header);
  for (const auto& pass : run.passes) {
    for (const auto& o : pass.outcomes) {
      std::vector<std::string> cells = {
          CsvWriter::cell(static_cast<long long>(o.pass)),
          CsvWriter::cell(static_cast<long long>(o.circuit_id)),
          CsvWriter::cell(static_cast<long long>(o.depth)),
          CsvWriter::cell(o.t_start_s),
          CsvWriter::cell(o.p_survive),
          CsvWriter::cell(o.p_bitflip)};
      if (schedule.shots_mode) cells.push_back(CsvWriter::cell(static_cast<long long>(o.shot)));
      csv.row_cells(cells);
    }
  }

  nlohmann::json summary;
  summary["schema"] = "stq-run-summary-v1";
  summary["model"] = run.model_id;
  summary["seed"] = run.seed_index;
  summary["lab_time_ps"] = run.lab_time_ps;
  summary["lab_time_s"] = static_cast<double>(run.lab_time_ps) * 1e-12;
  nlohmann::json passes = nlohmann::json::array();
  for (const auto& pass : run.passes) {
    nlohmann::json pj;
    pj["pass"] = pass.pass_index;
    pj["r"] = pass.fit.r;
    pj["ci_2sigma"] = pass.fit.ci_2sigma;
    pj["converged"] = pass.fit.converged;
    pj["at_boundary"] = pass.fit.at_boundary;
    passes.push_back(std::move(pj));
  }
  summary["passes"] = std::move(passes);
  std::ofstream out(run_summary_path(out_dir, run.model_id, run.seed_index));
  out << summary.dump(2) << "\n";
}

void cmd_rb(const ExperimentConfig& config, const std::string& out_dir, int jobs) {
  ManifestWriter manifest("rb", config, out_dir);
  auto calib = needs_calibration(config) ? load_calibration(out_dir)
                                         : std::vector<ModelCalibration>{};
  GateCache cache = obtain_gate_cache(config, out_dir, /*allow_compile=*/false);
  CliffordGroup group = CliffordGroup::build();
  CircuitSet circuits = sample_circuits(group, cache, config.schedule, config.circuit_seed);

  std::vector<NoiseModel> models;
  for (const auto& spec : config.models) models.push_back(resolve_model(spec, calib));

  uint64_t n_seeds = config.validation.seed_end - config.validation.seed_begin;
  std::size_t n_jobs = models.size() * n_seeds;
  parallel_for(n_jobs, jobs, [&](std::size_t idx) {
    std::size_t mi = idx / n_seeds;
    uint64_t seed = config.validation.seed_begin + idx % n_seeds;
    RBRun run = run_experiment(models[mi], config.qubit, config.schedule, circuits,
                               config.master_seed, seed);
    write_run_outputs(run, config.schedule, out_dir);
  });

  for (const auto& m : models) {
    for (uint64_t s = config.validation.seed_begin; s < config.validation.seed_end; ++s) {
      manifest.add(run_csv_path(out_dir, m.id, s));
      manifest.add(run_summary_path(out_dir, m.id, s));
    }
  }
  manifest.finish();
}

namespace {

std::vector<double> load_r_series(const std::string& out_dir, const std::string& model_id,
                                  uint64_t seed) {
  std::string path = run_summary_path(out_dir, model_id, seed);
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("missing prerequisite: run summary " + path +
                             " (run 'stqlab rb' first)");
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<double> r;
  for (const auto& pj : j.at("passes")) r.push_back(pj.at("r").get<double>());
  return r;
}

void write_grid(const KSGrid& grid, const std::string& base_path, ManifestWriter& manifest) {
  nlohmann::json j;
  j["schema"] = "stq-ks-grid-v1";
  j["metric"] = grid.metric;
  j["p_x"] = grid.p_x;
  j["models"] = grid.models;
  j["thresholds"] = grid.thresholds;
  j["alpha"] = grid.alpha;
  j["beta"] = grid.beta;
  {
    std::ofstream out(base_path + ".json");
    out << j.dump(2) << "\n";
  }
  manifest.add(base_path + ".json");

  std::vector<std::string> header = {"model", "threshold", "alpha"};
  for (const auto& m : grid.models) header.push_back("beta_vs_" + m);
  CsvWriter csv(base_path + ".csv", header);
  for (std::size_t jrow = 0; jrow < grid.models.size(); ++jrow) {
    std::vector<std::string> cells = {grid.models[jrow],
                                      CsvWriter::cell(grid.thresholds[jrow]),
                                      CsvWriter::cell(grid.alpha[jrow])};
    for (std::size_t jp = 0; jp < grid.models.size(); ++jp)
      cells.push_back(CsvWriter::cell(grid.beta[jrow][jp]));
    csv.row_cells(cells);
  }
  manifest.add(base_path + ".csv");
}

}  // namespace

void cmd_validate(const ExperimentConfig& config, const std::string& out_dir) {
  ManifestWriter manifest("validate", config, out_dir);
  const auto& v = config.validation;
  std::optional<std::size_t> subsample;
  if (v.cross_subsample > 0) subsample = v.cross_subsample;

  if (v.metric == "r" || v.metric == "delta_r") {
    std::vector<ModelDatasets> datasets;
    for (const auto& spec : config.models) {
      ModelDatasets md;
      md.model_id = spec.id;
      for (uint64_t s = v.seed_begin; s < v.seed_end; ++s) {
        std::vector<double> r = load_r_series(out_dir, spec.id, s);
        md.per_seed.push_back(v.metric == "delta_r" ? delta_metric(r) : r);
      }
      datasets.push_back(std::move(md));
    }
    KSGrid grid = error_grid(datasets, v.p_x, v.metric, subsample, config.master_seed);
    write_grid(grid, (fs::path(out_dir) / ("grid_" + v.metric)).string(), manifest);
  } else {
    // per-circuit bitflip datasets at the configured depth
    std::vector<std::vector<ModelDatasets>> per_circuit;
    std::vector<int> ids;
    for (const auto& spec : config.models) {
      for (uint64_t s = v.seed_begin; s < v.seed_end; ++s) {
        std::string path = run_csv_path(out_dir, spec.id, s);
        CsvTable table = read_csv(path);
        int col_circuit = table.column("circuit_id");
        int col_depth = table.column("depth");
        int col_flip = table.column("p_bitflip");
        std::map<int, std::vector<double>> by_circuit;
        for (std::size_t row = 0; row < table.rows.size(); ++row) {
          if (static_cast<int>(table.num(row, col_depth)) != v.per_circuit_depth) continue;
          by_circuit[static_cast<int>(table.num(row, col_circuit))].push_back(
              table.num(row, col_flip));
        }
        if (by_circuit.empty())
          throw std::runtime_error("no circuits of depth " +
                                   std::to_string(v.per_circuit_depth) + " in " + path);
        if (ids.empty()) {
          for (const auto& [id, series] : by_circuit) ids.push_back(id);
          per_circuit.resize(ids.size());
          for (auto& pc : per_circuit)
            for (const auto& spec2 : config.models) {
              ModelDatasets md;
              md.model_id = spec2.id;
              pc.push_back(md);
            }
        }
        for (std::size_t ci = 0; ci < ids.size(); ++ci) {
          auto it = by_circuit.find(ids[ci]);
          if (it == by_circuit.end())
            throw std::runtime_error("circuit sets differ across runs (not shared)");
          for (auto& md : per_circuit[ci])
            if (md.model_id == spec.id) md.per_seed.push_back(it->second);
        }
      }
    }
    PerCircuitGrids grids = per_circuit_grid(per_circuit, v.p_x);
    write_grid(grids.best, (fs::path(out_dir) / "grid_per_circuit_best").string(), manifest);
    write_grid(grids.median, (fs::path(out_dir) / "grid_per_circuit_median").string(),
               manifest);
    write_grid(grids.worst, (fs::path(out_dir) / "grid_per_circuit_worst").string(),
               manifest);
  }
  manifest.finish();
}

namespace {

struct PartitionPlan {
  std::string name;
  TrajectoryPartition partition;
  std::vector<std::size_t> scope;
};

PartitionPlan resolve_partition(const std::string& text, const NoiseModel& model) {
  PartitionPlan plan;
  if (text == "axis") {
    plan.name = "axis";
    plan.partition = TrajectoryPartition::axis_split(model);
    plan.scope = full_scope(model);
    return plan;
  }
  if (text.rfind("frequency:", 0) == 0) {
    double boundary = std::stod(text.substr(10));
    plan.name = "frequency_" + text.substr(10);
    plan.partition = TrajectoryPartition::frequency_split(model, boundary);
    plan.scope = charge_scope(model);  // magnetic off for the frequency analysis
    return plan;
  }
  throw std::invalid_argument("unknown partition spec: " + text +
                              " (expected 'axis' or 'frequency:<hz>')");
}

void write_attribution_csv(const AttributionResult& res, int n_pass,
                           const std::string& path) {
  std::vector<std::string> header = {"percentile", "parent_mean", "parent_lo", "parent_hi"};
  for (const auto& name : res.part_names) {
    header.push_back("part_" + name + "_mean");
    header.push_back("part_" + name + "_lo");
    header.push_back("part_" + name + "_hi");
  }
  header.push_back("gap_mean");
  header.push_back("gap_lo");
  header.push_back("gap_hi");
  CsvWriter csv(path, header);
  for (std::size_t k = 0; k < res.parent.mean.size(); ++k) {
    std::vector<double> row;
    row.push_back(n_pass > 1 ? 100.0 * static_cast<double>(k) / (n_pass - 1) : 0.0);
    row.push_back(res.parent.mean[k]);
    row.push_back(res.parent.lo[k]);
    row.push_back(res.parent.hi[k]);
    for (const auto& part : res.parts) {
      row.push_back(part.mean[k]);
      row.push_back(part.lo[k]);
      row.push_back(part.hi[k]);
    }
    row.push_back(res.gap.mean[k]);
    row.push_back(res.gap.lo[k]);
    row.push_back(res.gap.hi[k]);
    csv.row(row);
  }
}

}  // namespace

void cmd_attribute(const ExperimentConfig& config, const std::string& out_dir, int jobs) {
  ManifestWriter manifest("attribute", config, out_dir);
  auto calib = needs_calibration(config) ? load_calibration(out_dir)
                                         : std::vector<ModelCalibration>{};
  GateCache cache = obtain_gate_cache(config, out_dir, /*allow_compile=*/false);
  CliffordGroup group = CliffordGroup::build();
  CircuitSet circuits = sample_circuits(group, cache, config.schedule, config.circuit_seed);

  if (config.attribution.model_id.empty())
    throw std::runtime_error("attribution.model is not set in the config");
  NoiseModel model = resolve_model(config.model_spec(config.attribution.model_id), calib);

  for (const std::string& text : config.attribution.partitions) {
    PartitionPlan plan = resolve_partition(text, model);
    int n_real = config.attribution.realizations;

    std::vector<SplitRunResult> realizations(n_real);
    parallel_for(n_real, jobs, [&](std::size_t r) {
      realizations[r] = split_run(model, config.qubit, config.schedule, circuits,
                                  config.master_seed, r, plan.scope, plan.partition);
    });

    AttributionResult res =
        attribute_rb_number(realizations, config.attribution.bootstrap, config.master_seed);
    std::string path =
        (fs::path(out_dir) / ("attribution_" + plan.name + "_r.csv")).string();
    write_attribution_csv(res, config.schedule.passes, path);
    manifest.add(path);

    for (int circuit_id : config.attribution.per_circuit_ids) {
      AttributionResult pc = attribute_circuit_bitflip(
          realizations, circuit_id, config.attribution.bootstrap, config.master_seed);
      std::string pc_path =
          (fs::path(out_dir) /
           ("attribution_" + plan.name + "_circuit" + std::to_string(circuit_id) + ".csv"))
              .string();
      write_attribution_csv(pc, config.schedule.passes, pc_path);
      manifest.add(pc_path);
    }
  }
  manifest.finish();
}

void cmd_psd(const ExperimentConfig& config, const std::string& out_dir) {
  ManifestWriter manifest("psd", config, out_dir);
  auto calib = needs_calibration(config) ? calibrate_models(config)
                                         : std::vector<ModelCalibration>{};
  for (const auto& spec : config.models) {
    NoiseModel model = resolve_model(spec, calib);
    for (NoiseAxis axis : {NoiseAxis::charge, NoiseAxis::magnetic}) {
      auto idx = model.axis_indices(axis);
      if (idx.empty()) continue;
      std::vector<OUComponent> comps;
      for (std::size_t i : idx) comps.push_back(model.components[i]);

      double f_lo = comps.front().frequency_hz;
      double f_hi = comps.front().frequency_hz;
      for (const auto& c : comps) {
        f_lo = std::min(f_lo, c.frequency_hz);
        f_hi = std::max(f_hi, c.frequency_hz);
      }
      f_lo /= 10.0;
      f_hi *= 10.0;

      std::vector<std::string> header = {"f_hz", "s_continuous"};
      for (double fs_hz : config.psd.sample_rates_hz)
        header.push_back("s_discrete_fs" + CsvWriter::cell(fs_hz));
      std::string path =
          (fs::path(out_dir) / ("psd_" + spec.id + "_" + axis_name(axis) + ".csv")).string();
      CsvWriter csv(path, header);

      int decades = static_cast<int>(std::ceil(std::log10(f_hi / f_lo)));
      int n_points = decades * config.psd.points_per_decade;
      for (int k = 0; k <= n_points; ++k) {
        double f = f_lo * std::pow(10.0, static_cast<double>(k) / config.psd.points_per_decade);
        std::vector<std::string> cells = {CsvWriter::cell(f),
                                          CsvWriter::cell(psd_continuous(comps, f))};
        for (double fs_hz : config.psd.sample_rates_hz)
          cells.push_back(f <= 0.5 * fs_hz ? CsvWriter::cell(psd_discrete(comps, f, fs_hz))
                                           : std::string{});
        csv.row_cells(cells);
      }
      manifest.add(path);

      if (config.psd.trace_seconds > 0.0) {
        TrajectoryCursor cursor(model, config.master_seed, 0);
        cursor.set_mask(idx);
        std::string trace_path =
            (fs::path(out_dir) / ("trace_" + spec.id + "_" + axis_name(axis) + ".csv"))
                .string();
        CsvWriter trace(trace_path, {"time_s", "value"});
        double t = 0.0;
        while (t < config.psd.trace_seconds) {
          AxisSample s = cursor.advance(config.psd.trace_dt_s);
          t += config.psd.trace_dt_s;
          trace.row({t, axis == NoiseAxis::charge ? s.charge_v : s.magnetic_hz});
        }
        manifest.add(trace_path);
      }
    }
  }
  manifest.finish();
}

void cmd_fid(const ExperimentConfig& config, const std::string& out_dir) {
  ManifestWriter manifest("fid", config, out_dir);
  auto calib = needs_calibration(config) ? calibrate_models(config)
                                         : std::vector<ModelCalibration>{};
  FIDConfig fc = config.fid_config();
  NoiseAxis axis = fc.mode == FIDMode::charge ? NoiseAxis::charge : NoiseAxis::magnetic;

  for (const auto& spec : config.models) {
    if (!config.fid.models.empty()) {
      bool wanted = false;
      for (const auto& id : config.fid.models) wanted |= id == spec.id;
      if (!wanted) continue;
    }
    NoiseModel model = resolve_model(spec, calib);
    if (model.axis_indices(axis).empty()) continue;

    FIDConfig run_cfg = fc;
    double t2 = solve_t2star(model, run_cfg);
    if (std::isfinite(t2)) {
      double half_period = 0.5 / run_cfg.drive_hz();
      int n = std::max(4, static_cast<int>(config.fid.max_time_factor * t2 / half_period));
      for (int k = 1; k <= n; ++k) run_cfg.times_s.push_back(k * half_period);
    }
    FIDTrace trace = simulate_fid(model, run_cfg, config.qubit, config.master_seed);

    std::string csv_path =
        (fs::path(out_dir) / ("fid_" + spec.id + "_" + config.fid.mode + ".csv")).string();
    CsvWriter csv(csv_path, {"time_s", "p_analytic", "p_montecarlo", "sigma2"});
    for (std::size_t k = 0; k < trace.times_s.size(); ++k)
      csv.row({trace.times_s[k], trace.p_analytic[k], trace.p_montecarlo[k],
               trace.sigma2_values[k]});
    manifest.add(csv_path);

    nlohmann::json j;
    j["schema"] = "stq-fid-v1";
    j["model"] = spec.id;
    j["mode"] = config.fid.mode;
    j["realizations"] = run_cfg.realizations;
    j["t2star_analytic_s"] = t2;
    j["t2star_fitted_s"] = trace.fitted_t2star_s;
    j["fit_ok"] = trace.fit_ok;
    std::string json_path =
        (fs::path(out_dir) / ("fid_" + spec.id + "_" + config.fid.mode + ".json")).string();
    {
      std::ofstream out(json_path);
      out << j.dump(2) << "\n";
    }
    manifest.add(json_path);
  }
  manifest.finish();
}

}  // namespace stq
