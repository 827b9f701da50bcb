#include "stq/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "stq/sha256.hpp"

namespace stq {

namespace {

AxisSpec axis_from_json(const nlohmann::json& j, const char* power_key) {
  AxisSpec spec;
  spec.present = true;
  const auto& band = j.at("band_hz");
  spec.f_ir_hz = band.at(0).get<double>();
  spec.f_uv_hz = band.at(1).get<double>();
  if (j.contains(power_key)) spec.power = j.at(power_key).get<double>();
  if (j.contains("t2star_target_us"))
    spec.t2star_target_s = j.at("t2star_target_us").get<double>() * 1e-6;
  if (spec.power.has_value() == spec.t2star_target_s.has_value())
    throw std::invalid_argument(
        "axis spec needs exactly one of explicit power or t2star_target_us");
  return spec;
}

nlohmann::json axis_to_json(const AxisSpec& spec, const char* power_key) {
  nlohmann::json j;
  j["band_hz"] = {spec.f_ir_hz, spec.f_uv_hz};
  if (spec.power) j[power_key] = *spec.power;
  if (spec.t2star_target_s) j["t2star_target_us"] = *spec.t2star_target_s * 1e6;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  qubit.validate();
  schedule.validate();
  if (models.empty()) throw std::invalid_argument("config: no noise models");
  std::set<std::string> ids;
  for (const auto& m : models) {
    if (m.id.empty()) throw std::invalid_argument("config: model with empty id");
    if (!ids.insert(m.id).second)
      throw std::invalid_argument("config: duplicate model id " + m.id);
    if (!m.charge.present && !m.magnetic.present)
      throw std::invalid_argument("config: model " + m.id + " has no axes");
  }
  if (validation.metric != "r" && validation.metric != "delta_r" &&
      validation.metric != "per_circuit")
    throw std::invalid_argument("config: validation metric must be r|delta_r|per_circuit");
  if (validation.seed_end <= validation.seed_begin)
    throw std::invalid_argument("config: empty validation seed range");
  if (fid.mode != "charge" && fid.mode != "magnetic")
    throw std::invalid_argument("config: fid mode must be charge|magnetic");
}

const ModelSpec& ExperimentConfig::model_spec(const std::string& id) const {
  for (const auto& m : models)
    if (m.id == id) return m;
  throw std::invalid_argument("config: unknown model id " + id);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.master_seed = j.value("master_seed", c.master_seed);
  c.output_dir = j.value("output_dir", c.output_dir);

  if (j.contains("qubit")) {
    const auto& q = j.at("qubit");
    c.qubit.j0_hz = q.value("j0_mhz", 0.075) * 1e6;
    c.qubit.insensitivity_v = q.value("insensitivity_mv", 18.0) * 1e-3;
    c.qubit.dbz_hz = q.value("dbz_mhz", 10.0) * 1e6;
    c.qubit.sample_rate_hz = q.value("sample_rate_hz", 1e9);
  }

  for (const auto& m : j.value("noise_models", nlohmann::json::array())) {
    ModelSpec spec;
    spec.id = m.at("id").get<std::string>();
    if (m.contains("charge")) spec.charge = axis_from_json(m.at("charge"), "power_v2");
    if (m.contains("magnetic")) spec.magnetic = axis_from_json(m.at("magnetic"), "power_hz2");
    c.models.push_back(std::move(spec));
  }

  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (s.contains("depths")) c.schedule.depths = s.at("depths").get<std::vector<int>>();
    c.schedule.circuits_per_depth = s.value("circuits_per_depth", 10);
    c.schedule.passes = s.value("passes", 100);
    double spam_us = s.value("spam_us", 50.0);
    c.schedule.spam_prep_s = spam_us * 1e-6;
    c.schedule.spam_meas_s = spam_us * 1e-6;
    c.schedule.inter_pass_idle_s = s.value("inter_pass_idle_s", 0.0);
    c.schedule.shots_mode = s.value("shots_mode", false);
    c.circuit_seed = s.value("circuit_seed", c.circuit_seed);
  }

  if (j.contains("compile")) {
    const auto& k = j.at("compile");
    c.compile.seed = k.value("seed", c.compile.seed);
    c.compile.accept_threshold = k.value("accept_threshold", c.compile.accept_threshold);
  }

  if (j.contains("validation")) {
    const auto& v = j.at("validation");
    c.validation.metric = v.value("metric", c.validation.metric);
    c.validation.p_x = v.value("p_x", c.validation.p_x);
    c.validation.per_circuit_depth = v.value("per_circuit_depth", 256);
    if (v.contains("seed_range")) {
      c.validation.seed_begin = v.at("seed_range").at(0).get<uint64_t>();
      c.validation.seed_end = v.at("seed_range").at(1).get<uint64_t>();
    }
    c.validation.cross_subsample = v.value("cross_subsample", 0u);
  }

  if (j.contains("attribution")) {
    const auto& a = j.at("attribution");
    c.attribution.model_id = a.value("model", std::string{});
    if (a.contains("partitions"))
      c.attribution.partitions = a.at("partitions").get<std::vector<std::string>>();
    c.attribution.realizations = a.value("realizations", 20);
    c.attribution.bootstrap = a.value("bootstrap", 1000);
    if (a.contains("per_circuit_ids"))
      c.attribution.per_circuit_ids = a.at("per_circuit_ids").get<std::vector<int>>();
  }

  if (j.contains("psd")) {
    const auto& p = j.at("psd");
    if (p.contains("sample_rates_hz"))
      c.psd.sample_rates_hz = p.at("sample_rates_hz").get<std::vector<double>>();
    c.psd.points_per_decade = p.value("points_per_decade", 24);
    c.psd.trace_seconds = p.value("trace_seconds", 0.0);
    c.psd.trace_dt_s = p.value("trace_dt_s", 1e-3);
  }

  if (j.contains("fid")) {
    const auto& f = j.at("fid");
    c.fid.mode = f.value("mode", c.fid.mode);
    c.fid.jfid_hz = f.value("jfid_mhz", 12.0) * 1e6;
    c.fid.realizations = f.value("realizations", 1000);
    c.fid.max_time_factor = f.value("max_time_factor", 2.0);
    if (f.contains("models")) c.fid.models = f.at("models").get<std::vector<std::string>>();
  }

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json ExperimentConfig::to_canonical_json() const {
  nlohmann::json j;
  j["schema"] = "stq-config-v1";
  j["master_seed"] = master_seed;
  j["qubit"] = {{"j0_mhz", qubit.j0_hz / 1e6},
                {"insensitivity_mv", qubit.insensitivity_v * 1e3},
                {"dbz_mhz", qubit.dbz_hz / 1e6},
                {"sample_rate_hz", qubit.sample_rate_hz}};
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json mj;
    mj["id"] = m.id;
    if (m.charge.present) mj["charge"] = axis_to_json(m.charge, "power_v2");
    if (m.magnetic.present) mj["magnetic"] = axis_to_json(m.magnetic, "power_hz2");
    ms.push_back(std::move(mj));
  }
  j["noise_models"] = std::move(ms);
  j["schedule"] = {{"depths", schedule.depths},
                   {"circuits_per_depth", schedule.circuits_per_depth},
                   {"passes", schedule.passes},
                   {"spam_us", schedule.spam_prep_s * 1e6},
                   {"inter_pass_idle_s", schedule.inter_pass_idle_s},
                   {"shots_mode", schedule.shots_mode},
                   {"circuit_seed", circuit_seed}};
  j["compile"] = {{"seed", compile.seed}, {"accept_threshold", compile.accept_threshold}};
  j["validation"] = {{"metric", validation.metric},
                     {"p_x", validation.p_x},
                     {"per_circuit_depth", validation.per_circuit_depth},
                     {"seed_range", {validation.seed_begin, validation.seed_end}},
                     {"cross_subsample", validation.cross_subsample}};
  j["attribution"] = {{"model", attribution.model_id},
                      {"partitions", attribution.partitions},
                      {"realizations", attribution.realizations},
                      {"bootstrap", attribution.bootstrap},
                      {"per_circuit_ids", attribution.per_circuit_ids}};
  j["psd"] = {{"sample_rates_hz", psd.sample_rates_hz},
              {"points_per_decade", psd.points_per_decade},
              {"trace_seconds", psd.trace_seconds},
              {"trace_dt_s", psd.trace_dt_s}};
  j["fid"] = {{"mode", fid.mode},
              {"jfid_mhz", fid.jfid_hz / 1e6},
              {"realizations", fid.realizations},
              {"max_time_factor", fid.max_time_factor},
              {"models", fid.models}};
  return j;
}

std::string ExperimentConfig::config_hash() const {
  // nlohmann::json objects iterate in sorted key order, so dump() is canonical
  return Sha256::of_string(to_canonical_json().dump());
}

FIDConfig ExperimentConfig::fid_config() const {
  FIDConfig f;
  f.mode = fid.mode == "charge" ? FIDMode::charge : FIDMode::magnetic;
  f.jfid_hz = fid.jfid_hz;
  f.insensitivity_v = qubit.insensitivity_v;
  f.dbz_hz = qubit.dbz_hz;
  f.realizations = fid.realizations;
  return f;
}

}  // namespace stq
