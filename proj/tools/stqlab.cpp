// stqlab: wall-clock simulation laboratory for a drifting singlet-triplet
// qubit. Subcommands cover calibration, gate compilation, randomized
// benchmarking, K-S model validation, error attribution, and spectra.

#include <cstdio>
#include <exception>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stq/kernels.hpp"
#include "stq/orchestrator.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;       // empty -> config.output_dir
  std::string seeds;         // "A..B"
  std::string model_filter;  // restrict to one model id
  int jobs = 1;
  int passes = -1;
  std::string depths;  // comma separated
  double spam_us = -1.0;
  bool shots_mode = false;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "experiment config (JSON)")->required();
  cmd->add_option("--out", args->out_dir, "output directory (default: config output_dir)");
  cmd->add_option("--seeds", args->seeds, "noise seed range A..B (end exclusive)");
  cmd->add_option("--jobs", args->jobs, "parallel worker count");
}

stq::ExperimentConfig load_config(const CommonArgs& args) {
  stq::ExperimentConfig config = stq::ExperimentConfig::from_file(args.config_path);
  if (!args.seeds.empty()) {
    auto dots = args.seeds.find("..");
    if (dots == std::string::npos)
      throw std::invalid_argument("--seeds expects A..B (end exclusive)");
    config.validation.seed_begin = std::stoull(args.seeds.substr(0, dots));
    config.validation.seed_end = std::stoull(args.seeds.substr(dots + 2));
  }
  if (!args.model_filter.empty()) {
    stq::ModelSpec keep = config.model_spec(args.model_filter);
    config.models = {keep};
  }
  if (args.passes > 0) config.schedule.passes = args.passes;
  if (!args.depths.empty()) {
    config.schedule.depths.clear();
    std::stringstream ss(args.depths);
    std::string tok;
    while (std::getline(ss, tok, ',')) config.schedule.depths.push_back(std::stoi(tok));
  }
  if (args.spam_us >= 0.0) {
    config.schedule.spam_prep_s = args.spam_us * 1e-6;
    config.schedule.spam_meas_s = args.spam_us * 1e-6;
  }
  if (args.shots_mode) config.schedule.shots_mode = true;
  config.validate();
  return config;
}

std::string out_dir_of(const CommonArgs& args, const stq::ExperimentConfig& config) {
  return args.out_dir.empty() ? config.output_dir : args.out_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stqlab - drifting singlet-triplet qubit simulation laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  bool dump_timelines = false;

  CLI::App* calibrate = app.add_subcommand("calibrate", "closed-form noise-power calibration");
  add_common(calibrate, &args);

  CLI::App* compile = app.add_subcommand("compile", "optimize generator pulses, build the Clifford group");
  add_common(compile, &args);
  compile->add_flag("--dump-timelines", dump_timelines, "write per-generator timeline CSVs");

  CLI::App* rb = app.add_subcommand("rb", "wall-clock randomized benchmarking runs");
  add_common(rb, &args);
  rb->add_option("--model", args.model_filter, "run a single model id");
  rb->add_option("--passes", args.passes, "override pass count");
  rb->add_option("--depths", args.depths, "override depth list, e.g. 2,4,8");
  rb->add_option("--spam-us", args.spam_us, "override SPAM window (microseconds)");
  rb->add_flag("--shots-mode", args.shots_mode, "record single-shot outcomes");

  CLI::App* validate = app.add_subcommand("validate", "K-S error-rate grids over run outputs");
  add_common(validate, &args);

  CLI::App* attribute = app.add_subcommand("attribute", "error attribution by noise partition");
  add_common(attribute, &args);

  CLI::App* psd = app.add_subcommand("psd", "continuous and aliased spectra CSVs");
  add_common(psd, &args);

  CLI::App* fid = app.add_subcommand("fid", "free-induction-decay traces and fits");
  add_common(fid, &args);

  CLI11_PARSE(app, argc, argv);

  try {
    stq::ExperimentConfig config = load_config(args);
    std::string out = out_dir_of(args, config);
    std::printf("stqlab: kernel=%s out=%s\n", stq::active_kernel_ops().name, out.c_str());

    if (calibrate->parsed()) {
      auto reports = stq::cmd_calibrate(config, out);
      for (const auto& r : reports) {
        auto show = [&](const stq::CalibratedAxis& a, const char* axis, const char* unit,
                        double scale) {
          if (!a.present) return;
          if (a.failed) {
            std::printf("  %-8s %-8s calibration failed: %s\n", r.model_id.c_str(), axis,
                        a.failure.c_str());
          } else {
            std::printf("  %-8s %-8s sqrt(p)=%.4g %s  T2*=%.4g us\n", r.model_id.c_str(),
                        axis, std::sqrt(a.power) * scale, unit, a.t2star_achieved_s * 1e6);
          }
        };
        show(r.charge, "charge", "uV", 1e6);
        show(r.magnetic, "magnetic", "kHz", 1e-3);
      }
    } else if (compile->parsed()) {
      stq::cmd_compile(config, out, dump_timelines);
      std::printf("compile: gate cache + report written\n");
    } else if (rb->parsed()) {
      stq::cmd_rb(config, out, args.jobs);
      std::printf("rb: runs written under %s/runs\n", out.c_str());
    } else if (validate->parsed()) {
      stq::cmd_validate(config, out);
      std::printf("validate: grids written\n");
    } else if (attribute->parsed()) {
      stq::cmd_attribute(config, out, args.jobs);
      std::printf("attribute: CSVs written\n");
    } else if (psd->parsed()) {
      stq::cmd_psd(config, out);
      std::printf("psd: spectra written\n");
    } else if (fid->parsed()) {
      stq::cmd_fid(config, out);
      std::printf("fid: traces written\n");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "stqlab: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
