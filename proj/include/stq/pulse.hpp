#pragma once

// Voltage pulse shaping and generator compilation. Shapes are square pulse
// trains convolved with a normalized Gaussian; the convolution has the
// closed form A/2 (erf((t-s)/(sqrt2 sigma)) - erf((t-e)/(sqrt2 sigma))), so
// rendering never needs an FFT. Generators are optimized against the
// noiseless propagator with a multi-start Nelder-Mead simplex.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stq/qubit.hpp"
#include "stq/su2.hpp"

namespace stq {

enum class GeneratorId { identity = 0, x_p90 = 1, x_m90 = 2, z_p90 = 3, z_m90 = 4 };

inline constexpr std::array<GeneratorId, 5> kAllGenerators = {
    GeneratorId::identity, GeneratorId::x_p90, GeneratorId::x_m90,
    GeneratorId::z_p90, GeneratorId::z_m90};

std::string generator_name(GeneratorId id);
GeneratorId generator_from_name(const std::string& name);
Su2 generator_target(GeneratorId id);

// 10-90% rise time of a Gaussian step response is 2.5631 sigma.
inline constexpr double kRisePerSigma = 2.5631031310892007;

struct PulseShapeParams {
  struct Pulse {
    double start_s = 0.0;
    double width_s = 0.0;      // peak duration
    double amplitude_v = 0.0;  // above the zero baseline
  };
  std::vector<Pulse> pulses;
  double sigma_s = 2e-9;    // Gaussian smoothing width
  double duration_s = 0.0;  // total timeline length

  // Control-band invariants: 1-5 pulses, peaks 30-50 ns, amplitudes
  // 70-120 mV, rise/decay 4-6 ns.
  void validate() const;
};

// Sample the smoothed train at 1/fs spacing. duration_s must be an integer
// number of samples. sigma_s == 0 reproduces the square train.
ControlTimeline render_pulse(const PulseShapeParams& params, double fs_hz);

struct CompiledGate {
  GeneratorId id = GeneratorId::identity;
  PulseShapeParams shape;
  ControlTimeline timeline;
  double infidelity = 0.0;
  int64_t duration_ps = 0;
};

struct CompileOptions {
  uint64_t seed = 1;
  int starts_per_config = 2;
  int max_evals = 4000;
  double accept_threshold = 1e-5;  // hard acceptance bound
  double target_infidelity = 1e-10;  // early-stop goal
  std::vector<int> duration_ladder_ns = {50, 60, 70, 80, 90, 100, 110, 120, 130, 140};
  std::vector<int> pulse_counts = {1, 2};
};

struct CompileResult {
  CompiledGate gate;
  bool met_threshold = false;
  double best_infidelity = 1.0;
  int evals = 0;
};

// Noiseless-context optimization of one generator. Deterministic given
// options.seed. Identity compiles to a zero-duration no-op.
CompileResult compile_generator(GeneratorId id, const QubitParams& params,
                                const CompileOptions& options);

struct GateCache {
  QubitParams params;
  uint64_t params_hash = 0;
  std::map<GeneratorId, CompiledGate> gates;

  bool complete() const { return gates.size() == kAllGenerators.size(); }
  const CompiledGate& gate(GeneratorId id) const;
};

uint64_t compute_params_hash(const QubitParams& params, const CompileOptions& options);

// Compile all five generators (or load from `cache_path` when the stored
// params_hash matches). Throws on threshold miss unless `allow_miss`.
GateCache compile_all(const QubitParams& params, const CompileOptions& options,
                      std::vector<CompileResult>* reports = nullptr);

void save_gate_cache(const GateCache& cache, const std::string& path);
GateCache load_gate_cache(const std::string& path);

}  // namespace stq
