#include "stq/qubit.hpp"

#include <cmath>
#include <stdexcept>

#include "stq/kernels.hpp"
#include "stq/vmath.hpp"

namespace stq {

void QubitParams::validate() const {
  // dbz may be zeroed for pure-exchange test configurations; the rest are
  // strictly positive scales.
  if (!(j0_hz > 0.0) || !(insensitivity_v > 0.0) || !(dbz_hz >= 0.0) ||
      !(sample_rate_hz > 0.0))
    throw std::invalid_argument("QubitParams: bad field value");
}

double exchange_from_voltage(double v_volts, const QubitParams& params) {
  return params.j0_hz * vm::vm_exp(v_volts / params.insensitivity_v);
}

Su2 step_unitary(double j_hz, double dbz_hz, double dt_s) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("step_unitary: dt must be > 0");
  double omega = std::sqrt(j_hz * j_hz + dbz_hz * dbz_hz);
  double theta = M_PI * dt_s * omega;
  double s, c;
  if (std::abs(theta) < 1e6) {
    vm::vm_sincos(theta, &s, &c);
  } else {
    s = std::sin(theta);
    c = std::cos(theta);
  }
  double factor = omega > 0.0 ? s / omega : 0.0;
  return {c, factor * dbz_hz, 0.0, factor * j_hz};
}

int64_t ControlTimeline::duration_ps() const {
  return static_cast<int64_t>(samples_v.size()) * llround(1e12 / fs_hz);
}

void ControlTimeline::append(const ControlTimeline& other, const std::string& label) {
  if (other.fs_hz != fs_hz && !other.samples_v.empty())
    throw std::invalid_argument("ControlTimeline::append: sampling rates differ");
  std::size_t base = samples_v.size();
  samples_v.insert(samples_v.end(), other.samples_v.begin(), other.samples_v.end());
  if (!label.empty()) {
    segments.push_back({base, other.samples_v.size(), label});
  } else {
    for (auto seg : other.segments) {
      seg.start += base;
      segments.push_back(std::move(seg));
    }
  }
}

Su2 propagate(const ControlTimeline& timeline, TrajectoryCursor* cursor,
              const QubitParams& params) {
  params.validate();
  if (timeline.fs_hz != params.sample_rate_hz)
    throw std::invalid_argument("propagate: timeline not sampled at params.sample_rate_hz");

  constexpr std::size_t kBlock = 1024;
  constexpr std::size_t kRenormEvery = 10000;

  const std::size_t n = timeline.samples_v.size();
  const double dt = timeline.dt_s();
  const double inv_i = 1.0 / params.insensitivity_v;
  const double pi_dt = M_PI * dt;
  const KernelOps& ops = active_kernel_ops();

  double dv[kBlock], db[kBlock], arg[kBlock], ex[kBlock];
  double jj[kBlock], bb[kBlock], om[kBlock], theta[kBlock], sn[kBlock], cs[kBlock];

  Su2 u = Su2::identity();
  std::size_t since_renorm = 0;

  for (std::size_t pos = 0; pos < n; pos += kBlock) {
    std::size_t m = std::min(kBlock, n - pos);
    if (cursor) {
      cursor->advance_block(dt, m, dv, db);
    } else {
      for (std::size_t k = 0; k < m; ++k) dv[k] = db[k] = 0.0;
    }
    const double* v0 = timeline.samples_v.data() + pos;
    for (std::size_t k = 0; k < m; ++k) arg[k] = (v0[k] + dv[k]) * inv_i;
    ops.exp_block(arg, m, ex);
    for (std::size_t k = 0; k < m; ++k) {
      jj[k] = params.j0_hz * ex[k];
      bb[k] = params.dbz_hz + db[k];
      om[k] = std::sqrt(jj[k] * jj[k] + bb[k] * bb[k]);
      theta[k] = pi_dt * om[k];
    }
    ops.sincos_block(theta, m, sn, cs);
    for (std::size_t k = 0; k < m; ++k) {
      double factor = om[k] > 0.0 ? sn[k] / om[k] : 0.0;
      double sw = cs[k], sx = factor * bb[k], sz = factor * jj[k];
      // u <- step * u with step y-component zero
      double nw = sw * u.w - sx * u.x - sz * u.z;
      double nx = sw * u.x + u.w * sx - sz * u.y;
      double ny = sw * u.y + sz * u.x - sx * u.z;
      double nz = sw * u.z + u.w * sz + sx * u.y;
      u = {nw, nx, ny, nz};
      if (++since_renorm == kRenormEvery) {
        u = u.normalized();
        since_renorm = 0;
      }
    }
  }
  return u.normalized();
}

std::vector<double> exchange_profile(const ControlTimeline& timeline,
                                     const QubitParams& params) {
  std::vector<double> j(timeline.samples_v.size());
  for (std::size_t k = 0; k < j.size(); ++k)
    j[k] = exchange_from_voltage(timeline.samples_v[k], params);
  return j;
}

}  // namespace stq
