#include "waveqed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace waveqed::oracle {

namespace {

constexpr cplx kI{0.0, 1.0};

void fill_phases(const DiscreteModel& disc, double t, std::vector<cplx>& u) {
  for (std::size_t k = 0; k < disc.size(); ++k) u[k] = std::polar(1.0, disc.frequency(k) * t);
}

cplx conj_dot(const std::vector<cplx>& u, const std::vector<cplx>& x) {
  cplx sum{0.0, 0.0};
  for (std::size_t q = 0; q < u.size(); ++q) sum += std::conj(u[q]) * x[q];
  return sum;
}

/// One-excitation sector in the interaction picture. The whole state is a
/// vector of 2M + 1 numbers, so a plain RK4 step is cheap.
class SingleSector {
 public:
  SingleSector(const DiscreteModel& disc, const ModelParams& params)
      : disc_(disc), g_(disc.coupling), delta_(params.delta), u_(disc.size()), k_(4),
        stage_(disc.size()) {
    for (auto& v : k_) v.assign(disc.size() + 1, cplx{0.0, 0.0});
  }

  void step(SectorState& s, double t, double h) {
    std::vector<cplx> y(disc_.size() + 1);
    y[0] = s.qubit;
    std::copy(s.photon.begin(), s.photon.end(), y.begin() + 1);
    std::vector<cplx> tmp(y.size());
    const double times[4] = {t, t + 0.5 * h, t + 0.5 * h, t + h};
    const double weights[4] = {0.0, 0.5 * h, 0.5 * h, h};
    for (int stage = 0; stage < 4; ++stage) {
      if (stage == 0) {
        tmp = y;
      } else {
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + weights[stage] * k_[stage - 1][i];
      }
      rhs(times[stage], tmp, k_[stage]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += (h / 6.0) * (k_[0][i] + 2.0 * k_[1][i] + 2.0 * k_[2][i] + k_[3][i]);
    }
    s.qubit = y[0];
    std::copy(y.begin() + 1, y.end(), s.photon.begin());
  }

 private:
  void rhs(double t, const std::vector<cplx>& y, std::vector<cplx>& dy) {
    fill_phases(disc_, t, u_);
    const cplx e = std::polar(1.0, -delta_ * t);
    cplx field{0.0, 0.0};
    for (std::size_t k = 0; k < disc_.size(); ++k) field += std::conj(u_[k]) * y[k + 1];
    dy[0] = -kI * g_ * std::conj(e) * field;
    const cplx drive = -kI * g_ * e * y[0];
    for (std::size_t k = 0; k < disc_.size(); ++k) dy[k + 1] = drive * u_[k];
  }

  const DiscreteModel& disc_;
  double g_;
  double delta_;
  std::vector<cplx> u_;
  std::vector<std::vector<cplx>> k_;
  std::vector<cplx> stage_;
};

/// Two-excitation sector in the interaction picture.
///
/// The pair amplitude never appears on its own right-hand side: its time
/// derivative is the rank-2 product c(s) (u_k(s) phi_q + u_q(s) phi_k). The
/// RK4 stage states for the pair block therefore enter the qubit equation
/// only through O(M) corrections, and each step costs two passes over the
/// (2M)^2 block: one for the intermediate projections and one fused
/// update-plus-projection.
class PairSector {
 public:
  PairSector(const DiscreteModel& disc, const ModelParams& params)
      : disc_(disc), n_(disc.size()), g_(disc.coupling), delta_(params.delta), u0_(n_), uh_(n_),
        u1_(n_), m0_(n_), mh_(n_), m1_(n_) {}

  /// Must be called once before the first step, at time t.
  void prepare(const SectorState& s, double t) {
    fill_phases(disc_, t, u0_);
    project(s.pair, u0_, m0_);
  }

  void step(SectorState& s, double t, double h) {
    fill_phases(disc_, t, u0_);
    fill_phases(disc_, t + 0.5 * h, uh_);
    fill_phases(disc_, t + h, u1_);
    project_two(s.pair, uh_, u1_, mh_, m1_);

    const cplx c0 = pair_rate(t), ch = pair_rate(t + 0.5 * h), c1 = pair_rate(t + h);
    const cplx d0 = qubit_rate(t), dh = qubit_rate(t + 0.5 * h), d1 = qubit_rate(t + h);
    const std::vector<cplx>& phi = s.photon;

    std::vector<cplx> k1(n_), k2(n_), k3(n_), k4(n_), phi2(n_), phi3(n_), phi4(n_);
    for (std::size_t k = 0; k < n_; ++k) k1[k] = d0 * m0_[k];
    for (std::size_t k = 0; k < n_; ++k) phi2[k] = phi[k] + 0.5 * h * k1[k];

    // Projections of the pair stage increments onto conj(u(s)).
    auto correction = [&](const std::vector<cplx>& ua, const std::vector<cplx>& pa, cplx ca,
                          const std::vector<cplx>& us, std::vector<cplx>& out, double scale) {
      const cplx pa_s = conj_dot(us, pa);
      const cplx ua_s = conj_dot(us, ua);
      for (std::size_t k = 0; k < n_; ++k) out[k] = scale * ca * (ua[k] * pa_s + pa[k] * ua_s);
    };

    std::vector<cplx> corr(n_);
    correction(u0_, phi, c0, uh_, corr, 0.5 * h);
    for (std::size_t k = 0; k < n_; ++k) k2[k] = dh * (mh_[k] + corr[k]);
    for (std::size_t k = 0; k < n_; ++k) phi3[k] = phi[k] + 0.5 * h * k2[k];

    correction(uh_, phi2, ch, uh_, corr, 0.5 * h);
    for (std::size_t k = 0; k < n_; ++k) k3[k] = dh * (mh_[k] + corr[k]);
    for (std::size_t k = 0; k < n_; ++k) phi4[k] = phi[k] + h * k3[k];

    correction(uh_, phi3, ch, u1_, corr, h);
    for (std::size_t k = 0; k < n_; ++k) k4[k] = d1 * (m1_[k] + corr[k]);

    // Pair update as three symmetric rank-2 terms a_j (x) b_j + b_j (x) a_j.
    std::vector<cplx> b0(n_), bh(n_), b1(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      b0[k] = (h / 6.0) * c0 * phi[k];
      bh[k] = (h / 6.0) * 2.0 * ch * (phi2[k] + phi3[k]);
      b1[k] = (h / 6.0) * c1 * phi4[k];
    }
    update_and_project(s.pair, b0, bh, b1);

    for (std::size_t k = 0; k < n_; ++k) {
      s.photon[k] = phi[k] + (h / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
  }

 private:
  cplx pair_rate(double s) const { return -kI * (g_ / std::sqrt(2.0)) * std::polar(1.0, -delta_ * s); }
  cplx qubit_rate(double s) const { return -kI * (std::sqrt(2.0) * g_) * std::polar(1.0, delta_ * s); }

  void project(const std::vector<cplx>& pair, const std::vector<cplx>& u, std::vector<cplx>& m) const {
    for (std::size_t k = 0; k < n_; ++k) {
      const cplx* row = pair.data() + k * n_;
      cplx sum{0.0, 0.0};
      for (std::size_t q = 0; q < n_; ++q) sum += std::conj(u[q]) * row[q];
      m[k] = sum;
    }
  }

  void project_two(const std::vector<cplx>& pair, const std::vector<cplx>& ua,
                   const std::vector<cplx>& ub, std::vector<cplx>& ma, std::vector<cplx>& mb) const {
    for (std::size_t k = 0; k < n_; ++k) {
      const cplx* row = pair.data() + k * n_;
      cplx sa{0.0, 0.0}, sb{0.0, 0.0};
      for (std::size_t q = 0; q < n_; ++q) {
        sa += std::conj(ua[q]) * row[q];
        sb += std::conj(ub[q]) * row[q];
      }
      ma[k] = sa;
      mb[k] = sb;
    }
  }

  void update_and_project(std::vector<cplx>& pair, const std::vector<cplx>& b0,
                          const std::vector<cplx>& bh, const std::vector<cplx>& b1) {
    for (std::size_t k = 0; k < n_; ++k) {
      cplx* row = pair.data() + k * n_;
      const cplx a0k = u0_[k], ahk = uh_[k], a1k = u1_[k];
      const cplx b0k = b0[k], bhk = bh[k], b1k = b1[k];
      cplx sum{0.0, 0.0};
      for (std::size_t q = 0; q < n_; ++q) {
        row[q] += a0k * b0[q] + b0k * u0_[q] + ahk * bh[q] + bhk * uh_[q] + a1k * b1[q] + b1k * u1_[q];
        sum += std::conj(u1_[q]) * row[q];
      }
      m0_[k] = sum;
    }
  }

  const DiscreteModel& disc_;
  std::size_t n_;
  double g_;
  double delta_;
  std::vector<cplx> u0_, uh_, u1_;
  std::vector<cplx> m0_, mh_, m1_;
};

Sample measure(const SectorState& s, const DiscreteModel& disc, double t) {
  Sample out;
  out.t = t;
  out.excitation = s.excitation_probability();
  s.photon_numbers(disc.modes, out.n_left, out.n_right, out.n_right_sq);
  out.norm = s.norm();
  return out;
}

void to_schroedinger(SectorState& s, const DiscreteModel& disc, double delta, double t) {
  std::vector<cplx> u(disc.size());
  fill_phases(disc, t, u);
  const cplx e = std::polar(1.0, -delta * t);
  if (s.excitations == 1) {
    s.qubit *= e;
    for (std::size_t k = 0; k < disc.size(); ++k) s.photon[k] *= std::conj(u[k]);
    return;
  }
  const std::size_t n = disc.size();
  for (std::size_t k = 0; k < n; ++k) {
    s.photon[k] *= e * std::conj(u[k]);
    for (std::size_t q = 0; q < n; ++q) s.pair[k * n + q] *= std::conj(u[k] * u[q]);
  }
}

}  // namespace

DiscreteModel DiscreteModel::make(const ModelParams& params, std::size_t modes, double p_max) {
  params.validate();
  if (modes < 2 || !(p_max > 0.0)) throw ConfigError("discrete model needs modes >= 2 and p_max > 0");
  DiscreteModel disc;
  disc.modes = modes;
  disc.p_max = p_max;
  disc.dp = 2.0 * p_max / static_cast<double>(modes);
  disc.v_g = params.v_g;
  disc.coupling = params.coupling() * std::sqrt(disc.dp);
  disc.momenta.resize(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    disc.momenta[j] = -p_max + (static_cast<double>(j) + 0.5) * disc.dp;
  }
  return disc;
}

double DiscreteModel::box_length() const { return 2.0 * kPi / dp; }

double SectorState::norm() const {
  double sum = std::norm(qubit);
  for (const auto& a : photon) sum += std::norm(a);
  for (const auto& a : pair) sum += std::norm(a);
  return sum;
}

double SectorState::excitation_probability() const {
  if (excitations == 1) return std::norm(qubit);
  double sum = 0.0;
  for (const auto& a : photon) sum += std::norm(a);
  return sum;
}

void SectorState::photon_numbers(std::size_t modes, double& n_left, double& n_right,
                                 double& n_right_sq) const {
  n_left = n_right = n_right_sq = 0.0;
  const std::size_t n = 2 * modes;
  for (std::size_t k = 0; k < n; ++k) {
    const double prob = std::norm(photon[k]);
    (k >= modes ? n_right : n_left) += prob;
    if (k >= modes) n_right_sq += prob;
  }
  if (excitations == 1) return;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx* row = pair.data() + k * n;
    const int rk = k >= modes ? 1 : 0;
    for (std::size_t q = 0; q < n; ++q) {
      const double prob = std::norm(row[q]);
      const int right = rk + (q >= modes ? 1 : 0);
      n_right += right * prob;
      n_left += (2 - right) * prob;
      n_right_sq += right * right * prob;
    }
  }
}

SectorState build_initial_state(const PulseSpec& spec, const DiscreteModel& disc) {
  spec.validate();
  if (disc.modes < 256) throw ConfigError("the oracle needs at least 256 modes per direction");
  if (disc.p_max < 8.0 / spec.w * (1.0 - 1e-12)) {
    throw ConfigError("oracle momentum cutoff must be at least 8 / w to hold the pulse bandwidth");
  }
  if (std::abs(spec.x0) + spec.L + 6.0 * spec.w > 0.5 * disc.box_length()) {
    throw ConfigError("oracle mode spacing too coarse: the incoming pulse does not fit in the periodic box");
  }
  if (spec.n_photons > 2) throw ConfigError("the oracle covers one- and two-photon inputs only");

  const std::size_t n = disc.size();
  std::vector<cplx> alpha(disc.modes), beta(disc.modes);
  for (std::size_t j = 0; j < disc.modes; ++j) {
    alpha[j] = amplitude_alpha(disc.momenta[j], spec) * std::sqrt(disc.dp);
    beta[j] = amplitude_beta(disc.momenta[j], spec) * std::sqrt(disc.dp);
  }

  SectorState s;
  s.excitations = spec.n_photons;
  s.photon.assign(n, cplx{0.0, 0.0});
  if (spec.n_photons == 1) {
    double norm = 0.0;
    for (std::size_t j = 0; j < disc.modes; ++j) norm += std::norm(alpha[j]);
    for (std::size_t j = 0; j < disc.modes; ++j) s.photon[j] = alpha[j] / std::sqrt(norm);
    return s;
  }

  s.pair.assign(n * n, cplx{0.0, 0.0});
  double norm = 0.0;
  for (std::size_t k = 0; k < disc.modes; ++k) {
    for (std::size_t q = 0; q < disc.modes; ++q) {
      const cplx v = alpha[k] * beta[q] + beta[k] * alpha[q];
      s.pair[k * n + q] = v;
      norm += std::norm(v);
    }
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& v : s.pair) v *= scale;
  s.nu_discrete = std::sqrt(2.0) * scale;
  return s;
}

SectorState excited_qubit(const DiscreteModel& disc) {
  SectorState s;
  s.excitations = 1;
  s.qubit = 1.0;
  s.photon.assign(disc.size(), cplx{0.0, 0.0});
  return s;
}

Trajectory propagate(SectorState state, const DiscreteModel& disc, const ModelParams& params,
                     const TimeGrid& grid, const PropagateOptions& options) {
  params.validate();
  if (grid.steps == 0) throw ConfigError("oracle time grid is empty");
  if (params.v_g * grid.t_max() > 0.5 * disc.box_length()) {
    throw ConfigError("oracle mode spacing too coarse: emitted photons would wrap around the periodic box");
  }
  const std::size_t every = std::max<std::size_t>(options.record_every, 1);

  Trajectory out;
  const Sample first = measure(state, disc, 0.0);
  const double norm0 = first.norm;
  const double ex0 = first.excitation + first.n_left + first.n_right;
  out.samples.push_back(first);

  auto record = [&](double t) {
    const Sample s = measure(state, disc, t);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(s.norm - norm0));
    out.max_excitation_drift =
        std::max(out.max_excitation_drift, std::abs(s.excitation + s.n_left + s.n_right - ex0));
    out.samples.push_back(s);
    if (out.max_norm_drift > options.max_norm_drift) {
      throw NumericalFailure("oracle norm drift " + std::to_string(out.max_norm_drift) + " at t = " +
                             std::to_string(t) + "; reduce the time step");
    }
  };

  if (state.excitations == 1) {
    SingleSector sector(disc, params);
    for (std::size_t k = 0; k < grid.steps; ++k) {
      sector.step(state, grid.t(k), grid.dt);
      if ((k + 1) % every == 0 || k + 1 == grid.steps) record(grid.t(k + 1));
    }
  } else {
    PairSector sector(disc, params);
    sector.prepare(state, 0.0);
    for (std::size_t k = 0; k < grid.steps; ++k) {
      sector.step(state, grid.t(k), grid.dt);
      if ((k + 1) % every == 0 || k + 1 == grid.steps) record(grid.t(k + 1));
    }
  }
  to_schroedinger(state, disc, params.delta, grid.t_max());
  out.final_state = std::move(state);
  out.final_time = grid.t_max();
  return out;
}

double max_pair_emission_amplitude(const SectorState& state, double t, const DiscreteModel& disc,
                                   const ModelParams& params, double dx) {
  if (state.excitations != 2) throw UsageError("pair emission amplitude needs a two-excitation state");
  const std::size_t n = disc.size();
  const std::size_t m = disc.modes;
  const auto points = static_cast<std::size_t>(std::ceil(params.v_g * t / dx)) + 1;
  std::vector<double> xs(points);
  for (std::size_t i = 0; i < points; ++i) xs[i] = -static_cast<double>(i) * dx;

  // Psi_rr(x1, x2) = (dp / 2 pi) sqrt(2) sum_jk exp(i (p_j x1 + p_k x2)) psi_jk.
  std::vector<cplx> half(points * m, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const cplx phase = std::polar(1.0, disc.momenta[j] * xs[i]);
      const cplx* row = state.pair.data() + (m + j) * n + m;
      for (std::size_t k = 0; k < m; ++k) half[i * m + k] += phase * row[k];
    }
  }
  std::vector<cplx> phases(points * m);
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t k = 0; k < m; ++k) phases[i * m + k] = std::polar(1.0, disc.momenta[k] * xs[i]);
  }
  const double prefactor = std::sqrt(2.0) * disc.dp / (2.0 * kPi);
  const double c2 = 2.0 * kPi * params.coupling() * params.coupling() / (params.v_g * params.v_g);
  double best = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t l = 0; l < points; ++l) {
      cplx sum{0.0, 0.0};
      for (std::size_t k = 0; k < m; ++k) sum += half[i * m + k] * phases[l * m + k];
      best = std::max(best, std::abs(prefactor * sum) / c2);
    }
  }
  return best;
}

}  // namespace waveqed::oracle
