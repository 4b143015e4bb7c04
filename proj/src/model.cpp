#include "waveqed/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace waveqed {

namespace {

constexpr double kSqrtPi = 1.77245385090551602730;

cplx trapezoid_envelope(double t, double shift, const PulseSpec& spec, double v_g,
                        const MomentumGrid& grid) {
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double p = grid.at(i);
    sum += grid.weight(i) * std::polar(1.0, -v_g * p * t + p * shift) * amplitude_alpha(p, spec);
  }
  return sum;
}

}  // namespace

double ModelParams::coupling() const { return std::sqrt(gamma * v_g / (4.0 * kPi)); }

void ModelParams::validate() const {
  std::string errors;
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) errors += "gamma must be finite and >= 0; ";
  if (!(v_g > 0.0) || !std::isfinite(v_g)) errors += "v_g must be finite and > 0; ";
  if (!std::isfinite(delta)) errors += "delta must be finite; ";
  if (!errors.empty()) throw ConfigError("invalid model parameters: " + errors);
}

ModelParams ModelParams::from_coupling(double g, double delta, double v_g) {
  return ModelParams{4.0 * kPi * g * g / v_g, delta, v_g};
}

void PulseSpec::validate() const {
  std::string errors;
  if (!(w > 0.0) || !std::isfinite(w)) errors += "w must be > 0; ";
  if (!(x0 < 0.0)) errors += "x0 must be < 0; ";
  if (!(L >= 0.0) || !std::isfinite(L)) errors += "L must be >= 0; ";
  if (n_photons < 1) errors += "n_photons must be >= 1; ";
  if (n_photons >= 3 && L != 0.0) errors += "n_photons >= 3 requires identical wavepackets (L = 0); ";
  // The qubit must sit in the far tail of the pulse when the clock starts.
  if (std::abs(x0) < 6.0 * w) errors += "|x0| must be at least 6 w; ";
  if (!errors.empty()) throw ConfigError("invalid pulse: " + errors);
}

double bandwidth(const ModelParams& params, const PulseSpec& spec) { return params.v_g / spec.w; }

MomentumGrid MomentumGrid::for_pulse(const PulseSpec& spec, std::size_t points) {
  return MomentumGrid{8.0 / spec.w, points};
}

cplx amplitude_alpha(double p, const PulseSpec& spec) {
  const double norm = std::sqrt(spec.w) / std::pow(kPi, 0.25);
  return norm * std::exp(-0.5 * spec.w * spec.w * p * p) * std::polar(1.0, -p * spec.x0);
}

cplx amplitude_beta(double p, const PulseSpec& spec) {
  return amplitude_alpha(p, spec) * std::polar(1.0, p * spec.L);
}

cplx envelope_A(double t, const PulseSpec& spec, double v_g) {
  const double peak = std::sqrt(2.0) * std::pow(kPi, 0.25) / std::sqrt(spec.w);
  const double s = (spec.x0 + v_g * t) / spec.w;
  return {peak * std::exp(-0.5 * s * s), 0.0};
}

cplx envelope_B(double t, const PulseSpec& spec, double v_g) {
  return envelope_A(t - spec.L / v_g, spec, v_g);
}

cplx envelope_A_quadrature(double t, const PulseSpec& spec, double v_g, const MomentumGrid& grid) {
  return trapezoid_envelope(t, 0.0, spec, v_g, grid);
}

cplx envelope_B_quadrature(double t, const PulseSpec& spec, double v_g, const MomentumGrid& grid) {
  return trapezoid_envelope(t, spec.L, spec, v_g, grid);
}

cplx overlap_chi(const PulseSpec& spec, const MomentumGrid& grid) {
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double p = grid.at(i);
    sum += grid.weight(i) * std::conj(amplitude_alpha(p, spec)) * amplitude_beta(p, spec);
  }
  return sum;
}

// Gaussian integral of the quadrature above; the quadrature bottoms out at
// roundoff (~1e-17) for well separated pulses.
cplx overlap_chi(const PulseSpec& spec) {
  const double l = spec.L / spec.w;
  return {std::exp(-0.25 * l * l), 0.0};
}

double normalization_nu(const PulseSpec& spec) {
  return 1.0 / std::sqrt(1.0 + std::norm(overlap_chi(spec)));
}

double initial_density(double x, const PulseSpec& spec) {
  return InitialState(spec, 1.0).density(x, 0.0);
}

double free_phase_space(double x, double p, double t, const PulseSpec& spec, double v_g) {
  return InitialState(spec, v_g).phase_space(x, p, t);
}

InitialState::InitialState(const PulseSpec& spec, double v_g)
    : spec_(spec), v_g_(v_g), chi_(overlap_chi(spec)), nu_(1.0 / std::sqrt(1.0 + std::norm(chi_))) {}

InitialState::InitialState(const PulseSpec& spec, double v_g, const MomentumGrid& grid)
    : spec_(spec), v_g_(v_g), chi_(overlap_chi(spec, grid)),
      nu_(1.0 / std::sqrt(1.0 + std::norm(chi_))) {}

double InitialState::density(double x, double t) const {
  const double w = spec_.w;
  const double X = (x - spec_.x0 - v_g_ * t) / w;
  const double single = std::exp(-X * X) / (kSqrtPi * w);
  if (spec_.n_photons != 2) return spec_.n_photons * single;

  const double l = spec_.L / w;
  const double behind = std::exp(-(X + l) * (X + l)) / (kSqrtPi * w);
  const double mid = std::exp(-(X + 0.5 * l) * (X + 0.5 * l)) / (kSqrtPi * w);
  const double cross = 2.0 * chi_.real() * std::exp(-0.25 * l * l) * mid;
  return nu_ * nu_ * (single + behind + cross);
}

double InitialState::phase_space(double x, double p, double t) const {
  const double w = spec_.w;
  const double X = (x - spec_.x0 - v_g_ * t) / w;
  const double momentum = std::exp(-p * p * w * w) / kPi;
  const double single = momentum * std::exp(-X * X);
  if (spec_.n_photons != 2) return spec_.n_photons * single;

  const double l = spec_.L / w;
  const double behind = momentum * std::exp(-(X + l) * (X + l));
  const double mid = momentum * std::exp(-(X + 0.5 * l) * (X + 0.5 * l));
  const double cross = 2.0 * (chi_ * std::polar(1.0, -p * spec_.L)).real() * mid;
  return nu_ * nu_ * (single + behind + cross);
}

namespace {

double fastest_scale(const ModelParams& params, const PulseSpec& spec) {
  const double omega = bandwidth(params, spec);
  double scale = spec.w / params.v_g;
  if (params.gamma > 0.0) scale = std::min(scale, 1.0 / params.gamma);
  return std::min(scale, 1.0 / (std::abs(params.delta) + omega));
}

}  // namespace

TimeGrid TimeGrid::covering(double t_max, double dt_max) {
  if (!(t_max > 0.0) || !(dt_max > 0.0)) throw ConfigError("time grid needs t_max > 0 and dt > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt_max - 1e-9));
  return TimeGrid{t_max / static_cast<double>(steps), steps};
}

double TimeGrid::default_step(const ModelParams& params, const PulseSpec& spec) {
  return fastest_scale(params, spec) / 50.0;
}

double TimeGrid::max_step(const ModelParams& params, const PulseSpec& spec) {
  return fastest_scale(params, spec) / 4.0;
}

void check_step(const TimeGrid& grid, const ModelParams& params, const PulseSpec& spec) {
  if (grid.steps == 0 || !(grid.dt > 0.0)) throw ConfigError("time grid is empty");
  const double limit = TimeGrid::max_step(params, spec);
  if (grid.dt > limit * (1.0 + 1e-12)) {
    throw ConfigError("time step " + std::to_string(grid.dt) + " is too coarse; at most " +
                      std::to_string(limit) + " is needed to resolve the pulse, decay and detuning");
  }
}

}  // namespace waveqed
