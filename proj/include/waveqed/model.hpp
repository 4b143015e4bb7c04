// Physical parameters, incoming Gaussian pulses and their closed-form
// initial-state quantities.
//
// Units are left to the caller; the CLI works in units where v_g = w = 1,
// so rates are measured in the pulse bandwidth Omega = v_g / w.
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace waveqed {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown when parameters, grids or options violate their invariants.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when arguments of an otherwise valid call are inconsistent
/// (mismatched grids, snapshot past the end of a table, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Waveguide-qubit constants. The coupling g is derived from the decay rate
/// through Gamma = 4 pi g^2 / v_g.
struct ModelParams {
  double gamma = 1.0;  ///< qubit decay rate into the waveguide (both directions)
  double delta = 0.0;  ///< detuning of the qubit from the carrier frequency
  double v_g = 1.0;    ///< group velocity

  double coupling() const;
  void validate() const;

  static ModelParams from_coupling(double g, double delta, double v_g);
};

/// Geometry of the incoming wavepackets: alpha centred at x0, beta = alpha
/// shifted upstream by L. For n_photons != 2 all photons share alpha.
struct PulseSpec {
  double w = 1.0;
  double x0 = -10.0;
  double L = 0.0;
  int n_photons = 2;

  void validate() const;
};

/// Pulse bandwidth Omega = v_g / w.
double bandwidth(const ModelParams& params, const PulseSpec& spec);

/// Uniform trapezoid grid on [-p_max, p_max].
struct MomentumGrid {
  double p_max = 8.0;
  std::size_t points = 513;

  double spacing() const { return 2.0 * p_max / static_cast<double>(points - 1); }
  double at(std::size_t i) const { return -p_max + spacing() * static_cast<double>(i); }
  double weight(std::size_t i) const {
    return (i == 0 || i + 1 == points) ? 0.5 * spacing() : spacing();
  }

  static MomentumGrid for_pulse(const PulseSpec& spec, std::size_t points = 513);
};

cplx amplitude_alpha(double p, const PulseSpec& spec);
cplx amplitude_beta(double p, const PulseSpec& spec);

/// A(t) = int dp exp(-i v_g p t) alpha_p in closed form.
cplx envelope_A(double t, const PulseSpec& spec, double v_g);
/// B(t) = A(t - L / v_g).
cplx envelope_B(double t, const PulseSpec& spec, double v_g);

/// Quadrature versions of the envelopes, independent of the Gaussian algebra.
cplx envelope_A_quadrature(double t, const PulseSpec& spec, double v_g, const MomentumGrid& grid);
cplx envelope_B_quadrature(double t, const PulseSpec& spec, double v_g, const MomentumGrid& grid);

/// chi = int dp alpha_p^* beta_p by trapezoid quadrature.
cplx overlap_chi(const PulseSpec& spec, const MomentumGrid& grid);
/// Closed form exp(-L^2 / 4 w^2).
cplx overlap_chi(const PulseSpec& spec);

/// nu = (1 + |chi|^2)^{-1/2}.
double normalization_nu(const PulseSpec& spec);

/// Photon density of the incoming state at t = 0.
double initial_density(double x, const PulseSpec& spec);

/// Phase-space distribution of the freely propagating incoming state.
double free_phase_space(double x, double p, double t, const PulseSpec& spec, double v_g);

/// The incoming state with chi and nu evaluated once. Everything the
/// correlator and observable stages need from the initial state goes
/// through here.
class InitialState {
 public:
  InitialState(const PulseSpec& spec, double v_g);
  InitialState(const PulseSpec& spec, double v_g, const MomentumGrid& grid);

  const PulseSpec& spec() const { return spec_; }
  double v_g() const { return v_g_; }
  int photons() const { return spec_.n_photons; }
  cplx chi() const { return chi_; }
  double nu() const { return nu_; }

  cplx A(double t) const { return envelope_A(t, spec_, v_g_); }
  cplx B(double t) const { return envelope_B(t, spec_, v_g_); }

  /// Density at time t of the field that never met the qubit.
  double density(double x, double t) const;
  double phase_space(double x, double p, double t) const;

 private:
  PulseSpec spec_;
  double v_g_;
  cplx chi_;
  double nu_;
};

/// Fixed-step grid t_k = k dt, k = 0..steps, with steps * dt = t_max.
struct TimeGrid {
  double dt = 0.02;
  std::size_t steps = 0;

  std::size_t nodes() const { return steps + 1; }
  double t(std::size_t k) const { return dt * static_cast<double>(k); }
  double t_max() const { return t(steps); }

  /// Smallest grid with spacing <= dt_max that ends exactly at t_max.
  static TimeGrid covering(double t_max, double dt_max);

  /// min(w/v_g, 1/Gamma, 1/(|Delta| + Omega)) / 50.
  static double default_step(const ModelParams& params, const PulseSpec& spec);

  /// Coarsest step accepted by the solvers: four steps per fastest scale.
  static double max_step(const ModelParams& params, const PulseSpec& spec);

  bool operator==(const TimeGrid&) const = default;
};

/// Throws ConfigError when dt is too coarse for the fastest physical scale.
void check_step(const TimeGrid& grid, const ModelParams& params, const PulseSpec& spec);

}  // namespace waveqed
