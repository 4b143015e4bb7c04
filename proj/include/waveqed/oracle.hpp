// Brute-force reference: the waveguide continuum is replaced by M discrete
// modes per direction and the Schroedinger equation is integrated directly in
// the one- or two-excitation sector of the rotating-frame Hamiltonian.
//
// Shares nothing with the correlator hierarchy except the incoming pulse
// amplitudes, so agreement between the two is a genuine cross-check.
#pragma once

#include <cstddef>
#include <vector>

#include "waveqed/model.hpp"

namespace waveqed::oracle {

/// Midpoint grid of M momenta per direction on [-p_max, p_max]. Mode index
/// i < M is the left-to-right mode with frequency +v_g p_i; index M + i is
/// the right-to-left mode with frequency -v_g p_i.
struct DiscreteModel {
  std::size_t modes = 512;
  double p_max = 8.0;
  double dp = 0.0;
  double v_g = 1.0;
  double coupling = 0.0;  ///< g sqrt(dp)
  std::vector<double> momenta;

  static DiscreteModel make(const ModelParams& params, std::size_t modes, double p_max);

  std::size_t size() const { return 2 * modes; }
  double frequency(std::size_t index) const {
    return index < modes ? v_g * momenta[index] : -v_g * momenta[index - modes];
  }
  bool is_right_moving(std::size_t index) const { return index >= modes; }
  /// Length of the periodic box implied by the mode spacing.
  double box_length() const;
};

/// State in a fixed excitation sector.
///
/// One excitation: `qubit` holds |e, vac>, `photon[k]` holds |g, 1_k>.
/// Two excitations: `photon[k]` holds |e, 1_k> and `pair` is the symmetric
/// (2M x 2M) amplitude with |g, psi> = 2^{-1/2} sum psi_kq b_k^+ b_q^+ |0>.
struct SectorState {
  int excitations = 1;
  cplx qubit{0.0, 0.0};
  std::vector<cplx> photon;
  std::vector<cplx> pair;
  double nu_discrete = 1.0;  ///< normalization of the discretized two-photon state

  double norm() const;
  double excitation_probability() const;
  /// <N_r> and <N_r^2> of the right-to-left modes; <N_l> of the others.
  void photon_numbers(std::size_t modes, double& n_left, double& n_right, double& n_right_sq) const;
};

/// Discretized incoming Fock state (one or two photons, per spec.n_photons).
SectorState build_initial_state(const PulseSpec& spec, const DiscreteModel& disc);

/// Qubit excited, waveguide empty.
SectorState excited_qubit(const DiscreteModel& disc);

struct Sample {
  double t = 0.0;
  double excitation = 0.0;
  double n_left = 0.0;
  double n_right = 0.0;
  double n_right_sq = 0.0;
  double norm = 0.0;
};

struct Trajectory {
  std::vector<Sample> samples;
  SectorState final_state;  ///< Schroedinger picture at the last grid time
  double final_time = 0.0;
  double max_norm_drift = 0.0;
  double max_excitation_drift = 0.0;  ///< |N_l + N_r + P - N_ex(0)|
};

struct PropagateOptions {
  std::size_t record_every = 1;
  double max_norm_drift = 1e-6;  ///< larger drift raises NumericalFailure
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// RK4 in the interaction picture of the free photon Hamiltonian (exact
/// free phases). The state is never renormalized.
Trajectory propagate(SectorState state, const DiscreteModel& disc, const ModelParams& params,
                     const TimeGrid& grid, const PropagateOptions& options = {});

/// max |<0|sigma_-(t1) sigma_-(t2)|2>| over emission times in [0, t],
/// recovered from the right-moving two-photon wavefunction at time t on a
/// position grid of spacing dx.
double max_pair_emission_amplitude(const SectorState& state, double t, const DiscreteModel& disc,
                                   const ModelParams& params, double dx);

}  // namespace waveqed::oracle
