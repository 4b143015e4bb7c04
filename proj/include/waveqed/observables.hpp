// Phase-space distributions, densities, spectra and photon-number
// statistics of the scattered light, evaluated from correlator tables.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "waveqed/correlators.hpp"
#include "waveqed/model.hpp"

namespace waveqed {

/// One term of the field-qubit interference amplitude
/// J(a, b) = sum_c weight_c E_c(a)^* Y_c(b), with E_c = A or B.
struct InterferenceChannel {
  bool beta_envelope = false;
  cplx weight{1.0, 0.0};
  std::vector<cplx> amplitude;  ///< Y_c on the full time grid
};

/// Everything the observables need from a solved input state: P(t), the
/// two-time correlator G(t, t'), the interference amplitude J and, when
/// available, the pair emission amplitude D(t, t').
class ScatteringTables {
 public:
  static ScatteringTables two_photon(const ModelParams& params, const PulseSpec& spec,
                                     const SinglePhotonAmps& singles, const EqualTimeSet& equal_time,
                                     TwoTimeSurfaces surfaces);
  /// spec.n_photons must be 1. G = C^*(t) C(t') is tabulated on every stride-th node.
  static ScatteringTables single_photon(const ModelParams& params, const PulseSpec& spec,
                                        const SinglePhotonAmps& singles, std::size_t stride = 1);
  /// Uses the top level of the chain; needs its two-time tables.
  static ScatteringTables fock(const ModelParams& params, const PulseSpec& spec, const FockChain& chain);

  const ModelParams& params() const { return params_; }
  const InitialState& initial() const { return initial_; }
  const TimeGrid& grid() const { return grid_; }
  int photons() const { return initial_.photons(); }
  const std::vector<double>& excitation_nodes() const { return excitation_; }
  const TwoTimeTable& correlation_table() const { return g_; }
  bool has_pair_table() const { return !d_.values.empty(); }
  const TwoTimeTable& pair_table() const { return d_; }
  /// The pair table gives the second moment (two-photon input or n = 2 chain).
  bool pairs_usable() const { return pairs_ == PairInfo::table; }
  /// One photon: no pair emission, the second moment equals the mean.
  bool pairs_impossible() const { return pairs_ == PairInfo::none_possible; }

  /// P(t) by cubic interpolation; 0 for t < 0.
  double excitation(double t) const;
  /// G(a, b) on its Hermitian extension.
  cplx correlation(double a, double b) const { return g_.sample_hermitian(a, b); }
  /// J(a, b); 0 when b < 0.
  cplx interference(double a, double b) const;

 private:
  ScatteringTables(const ModelParams& params, const PulseSpec& spec, const TimeGrid& grid);

  enum class PairInfo { missing, table, none_possible };

  ModelParams params_;
  InitialState initial_;
  TimeGrid grid_;
  std::vector<double> excitation_;
  TwoTimeTable g_;
  TwoTimeTable d_;
  std::vector<InterferenceChannel> channels_;
  PairInfo pairs_ = PairInfo::missing;
};

struct TableOptions {
  std::size_t stride = 1;
  bool keep_correlation = true;  ///< G; every phase-space quantity needs it
  bool keep_pair = true;         ///< two-photon: keep D for the second moment
  unsigned threads = 0;
};

/// Runs the correlator pipeline that matches spec.n_photons (1, 2 or the
/// identical-wavepacket chain for n >= 3).
ScatteringTables compute_tables(const ModelParams& params, const PulseSpec& spec, const TimeGrid& grid,
                                const TableOptions& options = {});

double phase_space_l(double x, double p, double t, const ScatteringTables& tables);
double phase_space_r(double x, double p, double t, const ScatteringTables& tables);

struct PhaseSpaceField {
  std::vector<double> x;
  std::vector<double> p;
  double t = 0.0;
  std::vector<double> f_l;  ///< row-major, index ix * p.size() + ip
  std::vector<double> f_r;
  double max_imag_residue = 0.0;  ///< largest imaginary part discarded, relative to max |f|

  double l(std::size_t ix, std::size_t ip) const { return f_l[ix * p.size() + ip]; }
  double r(std::size_t ix, std::size_t ip) const { return f_r[ix * p.size() + ip]; }
};

/// Evaluates both distributions on a rectangular grid. Result does not depend
/// on the thread count.
PhaseSpaceField phase_space(const ScatteringTables& tables, double t, const std::vector<double>& x,
                            const std::vector<double>& p, unsigned threads = 0);

/// n uniformly spaced values on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct DensityPoint {
  double rho_l = 0.0;
  double rho_r = 0.0;
};

/// Momentum integral of the distributions by a periodic trapezoid rule whose
/// band [-pi/(v dtau), pi/(v dtau)) matches the tau sampling of the
/// distributions at this x, so no momentum tail is cut off.
DensityPoint density(double x, double t, const ScatteringTables& tables);
/// Trapezoid momentum integral over the given grid.
DensityPoint density(double x, double t, const ScatteringTables& tables, const MomentumGrid& grid);
/// Closed forms after the momentum integral collapses the tau integral.
DensityPoint density_shortcut(double x, double t, const ScatteringTables& tables);

struct PhotonCounts {
  double n_left = 0.0;   ///< int rho_l dx
  double n_right = 0.0;  ///< int rho_r dx
  double excitation = 0.0;
};

/// Photon numbers at time t by integrating the closed-form densities over
/// x in [-x_extent, x_extent], split at the qubit.
PhotonCounts count_photons(double t, const ScatteringTables& tables, double x_extent, double dx);

struct SpectrumCurve {
  std::vector<double> omega;  ///< omega - omega_0
  std::vector<double> n_l;
  std::vector<double> n_r;
  double t = 0.0;
  bool late_enough = true;
  std::vector<std::string> warnings;
};

/// n_l(w) = int dx f_l(x, w / v), n_r(w) = int dx f_r(x, -w / v).
SpectrumCurve spectrum(const ScatteringTables& tables, double t_late, const std::vector<double>& omega,
                       const std::vector<double>& x, unsigned threads = 0);

/// Spectral density of the incoming photons, n |alpha|^2-type closed form.
double incoming_spectrum(double omega, const InitialState& initial);

/// Full width at half maximum of a sampled curve (linear interpolation).
double fwhm(const std::vector<double>& x, const std::vector<double>& y);

struct PhotonStats {
  double n_right = 0.0;
  double n_left = 0.0;
  double n_right_sq = 0.0;
  double var_right = 0.0;
  double var_left = 0.0;
  double final_excitation = 0.0;
  bool has_second_moment = true;
  std::vector<std::string> warnings;
};

PhotonStats photon_stats(const ScatteringTables& tables);

/// Mean numbers from the top level of a Fock chain; the second moment is
/// available for n <= 2 (it needs D_n and a single intermediate state).
PhotonStats fock_stats(const FockChain& chain, const ModelParams& params);

}  // namespace waveqed
