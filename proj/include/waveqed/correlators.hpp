// Qubit matrix elements driven by Fock-state pulses: the closed ODE
// hierarchy for one- and two-photon inputs, the two-time surfaces needed by
// the phase-space distributions, and the n-photon chain for identical
// wavepackets.
//
// Every solver integrates with classical RK4 on a shared TimeGrid. Pulse
// envelopes are evaluated in closed form at the half steps; amplitudes that
// a later stage needs at half steps are integrated alongside it so that the
// re-integrated values coincide bit for bit with the stored ones.
#pragma once

#include <cstddef>
#include <vector>

#include "waveqed/model.hpp"

namespace waveqed {

/// Dense lower-triangular table T(j, k), j >= k, row-major.
class TriangularTable {
 public:
  TriangularTable() = default;
  explicit TriangularTable(std::size_t nodes)
      : nodes_(nodes), data_(nodes * (nodes + 1) / 2, cplx{0.0, 0.0}) {}

  std::size_t nodes() const { return nodes_; }
  bool empty() const { return nodes_ == 0; }

  cplx& operator()(std::size_t j, std::size_t k) { return data_[index(j, k)]; }
  const cplx& operator()(std::size_t j, std::size_t k) const { return data_[index(j, k)]; }

  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }

 private:
  static std::size_t index(std::size_t j, std::size_t k) { return j * (j + 1) / 2 + k; }

  std::size_t nodes_ = 0;
  std::vector<cplx> data_;
};

/// Two-time table on every `stride`-th node of a TimeGrid.
struct TwoTimeTable {
  double spacing = 0.0;  ///< time between stored nodes (stride * dt)
  TriangularTable values;

  std::size_t nodes() const { return values.nodes(); }
  double t_max() const { return spacing * static_cast<double>(nodes() - 1); }

  /// Hermitian extension G(t_j, t_k) = G(t_k, t_j)^*.
  cplx hermitian(std::size_t j, std::size_t k) const {
    return j >= k ? values(j, k) : std::conj(values(k, j));
  }

  /// Hermitian extension at arbitrary times: cubic in (t', t - t') with
  /// one-sided stencils at the diagonal, linear within a few nodes of t_max.
  /// Times below zero give 0; times past t_max throw UsageError.
  cplx sample_hermitian(double a, double b) const;
};

/// C_alpha(t) = <0|sigma_-(t)|1_alpha>, C_beta likewise.
struct SinglePhotonAmps {
  TimeGrid grid;
  std::vector<cplx> c_alpha;
  std::vector<cplx> c_beta;
};

/// Equal-time two-photon quantities: P = <sigma_+ sigma_->, S_alpha =
/// <1_alpha|sigma_-|2>, S_beta = <1_beta|sigma_-|2>.
struct EqualTimeSet {
  TimeGrid grid;
  std::vector<double> excitation;
  std::vector<cplx> s_alpha;
  std::vector<cplx> s_beta;
};

/// G(t, t') = <sigma_+(t) sigma_-(t')> and D(t, t') = <0|sigma_-(t)
/// sigma_-(t')|2> for t >= t'.
struct TwoTimeSurfaces {
  TimeGrid grid;
  std::size_t stride = 1;
  TwoTimeTable g;
  TwoTimeTable d;
};

struct TwoTimeOptions {
  std::size_t stride = 1;  ///< keep every stride-th node in both time directions
  bool keep_g = true;
  bool keep_d = true;
  unsigned threads = 0;    ///< 0 = hardware concurrency
};

/// Matrix elements of the identical-wavepacket n-photon chain. Level m (1-based)
/// is stored at index m - 1.
struct FockChain {
  TimeGrid grid;
  int photons = 0;
  std::size_t stride = 1;
  std::vector<std::vector<double>> excitation;  ///< P_m = <m|sigma_+ sigma_-|m>
  std::vector<std::vector<cplx>> lowering;      ///< S_m = <m-1|sigma_-|m>
  std::vector<TwoTimeTable> g;  ///< G_m = <m|sigma_+(t) sigma_-(t')|m>
  std::vector<TwoTimeTable> k;  ///< K_m = <m-1|sigma_+(t) sigma_-(t) sigma_-(t')|m>
  std::vector<TwoTimeTable> d;  ///< D_m = <m-2|sigma_-(t) sigma_-(t')|m>

  /// X_m = <m-1|sigma_+(t) sigma_-(t')|m-1>, which is G_{m-1}.
  const TwoTimeTable& x(int m) const { return g.at(static_cast<std::size_t>(m - 2)); }
  bool has_two_time() const { return !g.empty(); }
};

struct FockChainOptions {
  bool two_time = true;
  bool all_levels = true;  ///< false keeps only the G and D tables of level n
  std::size_t stride = 1;
  unsigned threads = 0;
};

SinglePhotonAmps solve_single_photon(const ModelParams& params, const PulseSpec& spec,
                                     const TimeGrid& grid);

EqualTimeSet solve_equal_time(const ModelParams& params, const PulseSpec& spec,
                              const TimeGrid& grid, const SinglePhotonAmps& singles);

TwoTimeSurfaces solve_two_time(const ModelParams& params, const PulseSpec& spec,
                               const TimeGrid& grid, const SinglePhotonAmps& singles,
                               const EqualTimeSet& equal_time, const TwoTimeOptions& options = {});

FockChain solve_fock_chain(const ModelParams& params, const PulseSpec& spec, const TimeGrid& grid,
                           int photons, const FockChainOptions& options = {});

/// Bytes needed by `tables` triangular tables on `nodes` nodes.
std::size_t two_time_bytes(std::size_t nodes, std::size_t tables);

}  // namespace waveqed
