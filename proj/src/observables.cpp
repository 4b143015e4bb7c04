#include "waveqed/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace waveqed {

namespace {

constexpr cplx kI{0.0, 1.0};

/// 4-point Lagrange interpolation of node values on t_k = k dt. Values
/// before t = 0 are zero.
template <class T>
T interpolate(const std::vector<T>& y, double dt, double t) {
  if (t <= 0.0) return T{};
  const auto last = static_cast<std::ptrdiff_t>(y.size()) - 1;
  const double u = t / dt;
  if (u > static_cast<double>(last) * (1.0 + 1e-12) + 1e-9) {
    throw UsageError("time " + std::to_string(t) + " is past the end of the correlator tables");
  }
  auto i = static_cast<std::ptrdiff_t>(std::floor(u));
  i = std::clamp<std::ptrdiff_t>(i, 0, last - 1);
  std::ptrdiff_t first = std::min(i - 1, last - 3);
  auto at = [&](std::ptrdiff_t k) { return k < 0 ? T{} : y[static_cast<std::size_t>(k)]; };
  T sum{};
  for (std::ptrdiff_t a = first; a < first + 4; ++a) {
    double weight = 1.0;
    for (std::ptrdiff_t b = first; b < first + 4; ++b) {
      if (b != a) weight *= (u - static_cast<double>(b)) / static_cast<double>(a - b);
    }
    sum += weight * at(a);
  }
  return sum;
}

/// Samples h_m of a tau integrand on the lattice tau = m dtau, m = lo..hi,
/// trapezoid weights folded in.
struct TauSeries {
  double step = 0.0;
  std::ptrdiff_t lo = 0;
  std::ptrdiff_t hi = -1;
  std::vector<cplx> h;

  bool empty() const { return hi < lo; }

  /// sum_m h_m exp(i k tau_m)
  cplx transform(double k) const {
    if (empty()) return {0.0, 0.0};
    cplx phase = std::polar(1.0, k * step * static_cast<double>(lo));
    const cplx rot = std::polar(1.0, k * step);
    cplx sum{0.0, 0.0};
    for (const cplx& v : h) {
      sum += v * phase;
      phase *= rot;
    }
    return sum;
  }
};

template <class F>
TauSeries sample_series(double step, std::ptrdiff_t lo, std::ptrdiff_t hi, F&& integrand) {
  TauSeries s;
  s.step = step;
  s.lo = lo;
  s.hi = hi;
  if (hi < lo) return s;
  s.h.resize(static_cast<std::size_t>(hi - lo + 1));
  for (std::ptrdiff_t m = lo; m <= hi; ++m) {
    const double weight = (m == lo || m == hi) ? 0.5 * step : step;
    s.h[static_cast<std::size_t>(m - lo)] = (hi == lo ? 0.0 : weight) * integrand(step * static_cast<double>(m));
  }
  return s;
}

std::ptrdiff_t ceil_count(double span, double step) {
  if (span <= 0.0) return 0;
  return static_cast<std::ptrdiff_t>(std::ceil(span / step - 1e-9));
}

/// Scattered parts of f_l (x > 0) or f_r (x < 0) at one position. The G term
/// is (Gamma / 4 pi) sum h_m e^{i p v tau_m}; the interference term (f_l
/// only) enters as 2 Re of its transform.
struct PositionSeries {
  TauSeries correlation;
  TauSeries interference;

  double value(double p, double v, double& residue) const {
    const cplx gsum = correlation.transform(p * v);
    const cplx jsum = interference.transform(p * v);
    residue = std::max(residue, std::abs(gsum.imag()));
    return gsum.real() + 2.0 * jsum.real();
  }
  std::ptrdiff_t span() const {
    std::ptrdiff_t s = 0;
    if (!correlation.empty()) s = std::max({s, -correlation.lo, correlation.hi});
    if (!interference.empty()) s = std::max({s, -interference.lo, interference.hi});
    return s;
  }
  double step() const { return correlation.step > 0.0 ? correlation.step : interference.step; }
};

void require_correlation(const ScatteringTables& tables) {
  if (tables.correlation_table().values.empty()) {
    throw UsageError("phase-space quantities need the G table, which was not kept");
  }
}

PositionSeries transmitted_series(double x, double t, const ScatteringTables& tables) {
  PositionSeries out;
  if (!(x > 0.0)) return out;
  require_correlation(tables);
  const double v = tables.params().v_g;
  const double tp = t - x / v;
  const double window = 2.0 * x / v;
  const double target = 2.0 * tables.correlation_table().spacing;
  const std::ptrdiff_t n_up = std::max<std::ptrdiff_t>(ceil_count(window, target), 1);
  const double step = window / static_cast<double>(n_up);
  const std::ptrdiff_t n_back = ceil_count(2.0 * std::max(tp, 0.0), step);

  const double gamma_4pi = tables.params().gamma / (4.0 * kPi);
  const std::ptrdiff_t m_g = std::min(n_up, n_back);
  out.correlation = sample_series(step, -m_g, m_g, [&](double tau) {
    return gamma_4pi * tables.correlation(tp - 0.5 * tau, tp + 0.5 * tau);
  });
  const cplx coupling = -kI * tables.params().coupling() / (2.0 * kPi);
  out.interference = sample_series(step, -n_back, n_up, [&](double tau) {
    return coupling * tables.interference(tp - 0.5 * tau, tp + 0.5 * tau);
  });
  return out;
}

PositionSeries reflected_series(double x, double t, const ScatteringTables& tables) {
  PositionSeries out;
  if (!(x < 0.0)) return out;
  require_correlation(tables);
  const double v = tables.params().v_g;
  const double tp = t + x / v;
  const double window = -2.0 * x / v;
  const double target = 2.0 * tables.correlation_table().spacing;
  const std::ptrdiff_t n_up = std::max<std::ptrdiff_t>(ceil_count(window, target), 1);
  const double step = window / static_cast<double>(n_up);
  const std::ptrdiff_t m_g = std::min(n_up, ceil_count(2.0 * std::max(tp, 0.0), step));
  const double gamma_4pi = tables.params().gamma / (4.0 * kPi);
  out.correlation = sample_series(step, -m_g, m_g, [&](double tau) {
    return gamma_4pi * tables.correlation(tp + 0.5 * tau, tp - 0.5 * tau);
  });
  return out;
}

void check_snapshot(double t, const ScatteringTables& tables) {
  if (t < 0.0) throw UsageError("snapshot time must be nonnegative");
  if (t > tables.grid().t_max() * (1.0 + 1e-12)) {
    throw UsageError("snapshot time " + std::to_string(t) + " is past the end of the tables (" +
                     std::to_string(tables.grid().t_max()) + ")");
  }
}

/// Momentum integral over one period [-pi/(v dtau), pi/(v dtau)) of the
/// lattice transform. Enough points that no lattice offset aliases onto zero
/// and the free Gaussian is resolved.
double band_integral(const PositionSeries& s, double x, double t, const ScatteringTables& tables,
                     bool transmitted) {
  const double v = tables.params().v_g;
  const double w = tables.initial().spec().w;
  const double step = s.step();
  if (!(step > 0.0)) return 0.0;
  const double p_max = kPi / (v * step);
  std::size_t count = static_cast<std::size_t>(2 * s.span() + 2);
  count = std::max<std::size_t>({count, 64, static_cast<std::size_t>(std::ceil(8.0 * p_max * w)) + 1});
  const double dp = 2.0 * p_max / static_cast<double>(count);
  double residue = 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double p = -p_max + dp * static_cast<double>(j);
    double f = s.value(p, v, residue);
    if (transmitted) f += tables.initial().phase_space(x, p, t);
    sum += dp * f;
  }
  return sum;
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

}  // namespace

ScatteringTables::ScatteringTables(const ModelParams& params, const PulseSpec& spec, const TimeGrid& grid)
    : params_(params), initial_(spec, params.v_g), grid_(grid) {}

ScatteringTables ScatteringTables::two_photon(const ModelParams& params, const PulseSpec& spec,
                                              const SinglePhotonAmps& singles,
                                              const EqualTimeSet& equal_time, TwoTimeSurfaces surfaces) {
  if (spec.n_photons != 2) throw UsageError("two-photon tables need a two-photon pulse spec");
  if (!(singles.grid == equal_time.grid) || !(surfaces.grid == equal_time.grid)) {
    throw UsageError("correlator stages were computed on different time grids");
  }
  ScatteringTables out(params, spec, equal_time.grid);
  out.excitation_ = equal_time.excitation;
  out.g_ = std::move(surfaces.g);
  out.d_ = std::move(surfaces.d);
  out.pairs_ = out.d_.values.empty() ? PairInfo::missing : PairInfo::table;
  const double nu = out.initial_.nu();
  out.channels_.push_back({false, nu, equal_time.s_beta});
  out.channels_.push_back({true, nu, equal_time.s_alpha});
  return out;
}

ScatteringTables ScatteringTables::single_photon(const ModelParams& params, const PulseSpec& spec,
                                                 const SinglePhotonAmps& singles, std::size_t stride) {
  if (spec.n_photons != 1) throw UsageError("single-photon tables need n_photons = 1");
  const TimeGrid& grid = singles.grid;
  if (stride == 0 || grid.steps % stride != 0) {
    throw ConfigError("decimation stride must divide the number of steps");
  }
  ScatteringTables out(params, spec, grid);
  out.excitation_.resize(grid.nodes());
  for (std::size_t k = 0; k < grid.nodes(); ++k) out.excitation_[k] = std::norm(singles.c_alpha[k]);
  const std::size_t nodes = grid.steps / stride + 1;
  out.g_ = TwoTimeTable{grid.dt * static_cast<double>(stride), TriangularTable(nodes)};
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      out.g_.values(j, k) = std::conj(singles.c_alpha[j * stride]) * singles.c_alpha[k * stride];
    }
  }
  out.pairs_ = PairInfo::none_possible;
  out.channels_.push_back({false, 1.0, singles.c_alpha});
  return out;
}

ScatteringTables ScatteringTables::fock(const ModelParams& params, const PulseSpec& spec,
                                        const FockChain& chain) {
  if (!chain.has_two_time()) throw UsageError("Fock tables need the chain's two-time tables");
  const auto n = static_cast<std::size_t>(chain.photons);
  PulseSpec identical = spec;
  identical.L = 0.0;
  identical.n_photons = chain.photons;
  ScatteringTables out(params, identical, chain.grid);
  out.excitation_ = chain.excitation[n - 1];
  out.g_ = chain.g[n - 1];
  if (n >= 2) out.d_ = chain.d[n - 1];
  if (n == 1) {
    out.pairs_ = PairInfo::none_possible;
  } else if (n == 2 && !out.d_.values.empty()) {
    out.pairs_ = PairInfo::table;
  } else {
    out.pairs_ = PairInfo::missing;
  }
  out.channels_.push_back({false, std::sqrt(static_cast<double>(n)), chain.lowering[n - 1]});
  return out;
}

double ScatteringTables::excitation(double t) const { return interpolate(excitation_, grid_.dt, t); }

cplx ScatteringTables::interference(double a, double b) const {
  if (b <= 0.0) return {0.0, 0.0};
  cplx sum{0.0, 0.0};
  for (const auto& c : channels_) {
    const cplx e = c.beta_envelope ? initial_.B(a) : initial_.A(a);
    sum += c.weight * std::conj(e) * interpolate(c.amplitude, grid_.dt, b);
  }
  return sum;
}

ScatteringTables compute_tables(const ModelParams& params, const PulseSpec& spec, const TimeGrid& grid,
                                const TableOptions& options) {
  spec.validate();
  if (spec.n_photons == 1) {
    const auto singles = solve_single_photon(params, spec, grid);
    return ScatteringTables::single_photon(params, spec, singles, options.stride);
  }
  if (spec.n_photons == 2) {
    const auto singles = solve_single_photon(params, spec, grid);
    const auto equal_time = solve_equal_time(params, spec, grid, singles);
    TwoTimeOptions two;
    two.stride = options.stride;
    two.keep_g = options.keep_correlation;
    two.keep_d = options.keep_pair;
    two.threads = options.threads;
    auto surfaces = solve_two_time(params, spec, grid, singles, equal_time, two);
    return ScatteringTables::two_photon(params, spec, singles, equal_time, std::move(surfaces));
  }
  FockChainOptions chain_options;
  chain_options.all_levels = false;
  chain_options.stride = options.stride;
  chain_options.threads = options.threads;
  const auto chain = solve_fock_chain(params, spec, grid, spec.n_photons, chain_options);
  return ScatteringTables::fock(params, spec, chain);
}

double phase_space_l(double x, double p, double t, const ScatteringTables& tables) {
  check_snapshot(t, tables);
  double residue = 0.0;
  return tables.initial().phase_space(x, p, t) +
         transmitted_series(x, t, tables).value(p, tables.params().v_g, residue);
}

double phase_space_r(double x, double p, double t, const ScatteringTables& tables) {
  check_snapshot(t, tables);
  double residue = 0.0;
  return reflected_series(x, t, tables).value(p, tables.params().v_g, residue);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

PhaseSpaceField phase_space(const ScatteringTables& tables, double t, const std::vector<double>& x,
                            const std::vector<double>& p, unsigned threads) {
  check_snapshot(t, tables);
  PhaseSpaceField field;
  field.x = x;
  field.p = p;
  field.t = t;
  const std::size_t np = p.size();
  field.f_l.assign(x.size() * np, 0.0);
  field.f_r.assign(x.size() * np, 0.0);
  std::vector<double> residues(x.size(), 0.0);
  const double v = tables.params().v_g;

  detail::parallel_for(x.size(), threads, [&](std::size_t ix) {
    const double xi = x[ix];
    const PositionSeries l = transmitted_series(xi, t, tables);
    const PositionSeries r = reflected_series(xi, t, tables);
    double residue = 0.0;
    for (std::size_t ip = 0; ip < np; ++ip) {
      field.f_l[ix * np + ip] = tables.initial().phase_space(xi, p[ip], t) + l.value(p[ip], v, residue);
      field.f_r[ix * np + ip] = r.value(p[ip], v, residue);
    }
    residues[ix] = residue;
  });

  double peak = 0.0;
  for (double f : field.f_l) peak = std::max(peak, std::abs(f));
  for (double f : field.f_r) peak = std::max(peak, std::abs(f));
  const double residue = *std::max_element(residues.begin(), residues.end());
  field.max_imag_residue = peak > 0.0 ? residue / peak : residue;
  return field;
}

DensityPoint density(double x, double t, const ScatteringTables& tables) {
  check_snapshot(t, tables);
  DensityPoint out;
  if (x > 0.0) {
    out.rho_l = band_integral(transmitted_series(x, t, tables), x, t, tables, true);
  } else {
    out.rho_l = tables.initial().density(x, t);
    if (x < 0.0) out.rho_r = band_integral(reflected_series(x, t, tables), x, t, tables, false);
  }
  return out;
}

DensityPoint density(double x, double t, const ScatteringTables& tables, const MomentumGrid& grid) {
  check_snapshot(t, tables);
  const PositionSeries l = transmitted_series(x, t, tables);
  const PositionSeries r = reflected_series(x, t, tables);
  const double v = tables.params().v_g;
  double residue = 0.0;
  DensityPoint out;
  for (std::size_t j = 0; j < grid.points; ++j) {
    const double p = grid.at(j);
    out.rho_l += grid.weight(j) * (tables.initial().phase_space(x, p, t) + l.value(p, v, residue));
    out.rho_r += grid.weight(j) * r.value(p, v, residue);
  }
  return out;
}

DensityPoint density_shortcut(double x, double t, const ScatteringTables& tables) {
  check_snapshot(t, tables);
  const ModelParams& params = tables.params();
  const double v = params.v_g;
  DensityPoint out;
  out.rho_l = tables.initial().density(x, t);
  if (x > 0.0) {
    const double tp = t - x / v;
    out.rho_l += 0.5 * params.gamma / v * tables.excitation(tp) +
                 2.0 * (-kI * (params.coupling() / v) * tables.interference(tp, tp)).real();
  } else if (x < 0.0) {
    out.rho_r = 0.5 * params.gamma / v * tables.excitation(t + x / v);
  }
  return out;
}

PhotonCounts count_photons(double t, const ScatteringTables& tables, double x_extent, double dx) {
  check_snapshot(t, tables);
  if (!(x_extent > 0.0) || !(dx > 0.0)) throw UsageError("count_photons needs positive extent and step");
  const auto n = static_cast<std::size_t>(std::ceil(x_extent / dx));
  const double h = x_extent / static_cast<double>(n);
  const ModelParams& params = tables.params();
  const double v = params.v_g;
  const double half_gamma = 0.5 * params.gamma / v;
  PhotonCounts out;
  // Both half-lines end at the qubit, where rho_l and rho_r jump; the x = 0
  // node takes the one-sided limits.
  for (std::size_t i = 0; i <= n; ++i) {
    const double weight = (i == 0 || i == n) ? 0.5 * h : h;
    const double x = h * static_cast<double>(i);
    const double tp = t - x / v;
    out.n_left += weight * (tables.initial().density(-x, t) + tables.initial().density(x, t) +
                            half_gamma * tables.excitation(tp) +
                            2.0 * (-kI * (params.coupling() / v) * tables.interference(tp, tp)).real());
    out.n_right += weight * half_gamma * tables.excitation(tp);
  }
  out.excitation = tables.excitation(t);
  return out;
}

double incoming_spectrum(double omega, const InitialState& initial) {
  const PulseSpec& spec = initial.spec();
  const double p = omega / initial.v_g();
  const double gauss = spec.w / std::sqrt(kPi) * std::exp(-p * p * spec.w * spec.w);
  if (spec.n_photons != 2) return spec.n_photons * gauss;
  const double nu2 = initial.nu() * initial.nu();
  return nu2 * gauss * (2.0 + 2.0 * (initial.chi() * std::polar(1.0, -p * spec.L)).real());
}

SpectrumCurve spectrum(const ScatteringTables& tables, double t_late, const std::vector<double>& omega,
                       const std::vector<double>& x, unsigned threads) {
  check_snapshot(t_late, tables);
  const ModelParams& params = tables.params();
  const PulseSpec& spec = tables.initial().spec();
  const double v = params.v_g;
  SpectrumCurve out;
  out.omega = omega;
  out.t = t_late;
  const std::size_t nw = omega.size();
  std::vector<double> fl(x.size() * nw, 0.0), fr(x.size() * nw, 0.0);
  detail::parallel_for(x.size(), threads, [&](std::size_t ix) {
    const PositionSeries l = transmitted_series(x[ix], t_late, tables);
    const PositionSeries r = reflected_series(x[ix], t_late, tables);
    double residue = 0.0;
    for (std::size_t iw = 0; iw < nw; ++iw) {
      const double p = omega[iw] / v;
      fl[ix * nw + iw] = tables.initial().phase_space(x[ix], p, t_late) + l.value(p, v, residue);
      fr[ix * nw + iw] = r.value(-p, v, residue);
    }
  });
  const auto weights = trapezoid_weights(x);
  out.n_l.assign(nw, 0.0);
  out.n_r.assign(nw, 0.0);
  for (std::size_t ix = 0; ix < x.size(); ++ix) {
    for (std::size_t iw = 0; iw < nw; ++iw) {
      out.n_l[iw] += weights[ix] * fl[ix * nw + iw];
      out.n_r[iw] += weights[ix] * fr[ix * nw + iw];
    }
  }

  const double transit = (std::abs(spec.x0) + spec.L + 6.0 * spec.w) / v;
  const double decay = params.gamma > 0.0 ? 5.0 / params.gamma : 0.0;
  double peak = 0.0;
  for (double p : tables.excitation_nodes()) peak = std::max(peak, p);
  const double left_over = tables.excitation(t_late);
  if (t_late < transit + decay || left_over > 1e-4 * std::max(peak, 1e-300)) {
    out.late_enough = false;
    out.warnings.push_back("snapshot time " + std::to_string(t_late) +
                           " is too early: the qubit still holds excitation or the pulse has not passed");
  }
  if (!x.empty()) {
    const double reach = std::abs(spec.x0) + spec.L + v * t_late;
    if (x.front() > -reach + 6.0 * spec.w || x.back() < reach - 6.0 * spec.w) {
      out.warnings.push_back("position grid does not cover the outgoing pulses");
    }
  }
  return out;
}

double fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw UsageError("fwhm needs matching samples");
  const auto top = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = 0.5 * y[top];
  auto crossing = [&](std::size_t a, std::size_t b) {
    return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
  };
  std::size_t i = top;
  while (i > 0 && y[i - 1] > half) --i;
  if (i == 0) return std::numeric_limits<double>::quiet_NaN();
  const double left = crossing(i - 1, i);
  std::size_t j = top;
  while (j + 1 < y.size() && y[j + 1] > half) ++j;
  if (j + 1 == y.size()) return std::numeric_limits<double>::quiet_NaN();
  const double right = crossing(j, j + 1);
  return right - left;
}

namespace {

double pair_integral(const TwoTimeTable& d) {
  const std::size_t nodes = d.nodes();
  double sum = 0.0;
  for (std::size_t j = 1; j < nodes; ++j) {
    const double wj = (j + 1 == nodes) ? 0.5 : 1.0;
    for (std::size_t k = 0; k < j; ++k) {
      const double wk = (k == 0) ? 0.5 : 1.0;
      sum += wj * wk * std::norm(d.values(j, k));
    }
  }
  return 2.0 * sum * d.spacing * d.spacing;
}

PhotonStats finish_stats(const std::vector<double>& p, const TimeGrid& grid, double gamma, int photons,
                         const TwoTimeTable* pairs, bool pairs_possible) {
  PhotonStats s;
  double integral = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    integral += ((k == 0 || k + 1 == p.size()) ? 0.5 : 1.0) * p[k];
  }
  integral *= grid.dt;
  s.n_right = 0.5 * gamma * integral;
  s.final_excitation = p.back();
  s.n_left = photons - s.n_right - s.final_excitation;
  if (pairs_possible && pairs == nullptr) {
    s.n_right_sq = s.n_right;
  } else if (pairs != nullptr) {
    s.n_right_sq = 0.25 * gamma * gamma * pair_integral(*pairs) + s.n_right;
  } else {
    s.has_second_moment = false;
    s.n_right_sq = std::numeric_limits<double>::quiet_NaN();
    s.warnings.push_back("second moment needs the pair emission table (n <= 2)");
  }
  s.var_right = s.n_right_sq - s.n_right * s.n_right;
  s.var_left = s.var_right;
  if (s.final_excitation > 1e-4) {
    s.warnings.push_back("pulse not fully scattered: P(t_max) = " + std::to_string(s.final_excitation));
  }
  return s;
}

}  // namespace

PhotonStats photon_stats(const ScatteringTables& tables) {
  const TwoTimeTable* pairs = tables.has_pair_table() && tables.pairs_usable() ? &tables.pair_table() : nullptr;
  return finish_stats(tables.excitation_nodes(), tables.grid(), tables.params().gamma, tables.photons(), pairs,
                      tables.pairs_impossible());
}

PhotonStats fock_stats(const FockChain& chain, const ModelParams& params) {
  if (chain.photons < 1) throw UsageError("empty Fock chain");
  const auto n = static_cast<std::size_t>(chain.photons);
  const TwoTimeTable* pairs = nullptr;
  if (n == 2 && chain.d.size() == 2 && !chain.d[1].values.empty()) pairs = &chain.d[1];
  return finish_stats(chain.excitation[n - 1], chain.grid, params.gamma, chain.photons, pairs, n == 1);
}

}  // namespace waveqed
