#include "waveqed/correlators.hpp"

#include <array>
#include <cmath>
#include <string>

#include "parallel.hpp"
#include "rk4.hpp"

namespace waveqed {

namespace {

constexpr cplx kI{0.0, 1.0};

/// Complex qubit rate i Delta + Gamma / 2.
cplx qubit_rate(const ModelParams& params) { return {0.5 * params.gamma, params.delta}; }

void check_inputs(const ModelParams& params, const PulseSpec& spec, const TimeGrid& grid) {
  params.validate();
  spec.validate();
  check_step(grid, params, spec);
}

void check_stride(const TimeGrid& grid, std::size_t stride) {
  if (stride == 0 || grid.steps % stride != 0) {
    throw ConfigError("decimation stride " + std::to_string(stride) +
                      " must be positive and divide the number of steps (" +
                      std::to_string(grid.steps) + ")");
  }
}

TwoTimeTable make_table(const TimeGrid& grid, std::size_t stride) {
  return TwoTimeTable{grid.dt * static_cast<double>(stride), TriangularTable(grid.steps / stride + 1)};
}

}  // namespace

cplx TwoTimeTable::sample_hermitian(double a, double b) const {
  if (a < 0.0 || b < 0.0) return {0.0, 0.0};
  const double end = t_max();
  const double slack = 1e-9 * spacing;
  if (a > end + slack || b > end + slack) {
    throw UsageError("two-time table sampled at t = " + std::to_string(std::max(a, b)) +
                     " beyond its end " + std::to_string(end));
  }
  if (a < b) return std::conj(sample_hermitian(b, a));

  // Interpolate in (t', t - t') so that no stencil reaches across the
  // diagonal, where the correlators have a kink.
  using idx = std::ptrdiff_t;
  const idx last = static_cast<idx>(nodes()) - 1;
  const double s = std::min(b, end) / spacing;
  const double u = std::max(std::min(a, end) - std::min(b, end), 0.0) / spacing;
  auto at = [&](idx k, idx m) { return values(static_cast<std::size_t>(k + m), static_cast<std::size_t>(k)); };
  idx k0 = static_cast<idx>(s);
  idx u0 = static_cast<idx>(u);

  const idx kc = std::max<idx>(k0 - 1, 0);
  const idx uc = std::max<idx>(u0 - 1, 0);
  if (kc + uc + 6 <= last) {
    double wk[4], wu[4];
    for (int i = 0; i < 4; ++i) {
      wk[i] = 1.0;
      wu[i] = 1.0;
      for (int j = 0; j < 4; ++j) {
        if (j == i) continue;
        wk[i] *= (s - static_cast<double>(kc + j)) / static_cast<double>(i - j);
        wu[i] *= (u - static_cast<double>(uc + j)) / static_cast<double>(i - j);
      }
    }
    cplx sum{0.0, 0.0};
    for (int i = 0; i < 4; ++i) {
      cplx row{0.0, 0.0};
      for (int j = 0; j < 4; ++j) row += wu[j] * at(kc + i, uc + j);
      sum += wk[i] * row;
    }
    return sum;
  }

  // close to t_max: linear on the triangles of the (t', t - t') lattice
  if (k0 + u0 >= last) return at(std::max<idx>(last - u0, 0), std::min(u0, last));
  double fs = s - static_cast<double>(k0);
  double fu = u - static_cast<double>(u0);
  if (fs + fu > 1.0 && k0 + u0 + 1 >= last) {
    // past the t = t_max edge by roundoff; the upper triangle is not stored
    fs /= fs + fu;
    fu = 1.0 - fs;
  }
  if (fs + fu <= 1.0) {
    return (1.0 - fs - fu) * at(k0, u0) + fs * at(k0 + 1, u0) + fu * at(k0, u0 + 1);
  }
  return (fs + fu - 1.0) * at(k0 + 1, u0 + 1) + (1.0 - fu) * at(k0 + 1, u0) + (1.0 - fs) * at(k0, u0 + 1);
}

std::size_t two_time_bytes(std::size_t nodes, std::size_t tables) {
  return tables * nodes * (nodes + 1) / 2 * sizeof(cplx);
}

SinglePhotonAmps solve_single_photon(const ModelParams& params, const PulseSpec& spec,
                                     const TimeGrid& grid) {
  check_inputs(params, spec, grid);
  const InitialState initial(spec, params.v_g);
  const detail::HalfStepEnvelopes env(initial, grid);
  const double g = params.coupling();
  const cplx eps = qubit_rate(params);

  using State = std::array<cplx, 2>;
  auto rhs = [&](std::size_t i, const State& s, State& ds) {
    ds[0] = -eps * s[0] - kI * g * env.a[i];
    ds[1] = -eps * s[1] - kI * g * env.b[i];
  };

  SinglePhotonAmps out{grid, std::vector<cplx>(grid.nodes()), std::vector<cplx>(grid.nodes())};
  State y{};
  detail::Rk4Workspace<State> ws(y);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    ws.step(y, k, grid.dt, rhs);
    out.c_alpha[k + 1] = y[0];
    out.c_beta[k + 1] = y[1];
  }
  return out;
}

EqualTimeSet solve_equal_time(const ModelParams& params, const PulseSpec& spec,
                              const TimeGrid& grid, const SinglePhotonAmps& singles) {
  check_inputs(params, spec, grid);
  if (!(singles.grid == grid) || singles.c_alpha.size() != grid.nodes() ||
      singles.c_beta.size() != grid.nodes()) {
    throw UsageError("single-photon amplitudes were computed on a different time grid");
  }
  const InitialState initial(spec, params.v_g);
  const detail::HalfStepEnvelopes env(initial, grid);
  const double g = params.coupling();
  const double gamma = params.gamma;
  const cplx eps = qubit_rate(params);
  const double nu = initial.nu();
  const cplx chi = initial.chi();

  // [C_alpha, C_beta, P, S_alpha, S_beta]; the single-photon amplitudes ride
  // along so their half-step values are available to the nonlinear terms.
  using State = std::array<cplx, 5>;
  auto rhs = [&](std::size_t i, const State& s, State& ds) {
    const cplx a = env.a[i];
    const cplx b = env.b[i];
    ds[0] = -eps * s[0] - kI * g * a;
    ds[1] = -eps * s[1] - kI * g * b;
    const cplx drive = kI * g * nu * (std::conj(a) * s[4] + std::conj(b) * s[3]);
    ds[2] = -gamma * s[2] + 2.0 * drive.real();
    const cplx absorbed = a * s[1] + b * s[0];
    ds[3] = -eps * s[3] + 2.0 * kI * g * nu * std::conj(s[0]) * absorbed - kI * g * nu * (chi * a + b);
    ds[4] = -eps * s[4] + 2.0 * kI * g * nu * std::conj(s[1]) * absorbed -
            kI * g * nu * (a + std::conj(chi) * b);
  };

  EqualTimeSet out{grid, std::vector<double>(grid.nodes(), 0.0), std::vector<cplx>(grid.nodes()),
                   std::vector<cplx>(grid.nodes())};
  State y{};
  detail::Rk4Workspace<State> ws(y);
  double drift = 0.0;
  for (std::size_t k = 0; k < grid.steps; ++k) {
    ws.step(y, k, grid.dt, rhs);
    out.excitation[k + 1] = y[2].real();
    out.s_alpha[k + 1] = y[3];
    out.s_beta[k + 1] = y[4];
    drift = std::max({drift, std::abs(y[0] - singles.c_alpha[k + 1]),
                      std::abs(y[1] - singles.c_beta[k + 1])});
  }
  if (drift > 1e-9) {
    throw UsageError("single-photon amplitudes do not belong to these parameters (deviation " +
                     std::to_string(drift) + ")");
  }
  return out;
}

TwoTimeSurfaces solve_two_time(const ModelParams& params, const PulseSpec& spec,
                               const TimeGrid& grid, const SinglePhotonAmps& singles,
                               const EqualTimeSet& equal_time, const TwoTimeOptions& options) {
  check_inputs(params, spec, grid);
  check_stride(grid, options.stride);
  if (!(singles.grid == grid) || !(equal_time.grid == grid)) {
    throw UsageError("two-time solver inputs were computed on a different time grid");
  }
  const InitialState initial(spec, params.v_g);
  const detail::HalfStepEnvelopes env(initial, grid);
  const double g = params.coupling();
  const cplx eps = qubit_rate(params);
  const double nu = initial.nu();
  const std::size_t stride = options.stride;

  TwoTimeSurfaces out;
  out.grid = grid;
  out.stride = stride;
  if (options.keep_g) out.g = make_table(grid, stride);
  if (options.keep_d) out.d = make_table(grid, stride);

  // Column t' = t_k, integrated forward in t from t_k.
  auto column = [&](std::size_t col) {
    const std::size_t k = col * stride;
    const cplx ca = singles.c_alpha[k];
    const cplx cb = singles.c_beta[k];
    const cplx sa = equal_time.s_alpha[k];
    const cplx sb = equal_time.s_beta[k];

    // [C_alpha(t), C_beta(t), D(t, t'), G(t, t')]
    using State = std::array<cplx, 4>;
    auto rhs = [&](std::size_t i, const State& s, State& ds) {
      const cplx a = env.a[i];
      const cplx b = env.b[i];
      ds[0] = -eps * s[0] - kI * g * a;
      ds[1] = -eps * s[1] - kI * g * b;
      ds[2] = -eps * s[2] - kI * g * nu * (a * cb + b * ca);
      ds[3] = -std::conj(eps) * s[3] + kI * g * nu * (std::conj(a) * sb + std::conj(b) * sa) -
              2.0 * kI * g * nu * (std::conj(a) * std::conj(s[1]) + std::conj(b) * std::conj(s[0])) * s[2];
    };

    State y{ca, cb, cplx{0.0, 0.0}, cplx{equal_time.excitation[k], 0.0}};
    if (options.keep_g) out.g.values(col, col) = y[3];
    if (options.keep_d) out.d.values(col, col) = y[2];
    detail::Rk4Workspace<State> ws(y);
    for (std::size_t j = k; j < grid.steps; ++j) {
      ws.step(y, j, grid.dt, rhs);
      if ((j + 1) % stride == 0) {
        const std::size_t row = (j + 1) / stride;
        if (options.keep_g) out.g.values(row, col) = y[3];
        if (options.keep_d) out.d.values(row, col) = y[2];
      }
    }
  };
  detail::parallel_for(grid.steps / stride + 1, options.threads, column);
  return out;
}

FockChain solve_fock_chain(const ModelParams& params, const PulseSpec& spec, const TimeGrid& grid,
                           int photons, const FockChainOptions& options) {
  if (photons < 1) throw ConfigError("the Fock chain needs at least one photon");
  PulseSpec identical = spec;
  identical.L = 0.0;
  identical.n_photons = photons;
  check_inputs(params, identical, grid);
  check_stride(grid, options.stride);

  const InitialState initial(identical, params.v_g);
  const detail::HalfStepEnvelopes env(initial, grid);
  const double g = params.coupling();
  const double gamma = params.gamma;
  const cplx eps = qubit_rate(params);
  const auto n = static_cast<std::size_t>(photons);
  std::vector<double> root(n + 1);
  for (std::size_t m = 0; m <= n; ++m) root[m] = std::sqrt(static_cast<double>(m));

  FockChain out;
  out.grid = grid;
  out.photons = photons;
  out.stride = options.stride;
  out.excitation.assign(n, std::vector<double>(grid.nodes(), 0.0));
  out.lowering.assign(n, std::vector<cplx>(grid.nodes(), cplx{0.0, 0.0}));

  // Equal-time chain: [C, P_2..P_n, S_2..S_n]. Level 1 is closed:
  // P_1 = |C|^2 and S_1 = C.
  auto p_at = [](std::size_t m) { return 1 + (m - 2); };
  auto s_at = [n](std::size_t m) { return n + (m - 2); };
  auto equal_rhs = [&](std::size_t i, const std::vector<cplx>& s, std::vector<cplx>& ds) {
    const cplx a = env.a[i];
    ds[0] = -eps * s[0] - kI * g * a;
    for (std::size_t m = 2; m <= n; ++m) {
      const double below = (m == 2) ? std::norm(s[0]) : s[p_at(m - 1)].real();
      const cplx sm = s[s_at(m)];
      ds[p_at(m)] = -gamma * s[p_at(m)] + 2.0 * (kI * g * root[m] * std::conj(a) * sm).real();
      ds[s_at(m)] = -eps * sm + 2.0 * kI * g * root[m] * a * below - kI * g * root[m] * a;
    }
  };

  std::vector<cplx> y(1 + 2 * (n - 1), cplx{0.0, 0.0});
  detail::Rk4Workspace<std::vector<cplx>> ws(y);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    ws.step(y, k, grid.dt, equal_rhs);
    out.excitation[0][k + 1] = std::norm(y[0]);
    out.lowering[0][k + 1] = y[0];
    for (std::size_t m = 2; m <= n; ++m) {
      out.excitation[m - 1][k + 1] = y[p_at(m)].real();
      out.lowering[m - 1][k + 1] = y[s_at(m)];
    }
  }
  if (!options.two_time) return out;

  const std::size_t stride = options.stride;
  out.g.resize(n);
  out.k.resize(n);
  out.d.resize(n);
  for (std::size_t m = 1; m <= n; ++m) {
    const bool keep = options.all_levels || m == n;
    if (keep) out.g[m - 1] = make_table(grid, stride);
    if (keep && m >= 2) {
      out.d[m - 1] = make_table(grid, stride);
      if (options.all_levels) out.k[m - 1] = make_table(grid, stride);
    }
  }

  // Two-time chain per column t' = t_k: [C(t), (G_m, K_m, D_m) for m = 2..n].
  // G_1 = C^*(t) C(t') and K_1 = 0 close the bottom level.
  auto g_at = [](std::size_t m) { return 1 + 3 * (m - 2); };
  auto k_at = [](std::size_t m) { return 2 + 3 * (m - 2); };
  auto d_at = [](std::size_t m) { return 3 + 3 * (m - 2); };
  auto column = [&](std::size_t col) {
    const std::size_t k = col * stride;
    const cplx c_frozen = out.lowering[0][k];
    auto rhs = [&](std::size_t i, const std::vector<cplx>& s, std::vector<cplx>& ds) {
      const cplx a = env.a[i];
      const cplx ac = std::conj(a);
      ds[0] = -eps * s[0] - kI * g * a;
      for (std::size_t m = 2; m <= n; ++m) {
        const cplx g_below = (m == 2) ? std::conj(s[0]) * c_frozen : s[g_at(m - 1)];
        const cplx k_below = (m == 2) ? cplx{0.0, 0.0} : s[k_at(m - 1)];
        const cplx s_below = out.lowering[m - 2][k];
        const cplx s_here = out.lowering[m - 1][k];
        const double r = root[m];
        ds[g_at(m)] = -std::conj(eps) * s[g_at(m)] - 2.0 * kI * g * r * ac * s[k_at(m)] +
                      kI * g * r * ac * s_here;
        ds[k_at(m)] = -gamma * s[k_at(m)] + kI * g * root[m - 1] * ac * s[d_at(m)] -
                      kI * g * r * a * g_below;
        ds[d_at(m)] = -eps * s[d_at(m)] + 2.0 * kI * g * r * a * k_below - kI * g * r * a * s_below;
      }
    };
    auto store = [&](std::size_t row, const std::vector<cplx>& s) {
      if (!out.g[0].values.empty()) out.g[0].values(row, col) = std::conj(s[0]) * c_frozen;
      for (std::size_t m = 2; m <= n; ++m) {
        if (!out.g[m - 1].values.empty()) out.g[m - 1].values(row, col) = s[g_at(m)];
        if (!out.k[m - 1].values.empty()) out.k[m - 1].values(row, col) = s[k_at(m)];
        if (!out.d[m - 1].values.empty()) out.d[m - 1].values(row, col) = s[d_at(m)];
      }
    };

    std::vector<cplx> s(1 + 3 * (n - 1), cplx{0.0, 0.0});
    s[0] = c_frozen;
    for (std::size_t m = 2; m <= n; ++m) s[g_at(m)] = out.excitation[m - 1][k];
    store(col, s);
    detail::Rk4Workspace<std::vector<cplx>> cws(s);
    for (std::size_t j = k; j < grid.steps; ++j) {
      cws.step(s, j, grid.dt, rhs);
      if ((j + 1) % stride == 0) store((j + 1) / stride, s);
    }
  };
  detail::parallel_for(grid.steps / stride + 1, options.threads, column);
  return out;
}

}  // namespace waveqed
