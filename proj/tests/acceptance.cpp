// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "waveqed/observables.hpp"
#include "waveqed/oracle.hpp"

using namespace waveqed;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail, Clock::time_point start) {
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s %s: %s [%.1f s]\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

PulseSpec pulse(double L, int n = 2) {
  PulseSpec s;
  s.w = 1.0;
  s.x0 = -10.0;
  s.L = L;
  s.n_photons = n;
  return s;
}

ModelParams model(double gamma) {
  ModelParams p;
  p.gamma = gamma;
  return p;
}

TimeGrid default_grid(const ModelParams& p, const PulseSpec& s, double t_max) {
  return TimeGrid::covering(t_max, TimeGrid::default_step(p, s));
}

double settle_time(const ModelParams& p, const PulseSpec& s, double decay_lengths) {
  return (std::abs(s.x0) + s.L + 6.0 * s.w) / p.v_g + decay_lengths / p.gamma;
}

PhotonStats stats_for(const ModelParams& p, const PulseSpec& s, std::size_t stride = 1) {
  TableOptions o;
  o.keep_correlation = false;
  o.stride = stride;
  TimeGrid g = default_grid(p, s, settle_time(p, s, 20.0));
  if (g.steps % stride) g = TimeGrid{g.t_max() / static_cast<double>(g.steps + stride - g.steps % stride),
                                     g.steps + stride - g.steps % stride};
  return photon_stats(compute_tables(p, s, g, o));
}

void conservation() {
  const auto start = Clock::now();
  bool pass = true;
  double worst = 0.0;
  double slowest = 0.0;
  for (double L : {0.0, 2.0, 5.0}) {
    const auto cell = Clock::now();
    const ModelParams p = model(1.0);
    const PulseSpec s = pulse(L);
    const double end = std::abs(s.x0) + s.L + 10.0 * s.w;
    TableOptions o;
    o.keep_pair = false;
    const auto tb = compute_tables(p, s, default_grid(p, s, end), o);
    for (double t : linspace(0.0, end, 5)) {
      const PhotonCounts c = count_photons(t, tb, std::abs(s.x0) + L + 8.0 + t, 0.01);
      worst = std::max(worst, std::abs(c.n_left + c.n_right + c.excitation - 2.0) / 2.0);
    }
    slowest = std::max(slowest, std::chrono::duration<double>(Clock::now() - cell).count());
  }
  pass = worst < 1e-3 && slowest < 120.0;
  report(pass, "conservation N_l + N_r + P = 2 (L = 0, 2w, 5w; 5 snapshots)",
         "max relative error " + fmt("%.2e", worst) + ", slowest cell " + fmt("%.2f s", slowest), start);
}

void initial_state() {
  const auto start = Clock::now();
  double worst_integral = 0.0;
  double worst_marginal = 0.0;
  double lowest = 0.0;
  for (double L : {0.0, 2.0, 3.0, 5.0}) {
    const PulseSpec s = pulse(L);
    std::function<double(double)> rho = [&](double x) { return initial_density(x, s); };
    worst_integral = std::max(worst_integral,
                              std::abs(testref::simpson<double>(rho, s.x0 - L - 12.0, s.x0 + 12.0, 4000) - 2.0));
    for (double x = s.x0 - L - 5.0; x <= s.x0 + 5.0; x += 0.05) {
      for (double q = -6.0; q <= 6.0; q += 0.05) lowest = std::min(lowest, free_phase_space(x, q, 0.0, s, 1.0));
      std::function<double(double)> f = [&](double q) { return free_phase_space(x, q, 0.0, s, 1.0); };
      const double marginal = testref::simpson<double>(f, -8.0, 8.0, 800);
      worst_marginal = std::max(worst_marginal, std::abs(marginal - initial_density(x, s)));
    }
  }
  const bool pass = worst_integral <= 1e-6 && lowest >= 0.0 && worst_marginal <= 1e-6;
  report(pass, "initial-state closed forms",
         "|integral - 2| = " + fmt("%.1e", worst_integral) + ", min free f = " + fmt("%.1e", lowest) +
             ", |p-marginal - density| = " + fmt("%.1e", worst_marginal),
         start);
}

void negativity() {
  const auto start = Clock::now();
  struct Panel {
    const char* name;
    double gamma;
    double L;
  };
  const Panel panels[] = {{"a", 1.0, 0.0}, {"b", 1.0, 2.0}, {"c", 1.0, 5.0}, {"d", 2.0, 0.0}};
  std::string detail;
  bool pass = true;
  for (const auto& panel : panels) {
    const ModelParams p = model(panel.gamma);
    const PulseSpec s = pulse(panel.L);
    const double t = 10.0 + std::abs(s.x0);
    TableOptions o;
    o.keep_pair = false;
    const auto tb = compute_tables(p, s, default_grid(p, s, t), o);
    const auto f = phase_space(tb, t, linspace(-30.0, 20.0, 501), linspace(-4.0, 4.0, 257));
    const double lo = *std::min_element(f.f_l.begin(), f.f_l.end());
    const double hi = *std::max_element(f.f_l.begin(), f.f_l.end());
    const bool ok = panel.name[0] == 'd' ? lo > -1e-4 * hi : lo < 0.0;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : ", ") + "(" + panel.name + ") min/max = " + fmt("%.2e", lo / hi) +
              (ok ? "" : " (wrong sign)");
  }
  report(pass, "transmitted negativity panels: (a)-(c) negative, (d) above -1e-4 max", detail, start);
}

void reflected_identity() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (int n : {1, 2, 3}) {
    for (double L : {0.0, 2.0}) {
      if (n != 2 && L != 0.0) continue;
      const ModelParams p = model(1.0);
      const PulseSpec s = pulse(L, n);
      const double t = 30.0;
      TableOptions o;
      o.keep_pair = false;
      const auto tb = compute_tables(p, s, default_grid(p, s, t), o);
      double top = 0.0;
      for (double x = -t + 0.01; x < 0.0; x += 0.05) top = std::max(top, tb.excitation(t + x));
      for (double x = -t + 0.01; x < 0.0; x += 0.05) {
        const double expected = 0.5 * p.gamma / p.v_g * tb.excitation(t + x);
        if (expected < 1e-8 * top) continue;
        worst = std::max(worst, std::abs(density(x, t, tb).rho_r - expected) / expected);
      }
    }
  }
  report(worst <= 1e-4, "reflected density from p-quadrature equals (Gamma / 2 v_g) P(t + x / v_g)",
         "max relative deviation " + fmt("%.2e", worst), start);
}

void spectral_filtering() {
  const auto start = Clock::now();
  const auto omega = linspace(-4.0, 4.0, 201);
  const auto xs = linspace(-50.0, 50.0, 1001);
  auto spectrum_for = [&](double gamma, int n) {
    const ModelParams p = model(gamma);
    const PulseSpec s = pulse(0.0, n);
    const double t = settle_time(p, s, 10.0);
    TableOptions o;
    o.keep_pair = false;
    const auto tb = compute_tables(p, s, default_grid(p, s, t), o);
    auto c = spectrum(tb, t, omega, xs);
    std::vector<double> in(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) in[i] = incoming_spectrum(omega[i], tb.initial());
    return std::make_pair(c, in);
  };
  const auto [two, in_two] = spectrum_for(1.0, 2);
  const auto [one, in_one] = spectrum_for(1.0, 1);
  const auto [narrow, in_narrow] = spectrum_for(0.5, 2);

  double asym = 0.0;
  for (const auto* c : {&two, &one, &narrow}) {
    const double top = std::max(*std::max_element(c->n_l.begin(), c->n_l.end()),
                                *std::max_element(c->n_r.begin(), c->n_r.end()));
    for (std::size_t i = 0; i < omega.size(); ++i) {
      const std::size_t j = omega.size() - 1 - i;
      asym = std::max({asym, std::abs(c->n_l[i] - c->n_l[j]) / top, std::abs(c->n_r[i] - c->n_r[j]) / top});
    }
  }
  const std::size_t centre = omega.size() / 2;
  const double one_dip = one.n_l[centre] / *std::max_element(one.n_l.begin(), one.n_l.end());
  const double two_dip = two.n_l[centre] / *std::max_element(two.n_l.begin(), two.n_l.end());
  const double w_r = fwhm(omega, narrow.n_r);
  const double w_in = fwhm(omega, in_narrow);
  const bool late = two.late_enough && one.late_enough && narrow.late_enough;
  const bool pass = late && asym <= 1e-4 && one_dip < 1e-3 && two_dip > 0.0 && w_r < w_in;
  report(pass, "spectral filtering",
         "asymmetry " + fmt("%.1e", asym) + ", 1-photon n_l(0)/max " + fmt("%.1e", one_dip) +
             ", 2-photon n_l(0)/max " + fmt("%.3f", two_dip) + ", FWHM n_r " + fmt("%.3f", w_r) + " vs incoming " +
             fmt("%.3f", w_in) + " (Gamma = Omega/2)",
         start);
}

void fig7_statistics() {
  const auto start = Clock::now();
  const double gammas[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  bool sub = true;
  bool monotone = true;
  bool equal = true;
  double max_ratio = 0.0;
  for (double L : {0.0, 2.0, 5.0}) {
    double previous = -1.0;
    for (double gamma : gammas) {
      const PhotonStats st = stats_for(model(gamma), pulse(L), 2);
      sub = sub && st.var_right < st.n_right;
      monotone = monotone && st.n_right > previous;
      equal = equal && st.var_left == st.var_right;
      max_ratio = std::max(max_ratio, st.var_right / st.n_right);
      previous = st.n_right;
    }
  }
  report(sub && monotone && equal, "Gamma x L statistics sweep over 5 x 3 cells",
         std::string("var_r < N_r everywhere: ") + (sub ? "yes" : "no") + " (max var_r/N_r " + fmt("%.3f", max_ratio) +
             "), N_r increasing in Gamma: " + (monotone ? "yes" : "no") + ", var_l == var_r: " + (equal ? "yes" : "no"),
         start);
}

void factorization() {
  const auto start = Clock::now();
  const PhotonStats two = stats_for(model(1.0), pulse(20.0));
  const PhotonStats one = stats_for(model(1.0), pulse(0.0, 1));
  const double rel = std::abs(two.n_right / (2.0 * one.n_right) - 1.0);
  report(rel <= 0.01, "large-separation factorization N_r(L = 20w) = 2 N_r(1 photon)",
         "relative difference " + fmt("%.2e", rel), start);
}

void oracle_equivalence() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;
  for (int n : {2, 1}) {
    const auto cell = Clock::now();
    const ModelParams p = model(1.0);
    const PulseSpec s = pulse(0.0, n);
    const auto disc = oracle::DiscreteModel::make(p, 512, 32.0);
    const double t_end = std::floor(0.5 * disc.box_length() / p.v_g);
    oracle::PropagateOptions po;
    po.record_every = 20;
    const auto traj = oracle::propagate(oracle::build_initial_state(s, disc), disc, p, TimeGrid::covering(t_end, 0.005), po);

    TableOptions o;
    o.keep_correlation = false;
    const auto tb = compute_tables(p, s, default_grid(p, s, t_end), o);
    const PhotonStats st = photon_stats(tb);
    double sup = 0.0;
    double peak = 0.0;
    for (const auto& x : traj.samples) {
      sup = std::max(sup, std::abs(x.excitation - tb.excitation(x.t)));
      peak = std::max(peak, tb.excitation(x.t));
    }
    const double p_rel = sup / peak;
    const double n_rel = std::abs(traj.samples.back().n_right / st.n_right - 1.0);
    const double secs = std::chrono::duration<double>(Clock::now() - cell).count();
    pass = pass && p_rel < 0.02 && n_rel < 0.02 && secs < 300.0 && st.final_excitation < 1e-4;
    detail += std::string(detail.empty() ? "" : "; ") + (n == 2 ? "two photons" : "one photon") + ": P sup " +
              fmt("%.2f%%", 100.0 * p_rel) + ", N_r " + fmt("%.2f%%", 100.0 * n_rel) + ", " + fmt("%.0f s", secs);
  }
  report(pass, "oracle equivalence (M = 512 modes per direction)", detail, start);
}

void fock_chain() {
  const auto start = Clock::now();
  const ModelParams p = model(1.0);
  const TimeGrid grid = default_grid(p, pulse(0.0), 40.0);
  FockChainOptions eq_only;
  eq_only.two_time = false;

  const auto singles = solve_single_photon(p, pulse(0.0, 1), grid);
  const auto c1 = solve_fock_chain(p, pulse(0.0, 1), grid, 1, eq_only);
  double d1 = 0.0;
  for (std::size_t k = 0; k < grid.nodes(); ++k) d1 = std::max(d1, std::abs(c1.excitation[0][k] - std::norm(singles.c_alpha[k])));
  TableOptions o;
  o.keep_correlation = false;
  const double nr1 = photon_stats(compute_tables(p, pulse(0.0, 1), grid, o)).n_right;
  d1 = std::max(d1, std::abs(fock_stats(c1, p).n_right - nr1));

  const auto s2 = solve_single_photon(p, pulse(0.0), grid);
  const auto e2 = solve_equal_time(p, pulse(0.0), grid, s2);
  const auto c2 = solve_fock_chain(p, pulse(0.0), grid, 2, eq_only);
  double d2 = 0.0;
  for (std::size_t k = 0; k < grid.nodes(); ++k) d2 = std::max(d2, std::abs(c2.excitation[1][k] - e2.excitation[k]));

  const PhotonStats st3 = fock_stats(solve_fock_chain(p, pulse(0.0, 3), grid, 3, eq_only), p);
  const double d3 = std::abs(st3.n_left + st3.n_right - 3.0) / 3.0;
  report(d1 <= 1e-8 && d2 <= 1e-6 && d3 <= 1e-3, "Fock-chain consistency",
         "n=1 " + fmt("%.1e", d1) + ", n=2 " + fmt("%.1e", d2) + ", n=3 conservation " + fmt("%.1e", d3), start);
}

void rk4_order() {
  const auto start = Clock::now();
  const ModelParams p = model(1.0);
  const PulseSpec s = pulse(2.0);
  auto run = [&](std::size_t steps) {
    const TimeGrid grid{25.0 / static_cast<double>(steps), steps};
    return solve_equal_time(p, s, grid, solve_single_photon(p, s, grid)).excitation;
  };
  const auto a = run(125);
  const auto b = run(250);
  const auto c = run(500);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e1 = std::max(e1, std::abs(a[k] - b[2 * k]));
  for (std::size_t k = 0; k < b.size(); ++k) e2 = std::max(e2, std::abs(b[k] - c[2 * k]));
  const double order = std::log2(e1 / e2);
  report(order >= 3.5, "RK4 step-halving order on P(t)", "observed order " + fmt("%.2f", order), start);
}

}  // namespace

int main() {
  conservation();
  initial_state();
  negativity();
  reflected_identity();
  spectral_filtering();
  fig7_statistics();
  factorization();
  oracle_equivalence();
  fock_chain();
  rk4_order();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
