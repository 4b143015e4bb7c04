#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "waveqed/correlators.hpp"
#include "waveqed/tables_io.hpp"

using namespace waveqed;

namespace {

PulseSpec pulse(double L = 0.0, int n = 2) {
  PulseSpec s;
  s.x0 = -10.0;
  s.L = L;
  s.n_photons = n;
  return s;
}

ModelParams model(double gamma = 1.0, double delta = 0.0) {
  ModelParams p;
  p.gamma = gamma;
  p.delta = delta;
  return p;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t stride_b = 1) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k * stride_b]));
  return d;
}

}  // namespace

TEST_CASE("no coupling, no excitation") {
  const ModelParams p = model(0.0);
  const PulseSpec s = pulse(2.0);
  const TimeGrid grid = TimeGrid::covering(30.0, 0.02);
  const auto singles = solve_single_photon(p, s, grid);
  const auto eq = solve_equal_time(p, s, grid, singles);
  const auto two = solve_two_time(p, s, grid, singles, eq);
  double largest = 0.0;
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    largest = std::max({largest, std::abs(singles.c_alpha[k]), eq.excitation[k], std::abs(eq.s_alpha[k]),
                        std::abs(eq.s_beta[k])});
  }
  for (const auto& v : two.g.values.data()) largest = std::max(largest, std::abs(v));
  for (const auto& v : two.d.values.data()) largest = std::max(largest, std::abs(v));

  const auto chain = solve_fock_chain(p, pulse(0.0, 3), grid, 3);
  for (const auto& level : chain.excitation) largest = std::max(largest, *std::max_element(level.begin(), level.end()));
  for (const auto& table : chain.d) {
    for (const auto& v : table.values.data()) largest = std::max(largest, std::abs(v));
  }
  CHECK(largest == 0.0);
}

TEST_CASE("single-photon amplitude against direct quadrature") {
  for (double delta : {0.0, 0.7}) {
    const ModelParams p = model(1.0, delta);
    const PulseSpec s = pulse();
    const TimeGrid grid = TimeGrid::covering(25.0, TimeGrid::default_step(p, s));
    const auto singles = solve_single_photon(p, s, grid);
    double worst = 0.0;
    double peak_ode = 0.0;
    double peak_ref = 0.0;
    for (std::size_t k = 0; k < grid.nodes(); k += 25) {
      const cplx ref = testref::single_amplitude(grid.t(k), p.gamma, p.delta, p.v_g, s.x0, s.w);
      worst = std::max(worst, std::abs(singles.c_alpha[k] - ref));
      peak_ode = std::max(peak_ode, std::norm(singles.c_alpha[k]));
      peak_ref = std::max(peak_ref, std::norm(ref));
    }
    CHECK(worst < 1e-7);
    CHECK(peak_ode == doctest::Approx(peak_ref).epsilon(1e-6));
  }
}

TEST_CASE("beta amplitude is the delayed alpha amplitude") {
  const ModelParams p = model(1.3);
  const PulseSpec s = pulse(3.0);
  const TimeGrid grid = TimeGrid::covering(30.0, 0.01);
  const auto singles = solve_single_photon(p, s, grid);
  const std::size_t shift = 300;
  for (std::size_t k = shift; k < grid.nodes(); ++k) {
    CHECK(std::abs(singles.c_beta[k] - singles.c_alpha[k - shift]) < 1e-9);
  }
}

TEST_CASE("equal-time quantities") {
  const ModelParams p = model(1.0);
  for (double L : {0.0, 2.0, 5.0}) {
    const PulseSpec s = pulse(L);
    const TimeGrid grid = TimeGrid::covering(40.0, 0.02);
    const auto singles = solve_single_photon(p, s, grid);
    const auto eq = solve_equal_time(p, s, grid, singles);
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < grid.nodes(); ++k) {
      integral += 0.5 * grid.dt * (eq.excitation[k] + eq.excitation[k + 1]);
      CHECK(eq.excitation[k] >= -1e-14);
      CHECK(eq.excitation[k] <= 1.0 + 1e-12);
    }
    // reflected number (Gamma / 2) int P lies in (0, 2]
    CHECK(0.5 * p.gamma * integral > 0.0);
    CHECK(0.5 * p.gamma * integral <= 2.0 + 1e-9);
  }
}

TEST_CASE("mismatched grids are rejected") {
  const ModelParams p = model();
  const PulseSpec s = pulse();
  const auto singles = solve_single_photon(p, s, TimeGrid::covering(20.0, 0.02));
  CHECK_THROWS_AS(solve_equal_time(p, s, TimeGrid::covering(20.0, 0.01), singles), UsageError);
}

TEST_CASE("too coarse a step is a configuration error") {
  CHECK_THROWS_AS(solve_single_photon(model(4.0), pulse(), TimeGrid::covering(20.0, 0.2)), ConfigError);
}

TEST_CASE("two-time surfaces") {
  const ModelParams p = model(1.0);
  const PulseSpec s = pulse(2.0);
  const TimeGrid grid = TimeGrid::covering(30.0, 0.02);
  const auto singles = solve_single_photon(p, s, grid);
  const auto eq = solve_equal_time(p, s, grid, singles);
  TwoTimeOptions opt;
  opt.stride = 2;
  const auto two = solve_two_time(p, s, grid, singles, eq, opt);
  REQUIRE(two.g.nodes() == grid.steps / 2 + 1);

  SUBCASE("diagonal is P") {
    for (std::size_t j = 0; j < two.g.nodes(); ++j) CHECK(two.g.values(j, j) == cplx(eq.excitation[2 * j], 0.0));
  }
  SUBCASE("Cauchy-Schwarz") {
    double excess = 0.0;
    for (std::size_t j = 0; j < two.g.nodes(); ++j) {
      for (std::size_t k = 0; k <= j; ++k) {
        excess = std::max(excess, std::norm(two.g.values(j, k)) - eq.excitation[2 * j] * eq.excitation[2 * k]);
      }
    }
    CHECK(excess < 1e-12);
  }
  SUBCASE("thread count does not change the tables") {
    TwoTimeOptions one = opt;
    one.threads = 1;
    TwoTimeOptions four = opt;
    four.threads = 4;
    const auto a = solve_two_time(p, s, grid, singles, eq, one);
    const auto b = solve_two_time(p, s, grid, singles, eq, four);
    CHECK(a.g.values.data() == b.g.values.data());
    CHECK(a.d.values.data() == b.d.values.data());
  }
  SUBCASE("stride must divide the steps") {
    TwoTimeOptions bad;
    bad.stride = 7;
    CHECK_THROWS_AS(solve_two_time(p, s, grid, singles, eq, bad), ConfigError);
  }
}

TEST_CASE("single photon: G factorizes") {
  const ModelParams p = model(1.0);
  const PulseSpec s = pulse(0.0, 1);
  const TimeGrid grid = TimeGrid::covering(25.0, 0.02);
  const auto singles = solve_single_photon(p, s, grid);
  FockChainOptions opt;
  const auto chain = solve_fock_chain(p, s, grid, 1, opt);
  REQUIRE(chain.has_two_time());
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.nodes(); j += 7) {
    for (std::size_t k = 0; k <= j; k += 5) {
      worst = std::max(worst, std::abs(chain.g[0].values(j, k) - std::conj(singles.c_alpha[j]) * singles.c_alpha[k]));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("Fock chain reductions") {
  const ModelParams p = model(1.0);
  const TimeGrid grid = TimeGrid::covering(30.0, 0.02);

  SUBCASE("n = 1 is the single-photon amplitude") {
    const auto singles = solve_single_photon(p, pulse(0.0, 1), grid);
    const auto chain = solve_fock_chain(p, pulse(0.0, 1), grid, 1, {false});
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      CHECK(std::abs(chain.excitation[0][k] - std::norm(singles.c_alpha[k])) < 1e-10);
    }
  }
  SUBCASE("n = 2 matches the two-photon hierarchy at L = 0") {
    const PulseSpec s = pulse(0.0, 2);
    const auto singles = solve_single_photon(p, s, grid);
    const auto eq = solve_equal_time(p, s, grid, singles);
    const auto two = solve_two_time(p, s, grid, singles, eq);
    const auto chain = solve_fock_chain(p, s, grid, 2);
    CHECK(sup_diff(eq.excitation, chain.excitation[1]) < 1e-8);
    double dg = 0.0;
    double dd = 0.0;
    for (std::size_t i = 0; i < two.g.values.data().size(); ++i) {
      dg = std::max(dg, std::abs(two.g.values.data()[i] - chain.g[1].values.data()[i]));
      dd = std::max(dd, std::abs(two.d.values.data()[i] - chain.d[1].values.data()[i]));
    }
    CHECK(dg < 1e-8);
    CHECK(dd < 1e-8);
  }
  SUBCASE("n = 0 is rejected") {
    CHECK_THROWS_AS(solve_fock_chain(p, pulse(0.0, 1), grid, 0), ConfigError);
  }
  SUBCASE("only the top level when asked") {
    FockChainOptions opt;
    opt.all_levels = false;
    const auto chain = solve_fock_chain(p, pulse(0.0, 3), grid, 3, opt);
    CHECK(chain.excitation.size() == 3);
    CHECK(!chain.g.back().values.empty());
  }
}

TEST_CASE("RK4 convergence order on P(t)") {
  const ModelParams p = model(1.0);
  const PulseSpec s = pulse(2.0);
  auto run = [&](std::size_t steps) {
    const TimeGrid grid{20.0 / static_cast<double>(steps), steps};
    const auto singles = solve_single_photon(p, s, grid);
    return solve_equal_time(p, s, grid, singles).excitation;
  };
  const auto coarse = run(100);
  const auto mid = run(200);
  const auto fine = run(400);
  const double e1 = sup_diff(coarse, mid, 2);
  const double e2 = sup_diff(mid, fine, 2);
  CHECK(std::log2(e1 / e2) > 3.5);
}

TEST_CASE("interpolation of two-time tables") {
  TwoTimeTable t;
  t.spacing = 0.5;
  t.values = TriangularTable(21);
  // cubic in (t', t - t') below the diagonal: reproduced exactly away from t_max
  auto f = [](double a, double b) {
    const double s = b;
    const double u = a - b;
    return cplx(1.0 + s - 0.3 * s * s * u + 0.01 * u * u * u, 0.2 * s * u);
  };
  for (std::size_t j = 0; j < 21; ++j) {
    for (std::size_t k = 0; k <= j; ++k) t.values(j, k) = f(0.5 * j, 0.5 * k);
  }
  CHECK(std::abs(t.sample_hermitian(3.3, 1.7) - f(3.3, 1.7)) < 1e-12);
  CHECK(std::abs(t.sample_hermitian(2.2, 2.2) - f(2.2, 2.2)) < 1e-12);
  CHECK(std::abs(t.sample_hermitian(1.7, 3.3) - std::conj(f(3.3, 1.7))) < 1e-12);
  CHECK(t.sample_hermitian(-0.1, 2.0) == cplx{});
  CHECK(std::abs(t.sample_hermitian(10.0, 9.5) - f(10.0, 9.5)) < 1e-12);
  CHECK_THROWS_AS(t.sample_hermitian(10.5, 1.0), UsageError);

  // on the t = t_max edge, where roundoff can put the point just outside the
  // last row: linear between the edge nodes
  double worst = 0.0;
  for (double b = 0.0; b < 10.0; b += 0.0137) {
    const double k = std::floor(b / 0.5);
    const double r = b / 0.5 - k;
    const cplx edge = (1.0 - r) * f(10.0, 0.5 * k) + r * f(10.0, 0.5 * (k + 1.0));
    worst = std::max(worst, std::abs(t.sample_hermitian(10.0, b) - edge));
    worst = std::max(worst, std::abs(t.sample_hermitian(10.0 + 1e-12, b + 1e-15) - edge));
  }
  CHECK(worst < 1e-9);

  // same at a finer spacing, where b = k h + 1e-15 lands fs + fu just above 1
  TwoTimeTable fine;
  fine.spacing = 0.01;
  fine.values = TriangularTable(21);
  for (std::size_t j = 0; j < 21; ++j) {
    for (std::size_t k = 0; k <= j; ++k) fine.values(j, k) = f(0.01 * j, 0.01 * k);
  }
  double off = 0.0;
  for (std::size_t k = 1; k < 20; ++k) {
    const double b = 0.01 * static_cast<double>(k);
    off = std::max(off, std::abs(fine.sample_hermitian(fine.t_max(), b + 1e-15) - fine.values(20, k)));
  }
  CHECK(off < 1e-9);
}

TEST_CASE("table cache round trip") {
  TwoTimeTable t;
  t.spacing = 0.04;
  t.values = TriangularTable(30);
  for (std::size_t i = 0; i < t.values.data().size(); ++i) t.values.data()[i] = cplx(0.1 * i, -1.0 / (1.0 + i));
  const auto path = (std::filesystem::temp_directory_path() / "waveqed_table_test.bin").string();
  save_table(path, t);
  const TwoTimeTable back = load_table(path);
  CHECK(back.spacing == t.spacing);
  CHECK(back.values.data() == t.values.data());

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "not a table";
  }
  CHECK_THROWS_AS(load_table(path), IoError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_table(path), IoError);
}

TEST_CASE("memory estimate") {
  CHECK(two_time_bytes(1001, 2) == 2 * 1001 * 1002 / 2 * sizeof(cplx));
}
