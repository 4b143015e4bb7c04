#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "oracles.hpp"
#include "waveqed/model.hpp"

using namespace waveqed;
using testref::simpson;

namespace {

PulseSpec pulse(double L = 0.0, double w = 1.0, int n = 2) {
  PulseSpec s;
  s.w = w;
  s.x0 = -10.0 * w;
  s.L = L;
  s.n_photons = n;
  return s;
}

// two-photon density from the symmetrized product of real Gaussians
double product_state_density(double x, const PulseSpec& s) {
  auto phi = [&](double y, double c) {
    const double u = (y - c) / s.w;
    return std::exp(-0.5 * u * u) / (std::pow(testref::kPi, 0.25) * std::sqrt(s.w));
  };
  const double a = s.x0;
  const double b = s.x0 - s.L;
  auto psi2 = [&](double x1, double x2) {
    const double v = phi(x1, a) * phi(x2, b) + phi(x1, b) * phi(x2, a);
    return v * v;
  };
  const double lo = b - 12.0 * s.w;
  const double hi = a + 12.0 * s.w;
  std::function<double(double)> inner = [&](double y) { return psi2(x, y); };
  std::function<double(double)> norm_inner = [&](double x1) {
    std::function<double(double)> f = [&](double y) { return psi2(x1, y); };
    return simpson<double>(f, lo, hi, 600);
  };
  const double norm = simpson<double>(norm_inner, lo, hi, 600);
  return 2.0 * simpson<double>(inner, lo, hi, 2000) / norm;
}

}  // namespace

TEST_CASE("alpha amplitude at p = 0") {
  CHECK(std::abs(amplitude_alpha(0.0, pulse()) - cplx(0.7511255444649425, 0.0)) < 1e-12);
  CHECK(std::abs(amplitude_alpha(0.0, pulse(0.0, 2.0)) - 1.0622519320271968) < 1e-12);
}

TEST_CASE("alpha is normalized (Simpson)") {
  for (double w : {1.0, 0.5, 2.0}) {
    const PulseSpec s = pulse(0.0, w);
    std::function<double(double)> f = [&](double p) { return std::norm(amplitude_alpha(p, s)); };
    CHECK(simpson<double>(f, -8.0 / w, 8.0 / w, 4000) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("beta is alpha shifted upstream") {
  const PulseSpec s = pulse(2.0);
  for (double p : {-1.3, 0.0, 0.7}) {
    CHECK(std::abs(amplitude_beta(p, s) - amplitude_alpha(p, s) * std::polar(1.0, p * s.L)) < 1e-14);
  }
}

TEST_CASE("envelope A: peak, tail and quadrature") {
  const PulseSpec s = pulse(0.0, 1.5);
  const double v = 2.0;
  const double peak = std::sqrt(2.0) * std::pow(kPi, 0.25) / std::sqrt(s.w);
  CHECK(std::abs(envelope_A(-s.x0 / v, s, v)) == doctest::Approx(peak).epsilon(1e-12));
  CHECK(std::abs(envelope_A(0.0, s, v)) < std::exp(-49.0) * peak);
  const MomentumGrid grid = MomentumGrid::for_pulse(s, 2001);
  for (double t : {4.0, 6.3, 7.5, 9.1}) {
    CHECK(std::abs(envelope_A(t, s, v) - envelope_A_quadrature(t, s, v, grid)) < 1e-8);
    CHECK(std::abs(envelope_A(t, s, v) - testref::envelope(t, s.x0, s.w, v)) < 1e-12);
  }
}

TEST_CASE("envelope B is A delayed by L / v") {
  const PulseSpec s = pulse(3.0);
  for (double t = 0.0; t < 25.0; t += 0.37) {
    CHECK(std::abs(envelope_B(t, s, 1.0) - envelope_A(t - 3.0, s, 1.0)) < 1e-14);
  }
  const MomentumGrid grid = MomentumGrid::for_pulse(s, 2001);
  CHECK(std::abs(envelope_B(13.0, s, 1.0) - envelope_B_quadrature(13.0, s, 1.0, grid)) < 1e-8);
}

TEST_CASE("overlap chi and normalization nu") {
  CHECK(std::abs(overlap_chi(pulse(0.0)) - 1.0) < 1e-12);
  CHECK(std::abs(overlap_chi(pulse(2.0)) - std::exp(-1.0)) < 1e-10);
  CHECK(std::abs(overlap_chi(pulse(20.0))) < 1e-20);
  for (double L : {0.0, 0.5, 2.0, 4.0}) {
    const PulseSpec s = pulse(L);
    CHECK(std::abs(overlap_chi(s, MomentumGrid::for_pulse(s)) - overlap_chi(s)) < 1e-12);
    std::function<double(double)> f = [&](double p) { return (std::conj(amplitude_alpha(p, s)) * amplitude_beta(p, s)).real(); };
    CHECK(testref::simpson<double>(f, -8.0, 8.0, 2000) == doctest::Approx(overlap_chi(s).real()).epsilon(1e-9));
  }
  CHECK(normalization_nu(pulse(0.0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(normalization_nu(pulse(2.0)) == doctest::Approx(1.0 / std::sqrt(1.0 + std::exp(-2.0))).epsilon(1e-10));
  CHECK(normalization_nu(pulse(40.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("initial density") {
  SUBCASE("both photons in one pulse") {
    const PulseSpec s = pulse(0.0);
    CHECK(initial_density(s.x0, s) == doctest::Approx(2.0 / std::sqrt(kPi)).epsilon(1e-12));
  }
  SUBCASE("integral is two") {
    for (double L : {0.0, 2.0, 5.0}) {
      const PulseSpec s = pulse(L);
      std::function<double(double)> f = [&](double x) { return initial_density(x, s); };
      CHECK(simpson<double>(f, s.x0 - L - 12.0, s.x0 + 12.0, 4000) == doctest::Approx(2.0).epsilon(1e-9));
    }
  }
  SUBCASE("matches the symmetrized product state") {
    const PulseSpec s = pulse(2.0);
    for (double x : {-13.5, -11.0, -10.2, -8.0}) {
      CHECK(initial_density(x, s) == doctest::Approx(product_state_density(x, s)).epsilon(1e-8));
    }
  }
  SUBCASE("interference raises the midpoint") {
    const PulseSpec s = pulse(2.0);
    const double mid = s.x0 - 0.5 * s.L;
    const double independent = testref::gauss_density(mid, s.x0, 1.0) + testref::gauss_density(mid, s.x0 - s.L, 1.0);
    CHECK(initial_density(mid, s) > independent);
  }
  SUBCASE("n identical photons") {
    const PulseSpec s = pulse(0.0, 1.0, 3);
    CHECK(initial_density(-9.3, s) == doctest::Approx(3.0 * testref::gauss_density(-9.3, -10.0, 1.0)));
  }
}

TEST_CASE("free phase-space distribution") {
  SUBCASE("centre value for coincident pulses") {
    const PulseSpec s = pulse(0.0);
    CHECK(free_phase_space(s.x0 + 4.0, 0.0, 4.0, s, 1.0) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  }
  SUBCASE("nonnegative and integrates to the density") {
    for (double L : {0.0, 2.0, 3.0}) {
      const PulseSpec s = pulse(L);
      double lowest = 0.0;
      for (double x = s.x0 - L - 5.0; x < s.x0 + 5.0; x += 0.1) {
        for (double p = -5.0; p <= 5.0; p += 0.1) lowest = std::min(lowest, free_phase_space(x, p, 0.0, s, 1.0));
        std::function<double(double)> f = [&](double p) { return free_phase_space(x, p, 0.0, s, 1.0); };
        CHECK(simpson<double>(f, -8.0, 8.0, 800) == doctest::Approx(initial_density(x, s)).epsilon(1e-6));
      }
      CHECK(lowest >= 0.0);
    }
  }
  SUBCASE("double integral is two") {
    const PulseSpec s = pulse(2.0);
    std::function<double(double)> over_x = [&](double x) {
      std::function<double(double)> f = [&](double p) { return free_phase_space(x, p, 0.0, s, 1.0); };
      return simpson<double>(f, -8.0, 8.0, 400);
    };
    CHECK(simpson<double>(over_x, s.x0 - 12.0, s.x0 + 10.0, 400) == doctest::Approx(2.0).epsilon(1e-4));
  }
  SUBCASE("two maxima along p = 0 for L = 3w") {
    const PulseSpec s = pulse(3.0);
    std::vector<double> xs;
    for (double x = s.x0 - 6.0; x <= s.x0 + 3.0; x += 0.01) xs.push_back(x);
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      const double f0 = free_phase_space(xs[i - 1], 0.0, 0.0, s, 1.0);
      const double f1 = free_phase_space(xs[i], 0.0, 0.0, s, 1.0);
      const double f2 = free_phase_space(xs[i + 1], 0.0, 0.0, s, 1.0);
      if (f1 > f0 && f1 >= f2) peaks.push_back(xs[i] - s.x0);
    }
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0] + 3.0) < 0.3);
    CHECK(std::abs(peaks[1]) < 0.3);
  }
  SUBCASE("translates at v_g") {
    const PulseSpec s = pulse(2.0);
    CHECK(free_phase_space(-3.0, 0.4, 5.0, s, 2.0) == doctest::Approx(free_phase_space(-13.0, 0.4, 0.0, s, 2.0)));
  }
}

TEST_CASE("parameters") {
  ModelParams p;
  p.gamma = 2.0;
  p.v_g = 3.0;
  CHECK(4.0 * kPi * p.coupling() * p.coupling() / p.v_g == doctest::Approx(2.0));
  CHECK(ModelParams::from_coupling(p.coupling(), 0.0, 3.0).gamma == doctest::Approx(2.0));
  p.gamma = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  PulseSpec s = pulse();
  s.x0 = 5.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = pulse(1.0, 1.0, 3);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = pulse();
  s.n_photons = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("time grids") {
  const TimeGrid g = TimeGrid::covering(10.0, 0.03);
  CHECK(g.t_max() == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(g.dt <= 0.03);
  CHECK(g.steps == 334);

  ModelParams p;
  const PulseSpec s = pulse();
  CHECK(TimeGrid::default_step(p, s) == doctest::Approx(0.02));
  TimeGrid coarse = TimeGrid::covering(10.0, 2.0 * TimeGrid::max_step(p, s));
  CHECK_THROWS_AS(check_step(coarse, p, s), ConfigError);
  CHECK_NOTHROW(check_step(TimeGrid::covering(10.0, TimeGrid::default_step(p, s)), p, s));
}
