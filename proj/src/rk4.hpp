#pragma once

#include <cstddef>
#include <vector>

#include "waveqed/model.hpp"

namespace waveqed::detail {

/// One classical RK4 step. The right-hand side is addressed by half-step
/// index: rhs(2k, y, dy) at t_k, rhs(2k + 1, ...) at t_k + dt/2.
template <class State, class Rhs>
void rk4_step(State& y, std::size_t step, double h, Rhs&& rhs, State& k1, State& k2, State& k3,
              State& k4, State& tmp) {
  const std::size_t n = y.size();
  rhs(2 * step, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * h) * k1[i];
  rhs(2 * step + 1, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * h) * k2[i];
  rhs(2 * step + 1, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(2 * step + 2, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

/// Scratch space for rk4_step on a fixed-size state.
template <class State>
struct Rk4Workspace {
  State k1, k2, k3, k4, tmp;

  explicit Rk4Workspace(const State& shape) : k1(shape), k2(shape), k3(shape), k4(shape), tmp(shape) {}

  template <class Rhs>
  void step(State& y, std::size_t step_index, double h, Rhs&& rhs) {
    rk4_step(y, step_index, h, rhs, k1, k2, k3, k4, tmp);
  }
};

/// Pulse envelopes sampled at every half step of a TimeGrid.
struct HalfStepEnvelopes {
  std::vector<cplx> a;
  std::vector<cplx> b;

  HalfStepEnvelopes(const InitialState& initial, const TimeGrid& grid) {
    const std::size_t count = 2 * grid.steps + 1;
    a.resize(count);
    b.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = grid.t(i / 2) + ((i % 2) ? 0.5 * grid.dt : 0.0);
      a[i] = initial.A(t);
      b[i] = initial.B(t);
    }
  }
};

}  // namespace waveqed::detail
