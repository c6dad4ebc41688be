#pragma once

// Forward/backward primitives for the span tagger: ReLU MLP layers with
// inverted dropout, a single-layer LSTM in either direction, AdamW, and a
// central-difference gradient checker.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spanseg/kernels.hpp"
#include "spanseg/tensor.hpp"

namespace spanseg {

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------
// MLP: y = dropout(ReLU(W x + b)).

template <typename Real>
struct MlpTrace {
  std::size_t rows = 0;
  std::size_t out = 0;
  std::vector<Real> y;     // rows x out
  std::vector<Real> gate;  // dy/dpre per element: [pre > 0] * dropout scale
};

// Fills dropout scales for `count` elements: 0 with probability `rate`,
// 1 / (1 - rate) otherwise. A rate of 1 drops everything.
template <typename Real>
void dropout_mask(std::size_t count, double rate, Rng& rng, std::vector<Real>& mask);

template <typename Real>
std::vector<Real> mlp_forward(std::span<const Real> x, const Tensor<Real>& w,
                              const Tensor<Real>& b, double dropout, bool train,
                              Rng* rng = nullptr);

template <typename Real>
MlpTrace<Real> mlp_forward_rows(const Real* x, std::size_t rows, const Tensor<Real>& w,
                                const Tensor<Real>& b, double dropout, bool train,
                                Rng* rng, Exec exec = Exec::serial);

// Accumulates into dw, db and (if non-null) dx.
template <typename Real>
void mlp_backward_rows(const Real* x, const Tensor<Real>& w, const MlpTrace<Real>& trace,
                       const Real* dy, Real* dw, Real* db, Real* dx,
                       Exec exec = Exec::serial);

// ---------------------------------------------------------------------------
// LSTM. Gate layout in the 4H pre-activation vector: input, forget, cell
// candidate, output. wx is 4H x in, wh is 4H x H, b is 4H.

template <typename Real>
struct LstmRef {
  const Tensor<Real>& wx;
  const Tensor<Real>& wh;
  const Tensor<Real>& b;

  std::size_t hidden() const { return wh.dim(1); }
  std::size_t input() const { return wx.dim(1); }
};

// All buffers are indexed by sequence position, not by processing time.
template <typename Real>
struct LstmTrace {
  std::size_t steps = 0;
  std::size_t hidden = 0;
  bool reverse = false;
  std::vector<Real> gates;  // steps x 4H, post-activation
  std::vector<Real> cell;   // steps x H
  std::vector<Real> tanh_cell;
  std::vector<Real> h;      // steps x H

  std::span<const Real> state(std::size_t pos) const {
    return std::span<const Real>(h).subspan(pos * hidden, hidden);
  }
};

template <typename Real>
LstmTrace<Real> lstm_forward(const Real* x, std::size_t steps, const LstmRef<Real>& p,
                             bool reverse, Exec exec = Exec::serial);

// dh holds dLoss/dh for every position (steps x H). Accumulates parameter
// gradients and, if dx is non-null, input gradients.
template <typename Real>
void lstm_backward(const LstmTrace<Real>& trace, const Real* x, const LstmRef<Real>& p,
                   const Real* dh, Real* dwx, Real* dwh, Real* db, Real* dx,
                   Exec exec = Exec::serial);

template <typename Real>
struct BiLstmStates {
  LstmTrace<Real> fwd;  // f_1..f_n at positions 0..n-1
  LstmTrace<Real> bwd;  // b_1..b_n at positions 0..n-1
};

// Throws ContractError on an empty sequence.
template <typename Real>
BiLstmStates<Real> bilstm_forward(const Real* x, std::size_t steps,
                                  const LstmRef<Real>& fwd, const LstmRef<Real>& bwd,
                                  Exec exec = Exec::serial);

// ---------------------------------------------------------------------------
// AdamW with decoupled weight decay.

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

template <typename Real>
struct OptimizerState {
  AdamWConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static OptimizerState init(const ParamStore<Real>& store, AdamWConfig config);
};

// Uses the gradients held in `store`. Throws NumericError naming the
// parameter if any gradient is non-finite; nothing is updated in that case.
template <typename Real>
void adamw_step(ParamStore<Real>& store, OptimizerState<Real>& state);

// ---------------------------------------------------------------------------
// Finite-difference verification.

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> params;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

// |a - n| / max(|a|, |n|, floor); near-zero gradients are compared in
// absolute terms.
double relative_error(double analytic, double numeric, double floor = 1e-5);

// `loss` reads the current values in `store`; `fill_grads` must write
// analytic gradients into store.grad(). Every element is perturbed by
// +/- eps. Throws NumericError if two evaluations at the same point differ.
GradCheckReport finite_diff_check(ParamStore<double>& store,
                                  const std::function<double()>& loss,
                                  const std::function<void()>& fill_grads,
                                  double eps = 1e-3, double tolerance = 1e-4,
                                  double floor = 1e-5);

}  // namespace spanseg
