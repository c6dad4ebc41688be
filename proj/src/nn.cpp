#include "spanseg/nn.hpp"

#include <algorithm>
#include <cmath>

namespace spanseg {

template <typename Real>
void dropout_mask(std::size_t count, double rate, Rng& rng, std::vector<Real>& mask) {
  mask.resize(count);
  if (rate >= 1.0) {
    std::fill(mask.begin(), mask.end(), Real(0));
    return;
  }
  const Real scale = static_cast<Real>(1.0 / (1.0 - rate));
  for (auto& m : mask) m = rng.uniform() < rate ? Real(0) : scale;
}

template <typename Real>
MlpTrace<Real> mlp_forward_rows(const Real* x, std::size_t rows, const Tensor<Real>& w,
                                const Tensor<Real>& b, double dropout, bool train,
                                Rng* rng, Exec exec) {
  if (w.shape.size() != 2 || b.shape.size() != 1 || b.dim(0) != w.dim(0)) {
    throw ContractError("mlp: malformed weight shapes");
  }
  MlpTrace<Real> t;
  t.rows = rows;
  t.out = w.dim(0);
  t.y.resize(rows * t.out);
  kernels::affine_rows(exec, x, rows, w.dim(1), w.ptr(), b.ptr(), t.out, t.y.data());

  const bool drop = train && dropout > 0.0;
  if (drop) {
    if (!rng) throw ContractError("mlp: dropout requires a generator");
    dropout_mask(t.y.size(), dropout, *rng, t.gate);
  } else {
    t.gate.assign(t.y.size(), Real(1));
  }
  for (std::size_t k = 0; k < t.y.size(); ++k) {
    if (t.y[k] <= Real(0)) t.gate[k] = Real(0);
    t.y[k] *= t.gate[k];
  }
  return t;
}

template <typename Real>
std::vector<Real> mlp_forward(std::span<const Real> x, const Tensor<Real>& w,
                              const Tensor<Real>& b, double dropout, bool train,
                              Rng* rng) {
  if (w.shape.size() != 2 || x.size() != w.dim(1)) {
    throw ContractError("mlp: input dimension does not match weights");
  }
  return mlp_forward_rows(x.data(), 1, w, b, dropout, train, rng).y;
}

template <typename Real>
void mlp_backward_rows(const Real* x, const Tensor<Real>& w, const MlpTrace<Real>& trace,
                       const Real* dy, Real* dw, Real* db, Real* dx, Exec exec) {
  std::vector<Real> dpre(trace.y.size());
  for (std::size_t k = 0; k < dpre.size(); ++k) dpre[k] = dy[k] * trace.gate[k];
  kernels::affine_rows_backward(exec, x, trace.rows, w.dim(1), w.ptr(), trace.out,
                                dpre.data(), dw, db, dx);
}

template <typename Real>
LstmTrace<Real> lstm_forward(const Real* x, std::size_t steps, const LstmRef<Real>& p,
                             bool reverse, Exec exec) {
  const std::size_t H = p.hidden();
  const std::size_t G = 4 * H;
  if (p.wx.dim(0) != G || p.wh.dim(0) != G || p.b.dim(0) != G) {
    throw ContractError("lstm: malformed weight shapes");
  }
  LstmTrace<Real> t;
  t.steps = steps;
  t.hidden = H;
  t.reverse = reverse;
  t.gates.resize(steps * G);
  t.cell.resize(steps * H);
  t.tanh_cell.resize(steps * H);
  t.h.resize(steps * H);

  // Input contributions for all positions at once; recurrence adds Wh h_prev.
  kernels::affine_rows(exec, x, steps, p.input(), p.wx.ptr(), p.b.ptr(), G,
                       t.gates.data());

  const std::vector<Real> zero(H, Real(0));
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t pos = reverse ? steps - 1 - step : step;
    const Real* h_prev = step == 0 ? zero.data()
                                   : t.h.data() + (reverse ? pos + 1 : pos - 1) * H;
    const Real* c_prev = step == 0 ? zero.data()
                                   : t.cell.data() + (reverse ? pos + 1 : pos - 1) * H;
    Real* a = t.gates.data() + pos * G;
    for (std::size_t o = 0; o < G; ++o) {
      const Real* row = p.wh.ptr() + o * H;
      Real acc = a[o];
      for (std::size_t j = 0; j < H; ++j) acc += row[j] * h_prev[j];
      a[o] = acc;
    }
    Real* c = t.cell.data() + pos * H;
    Real* tc = t.tanh_cell.data() + pos * H;
    Real* h = t.h.data() + pos * H;
    for (std::size_t j = 0; j < H; ++j) {
      const Real ig = sigmoid(a[j]);
      const Real fg = sigmoid(a[H + j]);
      const Real gg = std::tanh(a[2 * H + j]);
      const Real og = sigmoid(a[3 * H + j]);
      a[j] = ig;
      a[H + j] = fg;
      a[2 * H + j] = gg;
      a[3 * H + j] = og;
      c[j] = fg * c_prev[j] + ig * gg;
      tc[j] = std::tanh(c[j]);
      h[j] = og * tc[j];
    }
  }
  return t;
}

template <typename Real>
void lstm_backward(const LstmTrace<Real>& t, const Real* x, const LstmRef<Real>& p,
                   const Real* dh, Real* dwx, Real* dwh, Real* db, Real* dx,
                   Exec exec) {
  const std::size_t H = t.hidden;
  const std::size_t G = 4 * H;
  const std::size_t steps = t.steps;
  std::vector<Real> da(steps * G, Real(0));
  std::vector<Real> h_prev_rows(steps * H, Real(0));
  std::vector<Real> dh_next(H, Real(0));
  std::vector<Real> dc_next(H, Real(0));

  // Walk processing time backwards.
  for (std::size_t step = steps; step-- > 0;) {
    const std::size_t pos = t.reverse ? steps - 1 - step : step;
    const bool first = step == 0;
    const std::size_t prev = t.reverse ? pos + 1 : pos - 1;
    const Real* c_prev = first ? nullptr : t.cell.data() + prev * H;
    const Real* g = t.gates.data() + pos * G;
    const Real* tc = t.tanh_cell.data() + pos * H;
    Real* a = da.data() + pos * G;
    for (std::size_t j = 0; j < H; ++j) {
      const Real ig = g[j], fg = g[H + j], gg = g[2 * H + j], og = g[3 * H + j];
      const Real dhj = dh[pos * H + j] + dh_next[j];
      const Real dc = dc_next[j] + dhj * og * (Real(1) - tc[j] * tc[j]);
      const Real d_o = dhj * tc[j];
      const Real d_i = dc * gg;
      const Real d_g = dc * ig;
      const Real d_f = first ? Real(0) : dc * c_prev[j];
      a[j] = d_i * ig * (Real(1) - ig);
      a[H + j] = d_f * fg * (Real(1) - fg);
      a[2 * H + j] = d_g * (Real(1) - gg * gg);
      a[3 * H + j] = d_o * og * (Real(1) - og);
      dc_next[j] = dc * fg;
    }
    std::fill(dh_next.begin(), dh_next.end(), Real(0));
    if (!first) {
      std::copy_n(t.h.data() + prev * H, H, h_prev_rows.data() + pos * H);
      for (std::size_t o = 0; o < G; ++o) {
        const Real go = a[o];
        if (go == Real(0)) continue;
        const Real* row = p.wh.ptr() + o * H;
        for (std::size_t j = 0; j < H; ++j) dh_next[j] += go * row[j];
      }
    }
  }
  kernels::affine_rows_backward(exec, h_prev_rows.data(), steps, H, p.wh.ptr(), G,
                                da.data(), dwh, static_cast<Real*>(nullptr),
                                static_cast<Real*>(nullptr));
  kernels::affine_rows_backward(exec, x, steps, p.input(), p.wx.ptr(), G, da.data(),
                                dwx, db, dx);
}

template <typename Real>
BiLstmStates<Real> bilstm_forward(const Real* x, std::size_t steps,
                                  const LstmRef<Real>& fwd, const LstmRef<Real>& bwd,
                                  Exec exec) {
  if (steps == 0) throw ContractError("bilstm: empty sequence");
  return {lstm_forward(x, steps, fwd, false, exec), lstm_forward(x, steps, bwd, true, exec)};
}

template <typename Real>
OptimizerState<Real> OptimizerState<Real>::init(const ParamStore<Real>& store,
                                                AdamWConfig config) {
  OptimizerState s;
  s.config = config;
  for (const auto& p : store) {
    s.m.emplace_back(p.value.size(), 0.0);
    s.v.emplace_back(p.value.size(), 0.0);
  }
  return s;
}

template <typename Real>
void adamw_step(ParamStore<Real>& store, OptimizerState<Real>& state) {
  if (state.m.size() != store.size()) throw ContractError("adamw: state does not match parameters");
  for (const auto& p : store) {
    for (Real g : p.grad.data) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError("non-finite gradient in parameter " + p.name);
      }
    }
  }
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - c.lr * c.weight_decay;
  std::size_t i = 0;
  for (auto& p : store) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    auto& w = p.value.data;
    const auto& grad = p.grad.data;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double g = static_cast<double>(grad[k]);
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g;
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g * g;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      double wk = static_cast<double>(w[k]) * decay;
      wk -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
      w[k] = static_cast<Real>(wk);
    }
    ++i;
  }
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  if (scale == 0.0) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport finite_diff_check(ParamStore<double>& store,
                                  const std::function<double()>& loss,
                                  const std::function<void()>& fill_grads, double eps,
                                  double tolerance, double floor) {
  const double base_a = loss();
  const double base_b = loss();
  if (base_a != base_b) {
    throw NumericError("finite_diff_check: loss closure is not deterministic");
  }
  store.zero_grad();
  fill_grads();

  GradCheckReport report;
  report.tolerance = tolerance;
  for (auto& p : store) {
    GradCheckEntry entry;
    entry.name = p.name;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value.data[k];
      p.value.data[k] = saved + eps;
      const double up = loss();
      p.value.data[k] = saved - eps;
      const double down = loss();
      p.value.data[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad.data[k];
      const double err = relative_error(analytic, numeric, floor);
      if (k == 0 || err > entry.max_rel_error) {
        entry.max_rel_error = err;
        entry.worst_index = k;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.params.push_back(std::move(entry));
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

#define SPANSEG_INSTANTIATE(Real)                                                     \
  template void dropout_mask<Real>(std::size_t, double, Rng&, std::vector<Real>&);    \
  template std::vector<Real> mlp_forward<Real>(std::span<const Real>,                \
                                               const Tensor<Real>&, const Tensor<Real>&, \
                                               double, bool, Rng*);                   \
  template MlpTrace<Real> mlp_forward_rows<Real>(const Real*, std::size_t,            \
                                                 const Tensor<Real>&,                 \
                                                 const Tensor<Real>&, double, bool,   \
                                                 Rng*, Exec);                         \
  template void mlp_backward_rows<Real>(const Real*, const Tensor<Real>&,             \
                                        const MlpTrace<Real>&, const Real*, Real*,    \
                                        Real*, Real*, Exec);                          \
  template LstmTrace<Real> lstm_forward<Real>(const Real*, std::size_t,               \
                                              const LstmRef<Real>&, bool, Exec);      \
  template void lstm_backward<Real>(const LstmTrace<Real>&, const Real*,              \
                                    const LstmRef<Real>&, const Real*, Real*, Real*,  \
                                    Real*, Real*, Exec);                              \
  template BiLstmStates<Real> bilstm_forward<Real>(const Real*, std::size_t,          \
                                                   const LstmRef<Real>&,              \
                                                   const LstmRef<Real>&, Exec);       \
  template struct OptimizerState<Real>;                                               \
  template void adamw_step<Real>(ParamStore<Real>&, OptimizerState<Real>&);

SPANSEG_INSTANTIATE(float)
SPANSEG_INSTANTIATE(double)

#undef SPANSEG_INSTANTIATE

}  // namespace spanseg
