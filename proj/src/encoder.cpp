#include "spanseg/encoder.hpp"

#include <algorithm>

namespace spanseg {

template <typename Real>
BoundaryTable<Real> encode_ids(std::span<const CharId> ids, const Model<Real>& model,
                               const EncodeOptions& options, EncoderTrace<Real>* trace) {
  if (ids.empty()) throw ContractError("encode: empty sentence");
  const auto& dims = model.dims();
  const auto& mid = model.ids();
  const std::size_t n = ids.size();
  const std::size_t E = dims.embed;
  const std::size_t H = dims.hidden;
  const auto& table = model.value(mid.embed);

  EncoderTrace<Real> local;
  EncoderTrace<Real>& t = trace ? *trace : local;
  t.ids.assign(ids.begin(), ids.end());
  t.inputs.resize(n * E);
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<std::size_t>(ids[i]);
    if (id >= dims.vocab) throw ContractError("encode: character id out of range");
    std::copy_n(table.ptr() + id * E, E, t.inputs.data() + i * E);
  }
  t.input_mask.clear();
  if (options.train && options.dropout > 0.0) {
    if (!options.rng) throw ContractError("encode: dropout requires a generator");
    dropout_mask(t.inputs.size(), options.dropout, *options.rng, t.input_mask);
    for (std::size_t k = 0; k < t.inputs.size(); ++k) t.inputs[k] *= t.input_mask[k];
  }

  t.states = bilstm_forward(t.inputs.data(), n, model.lstm(mid.fwd), model.lstm(mid.bwd),
                            options.exec);

  const int nn = static_cast<int>(n);
  BoundaryTable<Real> out(nn, 2 * H);
  for (int l = 0; l <= nn; ++l) {
    auto row = out.row(l);
    if (l > 0) {
      auto f = t.states.fwd.state(static_cast<std::size_t>(l - 1));
      std::copy(f.begin(), f.end(), row.begin());
    }
    if (l < nn) {
      auto b = t.states.bwd.state(static_cast<std::size_t>(l));
      std::copy(b.begin(), b.end(), row.begin() + static_cast<std::ptrdiff_t>(H));
    }
  }
  return out;
}

template <typename Real>
BoundaryTable<Real> encode_sentence(std::u32string_view chars, const Vocab& vocab,
                                    const Model<Real>& model, const EncodeOptions& options) {
  const auto ids = vocab.encode(chars);
  return encode_ids<Real>(ids, model, options);
}

template <typename Real>
void encode_backward(const EncoderTrace<Real>& t, const Model<Real>& model,
                     const BoundaryTable<Real>& grad, GradBuffer<Real>& grads, Exec exec) {
  const auto& dims = model.dims();
  const auto& mid = model.ids();
  const std::size_t n = t.ids.size();
  const std::size_t E = dims.embed;
  const std::size_t H = dims.hidden;
  const int nn = static_cast<int>(n);

  std::vector<Real> dh_fwd(n * H, Real(0));
  std::vector<Real> dh_bwd(n * H, Real(0));
  for (int l = 0; l <= nn; ++l) {
    auto row = grad.boundary(l);
    if (l > 0) std::copy_n(row.begin(), H, dh_fwd.begin() + static_cast<std::ptrdiff_t>((l - 1) * H));
    if (l < nn) {
      std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(H), H,
                  dh_bwd.begin() + static_cast<std::ptrdiff_t>(l * H));
    }
  }

  std::vector<Real> dx(n * E, Real(0));
  lstm_backward(t.states.fwd, t.inputs.data(), model.lstm(mid.fwd), dh_fwd.data(),
                grads[mid.fwd.wx].data(), grads[mid.fwd.wh].data(), grads[mid.fwd.b].data(),
                dx.data(), exec);
  lstm_backward(t.states.bwd, t.inputs.data(), model.lstm(mid.bwd), dh_bwd.data(),
                grads[mid.bwd.wx].data(), grads[mid.bwd.wh].data(), grads[mid.bwd.b].data(),
                dx.data(), exec);
  if (!t.input_mask.empty()) {
    for (std::size_t k = 0; k < dx.size(); ++k) dx[k] *= t.input_mask[k];
  }
  auto& dembed = grads[mid.embed];
  for (std::size_t i = 0; i < n; ++i) {
    Real* dst = dembed.data() + static_cast<std::size_t>(t.ids[i]) * E;
    const Real* src = dx.data() + i * E;
    for (std::size_t j = 0; j < E; ++j) dst[j] += src[j];
  }
}

#define SPANSEG_INSTANTIATE(Real)                                                      \
  template BoundaryTable<Real> encode_ids<Real>(std::span<const CharId>,              \
                                                const Model<Real>&, const EncodeOptions&, \
                                                EncoderTrace<Real>*);                  \
  template BoundaryTable<Real> encode_sentence<Real>(std::u32string_view, const Vocab&, \
                                                     const Model<Real>&,               \
                                                     const EncodeOptions&);            \
  template void encode_backward<Real>(const EncoderTrace<Real>&, const Model<Real>&,  \
                                      const BoundaryTable<Real>&, GradBuffer<Real>&, Exec);

SPANSEG_INSTANTIATE(float)
SPANSEG_INSTANTIATE(double)

#undef SPANSEG_INSTANTIATE

}  // namespace spanseg
