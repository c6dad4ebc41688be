#pragma once

#include <cstdint>
#include <string>

#include "spanseg/nn.hpp"
#include "spanseg/tensor.hpp"

namespace spanseg {

struct ModelDims {
  std::size_t vocab = 0;   // including PAD and UNK
  std::size_t embed = 64;
  std::size_t hidden = 200;  // per LSTM direction
  std::size_t mlp = 500;     // d, the output size of all four MLPs
  std::size_t tags = 0;      // |T|, including the non-word label

  std::size_t boundary_dim() const { return 2 * hidden; }
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct LstmIds {
  ParamId wx, wh, b;
};

struct MlpIds {
  ParamId w, b;
};

// Parameter ids. Encoder weights are shared by both heads; the seg head owns
// mlp_seg_* and seg_biaffine, the tag head owns mlp_tag_* and tag_biaffine.
struct ModelIds {
  ParamId embed;
  LstmIds fwd, bwd;
  MlpIds seg_left, seg_right, tag_left, tag_right;
  ParamId seg_biaffine;  // (d+1) x d
  ParamId tag_biaffine;  // |T| x (d+1) x (d+1)
};

template <typename Real>
class Model {
 public:
  // Parameters are allocated and zero-filled; call initialize() for the
  // training initialization.
  explicit Model(const ModelDims& dims);

  // Embeddings ~ U(+-0.1); LSTM, MLP weights Glorot-uniform; biases zero;
  // biaffine tensors zero.
  void initialize(std::uint64_t seed);
  // Every parameter ~ U(+-scale), biaffine tensors included. Used by the
  // gradient checks, where zero tensors would hide whole gradient paths.
  void randomize(std::uint64_t seed, double scale);

  const ModelDims& dims() const noexcept { return dims_; }
  const ModelIds& ids() const noexcept { return ids_; }
  ParamStore<Real>& params() noexcept { return store_; }
  const ParamStore<Real>& params() const noexcept { return store_; }

  const Tensor<Real>& value(ParamId id) const { return store_.value(id); }
  LstmRef<Real> lstm(const LstmIds& ids) const {
    return {store_.value(ids.wx), store_.value(ids.wh), store_.value(ids.b)};
  }

  template <typename Other>
  Model<Other> cast() const {
    Model<Other> out(dims_);
    auto converted = store_.template cast<Other>();
    for (std::size_t i = 0; i < converted.size(); ++i) {
      out.params().value(i) = converted.value(i);
    }
    return out;
  }

 private:
  ModelDims dims_;
  ParamStore<Real> store_;
  ModelIds ids_{};
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace spanseg
