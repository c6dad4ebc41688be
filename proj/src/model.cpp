#include "spanseg/model.hpp"

#include <cmath>

namespace spanseg {

namespace {

template <typename Real>
void fill_uniform(Tensor<Real>& t, Rng& rng, double bound) {
  for (auto& x : t.data) x = static_cast<Real>(rng.uniform(-bound, bound));
}

}  // namespace

template <typename Real>
Model<Real>::Model(const ModelDims& dims) : dims_(dims) {
  if (dims.vocab < 2 || dims.embed == 0 || dims.hidden == 0 || dims.mlp == 0 ||
      dims.tags < 1) {
    throw ContractError("model dimensions must be positive");
  }
  const std::size_t E = dims.embed, H = dims.hidden, D = dims.mlp;
  const std::size_t B = dims.boundary_dim();
  ids_.embed = store_.add("embed", {dims.vocab, E});
  auto add_lstm = [&](const std::string& prefix) {
    LstmIds l;
    l.wx = store_.add(prefix + ".wx", {4 * H, E});
    l.wh = store_.add(prefix + ".wh", {4 * H, H});
    l.b = store_.add(prefix + ".b", {4 * H});
    return l;
  };
  ids_.fwd = add_lstm("lstm_fwd");
  ids_.bwd = add_lstm("lstm_bwd");
  auto add_mlp = [&](const std::string& prefix) {
    MlpIds m;
    m.w = store_.add(prefix + ".w", {D, B});
    m.b = store_.add(prefix + ".b", {D});
    return m;
  };
  ids_.seg_left = add_mlp("mlp_seg_left");
  ids_.seg_right = add_mlp("mlp_seg_right");
  ids_.tag_left = add_mlp("mlp_tag_left");
  ids_.tag_right = add_mlp("mlp_tag_right");
  ids_.seg_biaffine = store_.add("seg_biaffine", {D + 1, D});
  ids_.tag_biaffine = store_.add("tag_biaffine", {dims.tags, D + 1, D + 1});
}

template <typename Real>
void Model<Real>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const auto& id = ids_;
  fill_uniform(store_.value(id.embed), rng, 0.1);
  for (const LstmIds* l : {&id.fwd, &id.bwd}) {
    const double H = static_cast<double>(dims_.hidden);
    const double E = static_cast<double>(dims_.embed);
    fill_uniform(store_.value(l->wx), rng, std::sqrt(6.0 / (4 * H + E)));
    fill_uniform(store_.value(l->wh), rng, std::sqrt(6.0 / (4 * H + H)));
    auto& b = store_.value(l->b).data;
    std::fill(b.begin(), b.end(), Real(0));
  }
  for (const MlpIds* m : {&id.seg_left, &id.seg_right, &id.tag_left, &id.tag_right}) {
    const double fan = static_cast<double>(dims_.mlp + dims_.boundary_dim());
    fill_uniform(store_.value(m->w), rng, std::sqrt(6.0 / fan));
    auto& b = store_.value(m->b).data;
    std::fill(b.begin(), b.end(), Real(0));
  }
  for (ParamId p : {id.seg_biaffine, id.tag_biaffine}) {
    auto& w = store_.value(p).data;
    std::fill(w.begin(), w.end(), Real(0));
  }
}

template <typename Real>
void Model<Real>::randomize(std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& p : store_) fill_uniform(p.value, rng, scale);
}

template class Model<float>;
template class Model<double>;

}  // namespace spanseg
