#include "spanseg/scorer.hpp"

#include <algorithm>
#include <cmath>

namespace spanseg {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Real>
std::vector<Real> augment(const std::vector<Real>& rows, std::size_t count, std::size_t d) {
  std::vector<Real> out(count * (d + 1));
  for (std::size_t i = 0; i < count; ++i) {
    std::copy_n(rows.data() + i * d, d, out.data() + i * (d + 1));
    out[i * (d + 1) + d] = Real(1);
  }
  return out;
}

template <typename Real>
std::vector<Real> strip(const std::vector<Real>& aug, std::size_t count, std::size_t d) {
  std::vector<Real> out(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    std::copy_n(aug.data() + i * (d + 1), d, out.data() + i * d);
  }
  return out;
}

}  // namespace

SegScoreTable::SegScoreTable(int n, int max_len) : n_(n), max_len_(max_len) {
  if (n < 0 || max_len < 1) throw ContractError("seg table: invalid size");
  for (int k = 1; k <= std::min(n, max_len); ++k) count_ += static_cast<std::size_t>(n - k + 1);
  const auto slots = static_cast<std::size_t>(n) * static_cast<std::size_t>(max_len);
  logit_.assign(slots, 0.0);
  prob_.assign(slots, 0.5);
}

std::size_t SegScoreTable::slot(Span s) const {
  if (!valid(s)) throw ContractError("seg table: span out of range");
  return static_cast<std::size_t>(s.l) * static_cast<std::size_t>(max_len_) +
         static_cast<std::size_t>(s.length() - 1);
}

void SegScoreTable::set_logit(Span s, double logit) {
  const auto i = slot(s);
  logit_[i] = logit;
  prob_[i] = stable_sigmoid(logit);
}

void SegScoreTable::set_prob(Span s, double p) {
  const auto i = slot(s);
  prob_[i] = p;
  logit_[i] = std::log(p) - std::log1p(-p);
}

void SegScoreTable::refresh_probs() {
  for (std::size_t i = 0; i < logit_.size(); ++i) prob_[i] = stable_sigmoid(logit_[i]);
}

TagScoreTable::TagScoreTable(std::vector<Span> spans, std::size_t num_tags)
    : num_tags_(num_tags), spans_(std::move(spans)), scores_(spans_.size() * num_tags, 0.0) {
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    if (!index_.emplace(spans_[i], i).second) {
      throw ContractError("tag table: duplicate span");
    }
  }
}

std::span<const double> TagScoreTable::scores(Span s) const {
  auto it = index_.find(s);
  if (it == index_.end()) throw ContractError("tag table: span has no scores");
  return row(it->second);
}

std::span<double> TagScoreTable::scores_mut(Span s) {
  auto it = index_.find(s);
  if (it == index_.end()) throw ContractError("tag table: span has no scores");
  return row(it->second);
}

template <typename Real>
Projections<Real> project_boundaries(const BoundaryTable<Real>& table,
                                     const Model<Real>& model, const ScoreOptions& options) {
  const auto& mid = model.ids();
  const std::size_t d = model.dims().mlp;
  if (table.dim() != model.dims().boundary_dim()) {
    throw ContractError("scorer: boundary dimension does not match the model");
  }
  const std::size_t rows = table.size();
  Projections<Real> p;
  p.n = table.n();
  p.d = d;
  auto run = [&](const MlpIds& m) {
    return mlp_forward_rows(table.data(), rows, model.value(m.w), model.value(m.b),
                            options.dropout, options.train, options.rng, options.exec);
  };
  p.seg_left = run(mid.seg_left);
  p.seg_right = run(mid.seg_right);
  p.tag_left = run(mid.tag_left);
  p.tag_right = run(mid.tag_right);

  p.seg_left_aug = augment(p.seg_left.y, rows, d);
  p.seg_right_proj.resize(rows * (d + 1));
  kernels::affine_rows(options.exec, p.seg_right.y.data(), rows, d,
                       model.value(mid.seg_biaffine).ptr(), static_cast<const Real*>(nullptr),
                       d + 1, p.seg_right_proj.data());
  p.tag_left_aug = augment(p.tag_left.y, rows, d);
  p.tag_right_aug = augment(p.tag_right.y, rows, d);
  return p;
}

template <typename Real>
SegScoreTable score_all_seg(const Projections<Real>& proj, int max_span_len, Exec exec) {
  SegScoreTable out(proj.n, max_span_len);
  kernels::span_dots(exec, proj.seg_left_aug.data(), proj.seg_right_proj.data(), proj.d + 1,
                     proj.n, max_span_len, out.logits().data());
  out.refresh_probs();
  return out;
}

template <typename Real>
SegScoreTable score_all_seg(const BoundaryTable<Real>& table, const Model<Real>& model,
                            int max_span_len) {
  return score_all_seg(project_boundaries(table, model), max_span_len);
}

template <typename Real>
TagScoreTable score_all_tag(const Projections<Real>& proj, const Model<Real>& model,
                            std::span<const Span> spans, Exec exec) {
  for (const auto& s : spans) {
    if (s.l < 0 || s.l >= s.r || s.r > proj.n) throw ContractError("scorer: span out of range");
  }
  TagScoreTable out(std::vector<Span>(spans.begin(), spans.end()), model.dims().tags);
  kernels::tag_biaffine(exec, proj.tag_left_aug.data(), proj.tag_right_aug.data(), proj.d + 1,
                        model.value(model.ids().tag_biaffine).ptr(), model.dims().tags,
                        std::span<const Span>(out.spans()), out.data());
  return out;
}

template <typename Real>
TagScoreTable score_all_tag(const BoundaryTable<Real>& table, const Model<Real>& model,
                            std::span<const Span> spans) {
  return score_all_tag(project_boundaries(table, model), model, spans);
}

template <typename Real>
void scorer_backward(const BoundaryTable<Real>& table, const Projections<Real>& proj,
                     const Model<Real>& model, int max_span_len,
                     const std::vector<double>& seg_logit_grad,
                     const TagScoreTable& tag_table, const std::vector<double>& tag_grad,
                     GradBuffer<Real>& grads, BoundaryTable<Real>& table_grad, Exec exec) {
  const auto& mid = model.ids();
  const std::size_t d = proj.d;
  const std::size_t rows = table.size();
  const std::size_t width = d + 1;

  // Seg head.
  std::vector<Real> d_left_aug(rows * width, Real(0));
  std::vector<Real> d_proj(rows * width, Real(0));
  kernels::span_dots_backward(proj.seg_left_aug.data(), proj.seg_right_proj.data(), width,
                              proj.n, max_span_len, seg_logit_grad.data(), d_left_aug.data(),
                              d_proj.data());
  std::vector<Real> d_right(rows * d, Real(0));
  kernels::affine_rows_backward(exec, proj.seg_right.y.data(), rows, d,
                                model.value(mid.seg_biaffine).ptr(), width, d_proj.data(),
                                grads[mid.seg_biaffine].data(), static_cast<Real*>(nullptr),
                                d_right.data());
  const auto d_left = strip(d_left_aug, rows, d);
  mlp_backward_rows(table.data(), model.value(mid.seg_left.w), proj.seg_left, d_left.data(),
                    grads[mid.seg_left.w].data(), grads[mid.seg_left.b].data(),
                    table_grad.data(), exec);
  mlp_backward_rows(table.data(), model.value(mid.seg_right.w), proj.seg_right,
                    d_right.data(), grads[mid.seg_right.w].data(),
                    grads[mid.seg_right.b].data(), table_grad.data(), exec);

  // Tag head.
  if (tag_table.spans().empty()) return;
  std::vector<Real> d_tl_aug(rows * width, Real(0));
  std::vector<Real> d_tr_aug(rows * width, Real(0));
  kernels::tag_biaffine_backward(proj.tag_left_aug.data(), proj.tag_right_aug.data(), width,
                                 model.value(mid.tag_biaffine).ptr(), model.dims().tags,
                                 std::span<const Span>(tag_table.spans()), tag_grad.data(),
                                 grads[mid.tag_biaffine].data(), d_tl_aug.data(),
                                 d_tr_aug.data());
  const auto d_tl = strip(d_tl_aug, rows, d);
  const auto d_tr = strip(d_tr_aug, rows, d);
  mlp_backward_rows(table.data(), model.value(mid.tag_left.w), proj.tag_left, d_tl.data(),
                    grads[mid.tag_left.w].data(), grads[mid.tag_left.b].data(),
                    table_grad.data(), exec);
  mlp_backward_rows(table.data(), model.value(mid.tag_right.w), proj.tag_right, d_tr.data(),
                    grads[mid.tag_right.w].data(), grads[mid.tag_right.b].data(),
                    table_grad.data(), exec);
}

#define SPANSEG_INSTANTIATE(Real)                                                        \
  template Projections<Real> project_boundaries<Real>(const BoundaryTable<Real>&,       \
                                                      const Model<Real>&,               \
                                                      const ScoreOptions&);             \
  template SegScoreTable score_all_seg<Real>(const Projections<Real>&, int, Exec);      \
  template SegScoreTable score_all_seg<Real>(const BoundaryTable<Real>&,                \
                                             const Model<Real>&, int);                  \
  template TagScoreTable score_all_tag<Real>(const Projections<Real>&, const Model<Real>&, \
                                             std::span<const Span>, Exec);              \
  template TagScoreTable score_all_tag<Real>(const BoundaryTable<Real>&,                \
                                             const Model<Real>&, std::span<const Span>); \
  template void scorer_backward<Real>(const BoundaryTable<Real>&, const Projections<Real>&, \
                                      const Model<Real>&, int, const std::vector<double>&, \
                                      const TagScoreTable&, const std::vector<double>&,  \
                                      GradBuffer<Real>&, BoundaryTable<Real>&, Exec);

SPANSEG_INSTANTIATE(float)
SPANSEG_INSTANTIATE(double)

#undef SPANSEG_INSTANTIATE

}  // namespace spanseg
