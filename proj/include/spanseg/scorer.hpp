#pragma once

// Biaffine span scoring over boundary representations.
//
//   seg(l, r)    = sigmoid([u_l; 1]^T W v_r)            W is (d+1) x d
//   tag(l, r)[t] = [u'_l; 1]^T W_t [v'_r; 1]            W_t is (d+1) x (d+1)
//
// with u = MLP_seg_left(boundary l), v = MLP_seg_right(boundary r) and the
// primed vectors from the two tag MLPs. Only the left operand of the seg
// form is augmented with the constant 1.

#include <map>
#include <span>
#include <vector>

#include "spanseg/corpus.hpp"
#include "spanseg/encoder.hpp"
#include "spanseg/model.hpp"

namespace spanseg {

inline constexpr int kDefaultMaxSpanLen = 7;

// Seg logits and probabilities for every span (l, r) with 0 <= l < r <= n and
// r - l <= max_len. Storage slot of (l, l + k) is l * max_len + k - 1.
class SegScoreTable {
 public:
  SegScoreTable() = default;
  SegScoreTable(int n, int max_len);

  int n() const noexcept { return n_; }
  int max_len() const noexcept { return max_len_; }
  bool valid(Span s) const noexcept {
    return s.l >= 0 && s.l < s.r && s.r <= n_ && s.length() <= max_len_;
  }
  std::size_t slot(Span s) const;
  // Number of scored spans.
  std::size_t count() const noexcept { return count_; }

  double prob(Span s) const { return prob_[slot(s)]; }
  double logit(Span s) const { return logit_[slot(s)]; }
  void set_logit(Span s, double logit);
  // Sets the probability directly (logit becomes log(p / (1 - p))).
  void set_prob(Span s, double p);

  std::vector<double>& logits() noexcept { return logit_; }
  const std::vector<double>& logits() const noexcept { return logit_; }
  // Recomputes every probability from the stored logits.
  void refresh_probs();

  // Visits spans in (l asc, r asc) order.
  template <typename F>
  void for_each(F&& f) const {
    for (int l = 0; l < n_; ++l) {
      for (int k = 1; k <= max_len_ && l + k <= n_; ++k) {
        const Span s{l, l + k};
        f(s, prob_[slot(s)]);
      }
    }
  }

 private:
  int n_ = 0;
  int max_len_ = 0;
  std::size_t count_ = 0;
  std::vector<double> logit_;
  std::vector<double> prob_;
};

// Unnormalized per-tag scores for a requested set of spans.
class TagScoreTable {
 public:
  TagScoreTable() = default;
  TagScoreTable(std::vector<Span> spans, std::size_t num_tags);

  std::size_t num_tags() const noexcept { return num_tags_; }
  const std::vector<Span>& spans() const noexcept { return spans_; }
  bool contains(Span s) const { return index_.count(s) != 0; }
  // Throws ContractError when the span was not scored.
  std::span<const double> scores(Span s) const;
  std::span<double> scores_mut(Span s);
  std::span<double> row(std::size_t i) {
    return std::span<double>(scores_).subspan(i * num_tags_, num_tags_);
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(scores_).subspan(i * num_tags_, num_tags_);
  }
  double* data() noexcept { return scores_.data(); }

 private:
  std::size_t num_tags_ = 0;
  std::vector<Span> spans_;
  std::map<Span, std::size_t> index_;
  std::vector<double> scores_;
};

struct ScoreOptions {
  bool train = false;
  double dropout = 0.0;  // MLP output dropout, train mode only
  Rng* rng = nullptr;
  Exec exec = Exec::serial;
};

// MLP outputs for every boundary row, plus the augmented operands the two
// biaffine forms consume.
template <typename Real>
struct Projections {
  int n = 0;
  std::size_t d = 0;
  MlpTrace<Real> seg_left, seg_right, tag_left, tag_right;  // (n+1) x d
  std::vector<Real> seg_left_aug;    // (n+1) x (d+1): [u; 1]
  std::vector<Real> seg_right_proj;  // (n+1) x (d+1): W v
  std::vector<Real> tag_left_aug;    // (n+1) x (d+1)
  std::vector<Real> tag_right_aug;   // (n+1) x (d+1)
};

template <typename Real>
Projections<Real> project_boundaries(const BoundaryTable<Real>& table,
                                     const Model<Real>& model,
                                     const ScoreOptions& options = {});

template <typename Real>
SegScoreTable score_all_seg(const Projections<Real>& proj, int max_span_len,
                            Exec exec = Exec::serial);

// Eval-mode convenience: projects and scores in one call.
template <typename Real>
SegScoreTable score_all_seg(const BoundaryTable<Real>& table, const Model<Real>& model,
                            int max_span_len = kDefaultMaxSpanLen);

// Throws ContractError for spans outside 0 <= l < r <= n.
template <typename Real>
TagScoreTable score_all_tag(const Projections<Real>& proj, const Model<Real>& model,
                            std::span<const Span> spans, Exec exec = Exec::serial);

template <typename Real>
TagScoreTable score_all_tag(const BoundaryTable<Real>& table, const Model<Real>& model,
                            std::span<const Span> spans);

// Backpropagates dLoss/dlogit of the seg table (same slot layout as
// SegScoreTable::logits) and dLoss/dscore of the tag table (row-major, one
// row per tag-table span) into parameter gradients and boundary gradients.
template <typename Real>
void scorer_backward(const BoundaryTable<Real>& table, const Projections<Real>& proj,
                     const Model<Real>& model, int max_span_len,
                     const std::vector<double>& seg_logit_grad,
                     const TagScoreTable& tag_table, const std::vector<double>& tag_grad,
                     GradBuffer<Real>& grads, BoundaryTable<Real>& table_grad,
                     Exec exec = Exec::serial);

}  // namespace spanseg
