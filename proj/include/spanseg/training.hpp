#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spanseg/config.hpp"
#include "spanseg/corpus.hpp"
#include "spanseg/decoder.hpp"
#include "spanseg/model.hpp"
#include "spanseg/scorer.hpp"

namespace spanseg {

inline constexpr double kProbClamp = 1e-7;

struct LossBreakdown {
  double j_seg = 0.0;
  double j_tag = 0.0;
  double j_total = 0.0;
};

// Mean binary cross-entropy over every scored span; a span is positive iff it
// is in `gold`. Gold spans longer than the table's max_len are not scored and
// therefore not positives. Probabilities are clamped to [1e-7, 1 - 1e-7].
double loss_seg(const SegScoreTable& scores, const std::vector<Span>& gold);

// dJ_seg/dlogit per slot of `scores` (zero for unused slots): (p - y) / count.
// This is the derivative of the unclamped loss, so saturated spans keep a
// gradient.
std::vector<double> loss_seg_grad(const SegScoreTable& scores, const std::vector<Span>& gold);

// Gold tag for spans matching a gold (l, r) exactly, `non_word` otherwise.
std::vector<TagId> make_tag_targets(const Segmentation& segmentation,
                                    const std::vector<TaggedSpan>& gold, TagId non_word);

// Mean softmax cross-entropy over the table's spans; targets[i] belongs to
// spans()[i]. Returns 0 for an empty table.
double loss_tag(const TagScoreTable& scores, const std::vector<TagId>& targets);

// dJ_tag/dscore, row-major like the table.
std::vector<double> loss_tag_grad(const TagScoreTable& scores, const std::vector<TagId>& targets);

struct LossOptions {
  int max_span_len = kDefaultMaxSpanLen;
  bool train = false;
  double dropout = 0.0;
  Rng* rng = nullptr;
  // When set, replaces the decoded segmentation (the gradient checks hold it
  // fixed while parameters are perturbed).
  const Segmentation* frozen = nullptr;
  Exec exec = Exec::serial;
};

struct SentenceLoss {
  LossBreakdown loss;
  Segmentation segmentation;
};

// Full forward pass for one non-empty sentence. The segmentation used for
// the tag loss is decoded from the current seg scores; no gradient flows
// through that decode. If `grads` is given, gradients of
// grad_scale * j_total are accumulated into it.
template <typename Real>
SentenceLoss compute_loss(std::span<const CharId> ids, const std::vector<TaggedSpan>& gold,
                          const Model<Real>& model, const LossOptions& options,
                          GradBuffer<Real>* grads = nullptr, double grad_scale = 1.0);

struct TrainExample {
  std::vector<CharId> ids;
  std::vector<TaggedSpan> gold;
};

std::vector<TrainExample> make_examples(const Corpus& corpus, const Vocab& vocab);

// Mean loss over `batch` (empty sentences are skipped). Sentence i of the
// batch draws dropout noise from Rng(mix(batch_seed, i)). Gradients of the
// mean are accumulated into `grads` when given: sentences are split
// round-robin into `groups` partial sums that are added in group order, so
// the result is independent of scheduling. With parallel == false the same
// arithmetic runs on one thread.
template <typename Real>
LossBreakdown batch_loss(const Model<Real>& model, std::span<const TrainExample* const> batch,
                         const LossOptions& options, std::uint64_t batch_seed,
                         GradBuffer<Real>* grads, std::size_t groups = 4,
                         bool parallel = true);

struct EpochRecord {
  int epoch = 0;
  double j_seg = 0.0;
  double j_tag = 0.0;
  double dev_seg_f1 = 0.0;
  double dev_tag_f1 = 0.0;
  bool improved = false;
};

struct TrainResult {
  Model<float> best;
  Model<float> final_model;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_dev_f1 = -1.0;
  bool early_stopped = false;
};

// Trains from scratch. Dev joint F1 after each epoch picks the best
// checkpoint; training stops at max_epochs or once the number of epochs
// without improvement exceeds `patience`. Throws NumericError on a
// non-finite loss or gradient.
TrainResult train(const Corpus& train_corpus, const Corpus& dev_corpus, const Vocab& vocab,
                  const TagSet& tags, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

ModelDims dims_for(const TrainConfig& config, const Vocab& vocab, const TagSet& tags);

// Training log text: a header with the parameter count, then one
// tab-separated record per epoch.
std::string format_log_header(std::size_t parameter_count);
std::string format_epoch(const EpochRecord& record);

}  // namespace spanseg
