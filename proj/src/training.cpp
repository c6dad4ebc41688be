#include "spanseg/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "spanseg/encoder.hpp"
#include "spanseg/eval.hpp"
#include "spanseg/nn.hpp"
#include "spanseg/pipeline.hpp"

namespace spanseg {

namespace {

std::vector<char> gold_labels(const SegScoreTable& scores, const std::vector<Span>& gold) {
  std::vector<char> y(scores.logits().size(), 0);
  for (const auto& s : gold) {
    if (scores.valid(s)) y[scores.slot(s)] = 1;
  }
  return y;
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<TaggedSpan> gold_tagged(const Sentence& s) { return words_to_spans(s); }

}  // namespace

double loss_seg(const SegScoreTable& scores, const std::vector<Span>& gold) {
  if (scores.count() == 0) return 0.0;
  const auto y = gold_labels(scores, gold);
  double total = 0.0;
  scores.for_each([&](Span s, double p) {
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    total -= y[scores.slot(s)] ? std::log(pc) : std::log(1.0 - pc);
  });
  return total / static_cast<double>(scores.count());
}

std::vector<double> loss_seg_grad(const SegScoreTable& scores, const std::vector<Span>& gold) {
  std::vector<double> g(scores.logits().size(), 0.0);
  if (scores.count() == 0) return g;
  const auto y = gold_labels(scores, gold);
  const double inv = 1.0 / static_cast<double>(scores.count());
  scores.for_each([&](Span s, double p) {
    const auto i = scores.slot(s);
    g[i] = (p - (y[i] ? 1.0 : 0.0)) * inv;
  });
  return g;
}

std::vector<TagId> make_tag_targets(const Segmentation& segmentation,
                                    const std::vector<TaggedSpan>& gold, TagId non_word) {
  std::vector<TagId> out;
  out.reserve(segmentation.size());
  for (const auto& s : segmentation) {
    TagId t = non_word;
    for (const auto& g : gold) {
      if (g.span == s) {
        t = g.tag;
        break;
      }
    }
    out.push_back(t);
  }
  return out;
}

double loss_tag(const TagScoreTable& scores, const std::vector<TagId>& targets) {
  const auto& spans = scores.spans();
  if (targets.size() != spans.size()) throw ContractError("loss_tag: one target per span required");
  if (spans.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto row = scores.row(i);
    total += log_sum_exp(row) - row[static_cast<std::size_t>(targets[i])];
  }
  return total / static_cast<double>(spans.size());
}

std::vector<double> loss_tag_grad(const TagScoreTable& scores, const std::vector<TagId>& targets) {
  const auto& spans = scores.spans();
  const std::size_t T = scores.num_tags();
  std::vector<double> g(spans.size() * T, 0.0);
  if (spans.empty()) return g;
  const double inv = 1.0 / static_cast<double>(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto row = scores.row(i);
    const double lse = log_sum_exp(row);
    for (std::size_t t = 0; t < T; ++t) g[i * T + t] = std::exp(row[t] - lse) * inv;
    g[i * T + static_cast<std::size_t>(targets[i])] -= inv;
  }
  return g;
}

template <typename Real>
SentenceLoss compute_loss(std::span<const CharId> ids, const std::vector<TaggedSpan>& gold,
                          const Model<Real>& model, const LossOptions& options,
                          GradBuffer<Real>* grads, double grad_scale) {
  const int n = static_cast<int>(ids.size());
  EncodeOptions eopt{options.train, options.dropout, options.rng, options.exec};
  EncoderTrace<Real> trace;
  const auto table = encode_ids(ids, model, eopt, grads ? &trace : nullptr);
  ScoreOptions sopt{options.train, options.dropout, options.rng, options.exec};
  const auto proj = project_boundaries(table, model, sopt);
  const auto seg = score_all_seg(proj, options.max_span_len, options.exec);

  SentenceLoss out;
  out.segmentation = options.frozen ? *options.frozen : post_process(threshold_candidates(seg), n);
  const auto tag_scores = score_all_tag(proj, model, out.segmentation, options.exec);
  const auto non_word = static_cast<TagId>(model.dims().tags - 1);
  const auto targets = make_tag_targets(out.segmentation, gold, non_word);

  const auto gold_spans = untagged(gold);
  out.loss.j_seg = loss_seg(seg, gold_spans);
  out.loss.j_tag = loss_tag(tag_scores, targets);
  out.loss.j_total = out.loss.j_seg + out.loss.j_tag;

  if (grads) {
    auto seg_grad = loss_seg_grad(seg, gold_spans);
    auto tag_grad = loss_tag_grad(tag_scores, targets);
    for (auto& g : seg_grad) g *= grad_scale;
    for (auto& g : tag_grad) g *= grad_scale;
    BoundaryTable<Real> table_grad(table.n(), table.dim());
    scorer_backward(table, proj, model, options.max_span_len, seg_grad, tag_scores, tag_grad,
                    *grads, table_grad, options.exec);
    encode_backward(trace, model, table_grad, *grads, options.exec);
  }
  return out;
}

std::vector<TrainExample> make_examples(const Corpus& corpus, const Vocab& vocab) {
  std::vector<TrainExample> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences) {
    out.push_back({vocab.encode(s.chars), gold_tagged(s)});
  }
  return out;
}

template <typename Real>
LossBreakdown batch_loss(const Model<Real>& model, std::span<const TrainExample* const> batch,
                         const LossOptions& options, std::uint64_t batch_seed,
                         GradBuffer<Real>* grads, std::size_t groups, bool parallel) {
  const std::size_t B = batch.size();
  std::size_t live = 0;
  for (const auto* ex : batch) live += ex->ids.empty() ? 0 : 1;
  LossBreakdown total;
  if (live == 0) return total;
  const double scale = 1.0 / static_cast<double>(live);

  const std::size_t G = std::max<std::size_t>(1, std::min(groups, B));
  std::vector<GradBuffer<Real>> partial;
  if (grads) partial.assign(G, model.params().make_grad_buffer());
  std::vector<LossBreakdown> per(B);

  const auto G64 = static_cast<std::int64_t>(G);
#pragma omp parallel for schedule(static, 1) if (parallel)
  for (std::int64_t g = 0; g < G64; ++g) {
    for (std::size_t i = static_cast<std::size_t>(g); i < B; i += G) {
      const auto& ex = *batch[i];
      if (ex.ids.empty()) continue;
      Rng rng(Rng::mix(batch_seed, i));
      LossOptions opt = options;
      opt.rng = &rng;
      per[i] = compute_loss<Real>(ex.ids, ex.gold, model, opt,
                                  grads ? &partial[static_cast<std::size_t>(g)] : nullptr, scale)
                   .loss;
    }
  }

  for (const auto& l : per) {
    total.j_seg += l.j_seg;
    total.j_tag += l.j_tag;
  }
  total.j_seg *= scale;
  total.j_tag *= scale;
  total.j_total = total.j_seg + total.j_tag;

  if (grads) {
    for (const auto& p : partial) {
      for (std::size_t k = 0; k < p.slots.size(); ++k) {
        auto& dst = (*grads)[k];
        const auto& src = p.slots[k];
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
      }
    }
  }
  return total;
}

ModelDims dims_for(const TrainConfig& config, const Vocab& vocab, const TagSet& tags) {
  ModelDims d;
  d.vocab = vocab.size();
  d.embed = config.embed_dim;
  d.hidden = config.hidden;
  d.mlp = config.mlp;
  d.tags = tags.size();
  return d;
}

TrainResult train(const Corpus& train_corpus, const Corpus& dev_corpus, const Vocab& vocab,
                  const TagSet& tags, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  validate(config);
  if (tags.pos_count() == 0) throw ContractError("train: tag set has no POS tags");
  auto examples = make_examples(train_corpus, vocab);
  std::erase_if(examples, [](const TrainExample& e) { return e.ids.empty(); });
  if (examples.empty()) throw ContractError("train: training corpus has no non-empty sentences");

  std::vector<std::u32string> dev_chars;
  std::vector<std::vector<TaggedSpan>> dev_gold;
  std::vector<std::vector<Span>> dev_gold_spans;
  for (const auto& s : dev_corpus.sentences) {
    dev_chars.push_back(s.chars);
    dev_gold.push_back(words_to_spans(s));
    dev_gold_spans.push_back(untagged(dev_gold.back()));
  }

  const auto dims = dims_for(config, vocab, tags);
  Model<float> model(dims);
  model.initialize(config.seed);
  AdamWConfig ac{config.lr, config.beta1, config.beta2, config.eps, config.weight_decay};
  auto state = OptimizerState<float>::init(model.params(), ac);
  auto grads = model.params().make_grad_buffer();

  TrainResult result{model, model, {}, 0, -1.0, false};
  Rng order_rng(Rng::mix(config.seed, 0x6f72646572ULL));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  LossOptions lopt;
  lopt.max_span_len = config.max_span_len;
  lopt.train = true;
  lopt.dropout = config.dropout;

  int since_improvement = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double sum_seg = 0.0, sum_tag = 0.0;
    std::size_t seen = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<const TrainExample*> batch;
      for (std::size_t k = start; k < stop; ++k) batch.push_back(&examples[order[k]]);

      grads.zero();
      const auto seed = Rng::mix(Rng::mix(config.seed, static_cast<std::uint64_t>(epoch)),
                                 batch_index);
      const auto loss = batch_loss<float>(model, batch, lopt, seed, &grads, config.grad_groups);
      if (!std::isfinite(loss.j_total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + " (j_seg=" + std::to_string(loss.j_seg) +
                           ", j_tag=" + std::to_string(loss.j_tag) + ")");
      }
      model.params().zero_grad();
      model.params().accumulate(grads);
      adamw_step(model.params(), state);
      sum_seg += loss.j_seg * static_cast<double>(batch.size());
      sum_tag += loss.j_tag * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.j_seg = sum_seg / static_cast<double>(seen);
    rec.j_tag = sum_tag / static_cast<double>(seen);
    const auto pred = predict_batch(model, vocab, dev_chars, config.max_span_len);
    std::vector<std::vector<Span>> pred_spans;
    pred_spans.reserve(pred.size());
    for (const auto& p : pred) pred_spans.push_back(untagged(p));
    rec.dev_seg_f1 = seg_prf(dev_gold_spans, pred_spans).f1;
    rec.dev_tag_f1 = joint_prf(dev_gold, pred).f1;
    rec.improved = rec.dev_tag_f1 > result.best_dev_f1;
    if (rec.improved) {
      result.best = model;
      result.best_epoch = epoch;
      result.best_dev_f1 = rec.dev_tag_f1;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (since_improvement > config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  result.final_model = model;
  return result;
}

std::string format_log_header(std::size_t parameter_count) {
  return "# parameters\t" + std::to_string(parameter_count) +
         "\nepoch\tj_seg\tj_tag\tdev_seg_f1\tdev_tag_f1\n";
}

std::string format_epoch(const EpochRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d\t%.6f\t%.6f\t%.6f\t%.6f\n", r.epoch, r.j_seg, r.j_tag,
                r.dev_seg_f1, r.dev_tag_f1);
  return buf;
}

#define SPANSEG_INSTANTIATE(Real)                                                         \
  template SentenceLoss compute_loss<Real>(std::span<const CharId>,                      \
                                           const std::vector<TaggedSpan>&,               \
                                           const Model<Real>&, const LossOptions&,       \
                                           GradBuffer<Real>*, double);                   \
  template LossBreakdown batch_loss<Real>(const Model<Real>&,                            \
                                          std::span<const TrainExample* const>,          \
                                          const LossOptions&, std::uint64_t,             \
                                          GradBuffer<Real>*, std::size_t, bool);

SPANSEG_INSTANTIATE(float)
SPANSEG_INSTANTIATE(double)

#undef SPANSEG_INSTANTIATE

}  // namespace spanseg
