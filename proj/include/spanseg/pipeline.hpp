#pragma once

// End-to-end inference: encode, score, threshold, post-process, tag.

#include <string>
#include <vector>

#include "spanseg/corpus.hpp"
#include "spanseg/decoder.hpp"
#include "spanseg/model.hpp"

namespace spanseg {

// Eval-mode prediction for one sentence. An empty sentence yields no spans.
// The non-word label is the model's last tag id.
template <typename Real>
std::vector<TaggedSpan> predict_ids(const Model<Real>& model, std::span<const CharId> ids,
                                    int max_span_len, Exec exec = Exec::serial);

template <typename Real>
std::vector<TaggedSpan> predict_sentence(const Model<Real>& model, const Vocab& vocab,
                                         std::u32string_view chars, int max_span_len,
                                         Exec exec = Exec::serial);

// Sentences are processed in parallel; output order follows input order and
// each result is identical to predict_sentence.
template <typename Real>
std::vector<std::vector<TaggedSpan>> predict_batch(const Model<Real>& model,
                                                   const Vocab& vocab,
                                                   const std::vector<std::u32string>& sentences,
                                                   int max_span_len, bool parallel = true);

}  // namespace spanseg
