#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "spanseg/corpus.hpp"

namespace spanseg {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t gold = 0;
  std::size_t pred = 0;
};

// Rates from counts; a zero denominator yields a zero rate.
PRF make_prf(std::size_t matched, std::size_t gold, std::size_t pred);

// Micro-averaged word F1: a predicted span matches iff the identical (l, r)
// is in gold for that sentence. Throws ContractError when the two sides
// disagree on sentence count or on a sentence's length.
PRF seg_prf(const std::vector<std::vector<Span>>& gold,
            const std::vector<std::vector<Span>>& pred);

// Same, but a match also requires the tag to agree.
PRF joint_prf(const std::vector<std::vector<TaggedSpan>>& gold,
              const std::vector<std::vector<TaggedSpan>>& pred);

// Joint F1 per sentence; a sentence where both sides are empty scores 1.
std::vector<double> per_sentence_joint_f1(const std::vector<std::vector<TaggedSpan>>& gold,
                                          const std::vector<std::vector<TaggedSpan>>& pred);

struct VocabRecall {
  std::optional<double> oov;  // nullopt when no gold word is out of vocabulary
  std::optional<double> iv;
  std::size_t oov_total = 0;
  std::size_t oov_correct = 0;
  std::size_t iv_total = 0;
  std::size_t iv_correct = 0;
};

// Gold words are split by whether their surface is a training word type;
// each part's recall counts exact (l, r, tag) matches.
VocabRecall recall_by_vocab(const std::vector<Sentence>& gold,
                            const std::vector<std::vector<TaggedSpan>>& pred,
                            const std::unordered_set<std::u32string>& train_types);

struct CasResult {
  std::optional<double> accuracy;  // nullopt when nothing matched
  std::size_t occurrences = 0;
  std::size_t correct = 0;
};

// Every (possibly overlapping) occurrence of every CAS string in the gold
// character sequences is one trial. A trial is correct iff the predicted
// word boundaries within [start, end] of the occurrence equal gold's.
CasResult cas_accuracy(const std::vector<Sentence>& gold,
                       const std::vector<std::vector<Span>>& pred,
                       const std::vector<std::u32string>& cas);

// One UTF-8 string per line; blank lines are skipped.
std::vector<std::u32string> parse_cas_list(std::string_view text);

struct SignificanceResult {
  double t = 0.0;
  std::size_t df = 0;
  double p = 1.0;  // two-sided
};

// Paired Student t-test on the differences a - b. Throws ContractError for
// unequal lengths or fewer than two pairs.
SignificanceResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct MetricsReport {
  PRF seg;
  PRF joint;
  std::optional<VocabRecall> vocab;
  std::optional<CasResult> cas;
  std::optional<SignificanceResult> significance;
};

// `key<TAB>value` lines; undefined rates print as "undefined".
std::string format_report(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);

}  // namespace spanseg
