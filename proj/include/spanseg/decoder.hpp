#pragma once

#include <vector>

#include "spanseg/corpus.hpp"
#include "spanseg/scorer.hpp"

namespace spanseg {

struct Candidate {
  Span span;
  double prob = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

using CandidateSet = std::vector<Candidate>;

// Sorted by l, non-overlapping, exact partition of [0, n).
using Segmentation = std::vector<Span>;

// Spans whose seg probability is strictly greater than 0.5, in (l, r) order.
CandidateSet threshold_candidates(const SegScoreTable& scores);

// Greedy overlap resolution followed by gap filling. Candidates are visited
// by probability descending, then l ascending, then r ascending; a span is
// accepted iff it overlaps no accepted span. Uncovered characters become
// single-character spans. Candidates outside [0, n] are ignored.
Segmentation post_process(const CandidateSet& candidates, int n);

// Argmax over the tag set per span, lowest id winning ties. A non-word
// argmax is replaced by the best POS tag, so the output never carries
// `non_word`. Throws ContractError when a span has no score vector.
std::vector<TaggedSpan> assign_tags(const Segmentation& segmentation,
                                    const TagScoreTable& tag_scores, TagId non_word);

}  // namespace spanseg
