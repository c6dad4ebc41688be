#include "spanseg/decoder.hpp"

#include <algorithm>

namespace spanseg {

CandidateSet threshold_candidates(const SegScoreTable& scores) {
  CandidateSet out;
  scores.for_each([&](Span s, double p) {
    if (p > 0.5) out.push_back({s, p});
  });
  return out;
}

Segmentation post_process(const CandidateSet& candidates, int n) {
  CandidateSet order;
  order.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.span.l >= 0 && c.span.l < c.span.r && c.span.r <= n) order.push_back(c);
  }
  std::sort(order.begin(), order.end(), [](const Candidate& a, const Candidate& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    if (a.span.l != b.span.l) return a.span.l < b.span.l;
    return a.span.r < b.span.r;
  });

  // covered[i] marks character i as owned by an accepted span; two half-open
  // spans overlap iff they share a character.
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  Segmentation accepted;
  for (const auto& c : order) {
    bool free = true;
    for (int i = c.span.l; i < c.span.r && free; ++i) free = !covered[static_cast<std::size_t>(i)];
    if (!free) continue;
    for (int i = c.span.l; i < c.span.r; ++i) covered[static_cast<std::size_t>(i)] = 1;
    accepted.push_back(c.span);
  }
  for (int i = 0; i < n; ++i) {
    if (!covered[static_cast<std::size_t>(i)]) accepted.push_back({i, i + 1});
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

std::vector<TaggedSpan> assign_tags(const Segmentation& segmentation,
                                    const TagScoreTable& tag_scores, TagId non_word) {
  std::vector<TaggedSpan> out;
  out.reserve(segmentation.size());
  for (const auto& s : segmentation) {
    const auto scores = tag_scores.scores(s);
    TagId best = -1;
    for (std::size_t t = 0; t < scores.size(); ++t) {
      const auto id = static_cast<TagId>(t);
      if (id == non_word) continue;
      if (best < 0 || scores[t] > scores[static_cast<std::size_t>(best)]) best = id;
    }
    if (best < 0) throw ContractError("assign_tags: tag set has no POS tags");
    out.push_back({s, best});
  }
  return out;
}

}  // namespace spanseg
