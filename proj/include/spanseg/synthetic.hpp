#pragma once

// Synthetic tagged corpora for smoke tests and demos. Both generators emit
// corpus text and parse it, so the results carry ordinary line numbers.

#include <cstdint>
#include <string>

#include "spanseg/corpus.hpp"

namespace spanseg {

// 20 sentences of at most 12 characters over 4 POS tags; word choice and
// order follow a fixed arithmetic pattern, so the text never changes.
std::string memorization_text();

// `sentences` lines from a tag bigram chain over a fixed per-tag lexicon with
// Zipf-like word frequencies. Characters are shared between words of a tag,
// so boundaries must be inferred from context.
std::string lexicon_text(std::size_t sentences, std::uint64_t seed);

struct SyntheticSplits {
  Corpus train, dev, test;
};

// Consecutive 80/10/10 split of lexicon_text(sentences, seed).
SyntheticSplits lexicon_splits(std::size_t sentences, std::uint64_t seed, TagSet& tags);

}  // namespace spanseg
