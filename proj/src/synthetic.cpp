#include "spanseg/synthetic.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "spanseg/tensor.hpp"
#include "spanseg/utf8.hpp"

namespace spanseg {

namespace {

constexpr std::array<const char*, 4> kTags = {"NN", "VV", "AD", "PU"};

std::string cjk(std::size_t i) { return utf8::encode(static_cast<char32_t>(0x4E00 + i)); }

}  // namespace

std::string memorization_text() {
  // Three words per tag, lengths 1..3, disjoint characters.
  std::array<std::array<std::string, 3>, 4> lexicon;
  std::size_t next = 0;
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t w = 0; w < 3; ++w) {
      for (std::size_t k = 0; k <= w; ++k) lexicon[t][w] += cjk(next++);
    }
  }
  std::string out;
  for (std::size_t i = 0; i < 20; ++i) {
    std::size_t chars = 0;
    std::string line;
    for (std::size_t j = 0; j < 3 + i % 3; ++j) {
      const std::size_t t = (i + j) % 4;
      const std::size_t w = (i * j + j + i / 4) % 3;
      if (chars + w + 1 > 12) break;
      chars += w + 1;
      if (!line.empty()) line += ' ';
      line += lexicon[t][w] + "_" + kTags[t];
    }
    out += line + '\n';
  }
  return out;
}

std::string lexicon_text(std::size_t sentences, std::uint64_t seed) {
  constexpr std::size_t kWordsPerTag = 30;
  constexpr std::size_t kPoolPerTag = 16;
  // Lexicon is fixed; only the sentence stream depends on the seed.
  Rng lex_rng(0x6c6578);
  std::array<std::vector<std::string>, 4> lexicon;
  for (std::size_t t = 0; t < 4; ++t) {
    const std::size_t words = t == 3 ? 4 : kWordsPerTag;
    while (lexicon[t].size() < words) {
      const std::size_t len = t == 3 ? 1 : 1 + lex_rng.below(3);
      std::string w;
      for (std::size_t k = 0; k < len; ++k) w += cjk(t * kPoolPerTag + lex_rng.below(kPoolPerTag));
      bool dup = false;
      for (const auto& e : lexicon[t]) dup = dup || e == w;
      if (!dup) lexicon[t].push_back(w);
    }
  }
  // Rows: current tag, columns: next tag; PU ends the sentence.
  constexpr double kTrans[4][4] = {
      {0.15, 0.55, 0.10, 0.20},
      {0.60, 0.05, 0.20, 0.15},
      {0.30, 0.60, 0.05, 0.05},
      {0.50, 0.30, 0.20, 0.00},
  };
  auto draw = [](Rng& rng, const double* probs, std::size_t n) {
    double u = rng.uniform();
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (u < probs[k]) return k;
      u -= probs[k];
    }
    return n - 1;
  };
  auto draw_word = [&](Rng& rng, std::size_t t) -> const std::string& {
    const auto& words = lexicon[t];
    std::vector<double> w(words.size());
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) total += w[k] = 1.0 / static_cast<double>(k + 1);
    for (auto& x : w) x /= total;
    return words[draw(rng, w.data(), w.size())];
  };

  Rng rng(seed);
  std::string out;
  for (std::size_t s = 0; s < sentences; ++s) {
    std::string line;
    std::size_t tag = rng.below(3);
    for (std::size_t len = 0; len < 12; ++len) {
      if (!line.empty()) line += ' ';
      line += draw_word(rng, tag) + "_" + kTags[tag];
      if (tag == 3 && len >= 2) break;
      tag = draw(rng, kTrans[tag], 4);
    }
    out += line + '\n';
  }
  return out;
}

SyntheticSplits lexicon_splits(std::size_t sentences, std::uint64_t seed, TagSet& tags) {
  auto all = parse_corpus(lexicon_text(sentences, seed), tags, "synthetic");
  SyntheticSplits out;
  const std::size_t n_train = sentences * 8 / 10;
  const std::size_t n_dev = sentences / 10;
  for (std::size_t i = 0; i < all.sentences.size(); ++i) {
    auto& dst = i < n_train ? out.train : i < n_train + n_dev ? out.dev : out.test;
    dst.sentences.push_back(std::move(all.sentences[i]));
  }
  out.train.split = Split::train;
  out.dev.split = Split::dev;
  out.test.split = Split::test;
  return out;
}

}  // namespace spanseg
