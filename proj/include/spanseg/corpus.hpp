#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace spanseg {

using TagId = int;
using CharId = int;

// Half-open fencepost interval over boundary indices 0..n. Characters
// chars[l..r) form the candidate word.
struct Span {
  int l = 0;
  int r = 0;

  constexpr int length() const noexcept { return r - l; }
  friend constexpr auto operator<=>(const Span&, const Span&) = default;
};

// True iff the open intervals (a.l, a.r) and (b.l, b.r) intersect.
constexpr bool overlaps(const Span& a, const Span& b) noexcept {
  return a.l < b.r && b.l < a.r;
}

struct TaggedSpan {
  Span span;
  TagId tag = 0;

  friend constexpr auto operator<=>(const TaggedSpan&, const TaggedSpan&) =
      default;
};

// POS tags in first-seen order, followed by one reserved non-word label.
// The non-word id is always pos_count(), so the set must be frozen before a
// model is sized against it.
class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(std::vector<std::string> pos_tags);

  // Returns the id of `name`, adding it if absent. Names containing '_' or
  // whitespace cannot be written back to corpus text and are rejected.
  TagId add(std::string_view name);
  std::optional<TagId> find(std::string_view name) const;
  const std::string& name(TagId id) const;

  std::size_t pos_count() const noexcept { return names_.size(); }
  std::size_t size() const noexcept { return names_.size() + 1; }
  TagId non_word_id() const noexcept { return static_cast<TagId>(names_.size()); }
  bool is_pos(TagId id) const noexcept {
    return id >= 0 && id < static_cast<TagId>(names_.size());
  }
  const std::vector<std::string>& pos_tags() const noexcept { return names_; }

  friend bool operator==(const TagSet& a, const TagSet& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, TagId> index_;
};

struct Word {
  std::u32string surface;
  TagId tag = 0;

  friend bool operator==(const Word&, const Word&) = default;
};

struct Sentence {
  std::u32string chars;
  std::vector<Word> words;
  std::size_t line = 0;  // 1-based source line, 0 when synthesized

  std::size_t size() const noexcept { return chars.size(); }
};

enum class Split { train, dev, test, other };

struct Corpus {
  std::vector<Sentence> sentences;
  std::string source;
  Split split = Split::other;

  bool empty() const noexcept { return sentences.empty(); }
  std::size_t size() const noexcept { return sentences.size(); }
};

// One sentence per non-empty line of space-separated `surface_TAG` tokens;
// the last underscore of a token separates surface from tag. Tags are added
// to `tags`, so parsing several files with one TagSet gives shared ids.
// Throws ParseError (with the 1-based line) on malformed tokens or UTF-8.
Corpus parse_corpus(std::string_view text, TagSet& tags,
                    std::string source = {}, Split split = Split::other);

Corpus read_corpus_file(const std::string& path, TagSet& tags,
                        Split split = Split::other);

// Inverse of one parsed line: `surface_TAG` tokens joined by single spaces.
std::string serialize_sentence(const Sentence& sentence, const TagSet& tags);
std::string serialize_tagged(std::u32string_view chars,
                             const std::vector<TaggedSpan>& spans,
                             const TagSet& tags);

std::vector<TaggedSpan> words_to_spans(const Sentence& sentence);
std::vector<Span> untagged(const std::vector<TaggedSpan>& spans);

// Throws ContractError unless `spans` is sorted, gapless and covers
// [0, chars.size()) exactly.
std::vector<Word> spans_to_words(const std::vector<TaggedSpan>& spans,
                                 std::u32string_view chars);

bool is_partition(const std::vector<Span>& spans, int n);

class Vocab {
 public:
  static constexpr CharId kPad = 0;
  static constexpr CharId kUnk = 1;

  Vocab();
  // Character list in id order starting at id 2.
  explicit Vocab(const std::u32string& chars);

  CharId add(char32_t c);
  CharId lookup(char32_t c) const noexcept;
  std::vector<CharId> encode(std::u32string_view chars) const;

  std::size_t size() const noexcept { return chars_.size() + 2; }
  // Characters in id order (id = index + 2).
  const std::u32string& chars() const noexcept { return chars_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.chars_ == b.chars_;
  }

 private:
  std::u32string chars_;
  std::unordered_map<char32_t, CharId> index_;
};

// First-occurrence ordering; throws ContractError on an empty corpus.
Vocab build_vocab(const Corpus& train);

std::unordered_set<std::u32string> word_types(const Corpus& corpus);

struct CorpusStats {
  std::size_t train_sentences = 0;
  std::size_t train_chars = 0;
  std::size_t train_words = 0;
  std::size_t eval_sentences = 0;
  std::size_t eval_chars = 0;
  std::size_t eval_words = 0;
  std::size_t eval_oov_words = 0;
  double oov_rate = 0.0;  // percent of eval word tokens unseen as train words
};

// Throws ContractError when `eval` has no word tokens.
CorpusStats corpus_stats(const Corpus& train, const Corpus& eval);
std::string format_stats(const CorpusStats& stats);

}  // namespace spanseg
