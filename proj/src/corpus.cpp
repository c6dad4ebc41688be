#include "spanseg/corpus.hpp"

#include <fstream>
#include <sstream>

#include "spanseg/error.hpp"
#include "spanseg/utf8.hpp"

namespace spanseg {

TagSet::TagSet(std::vector<std::string> pos_tags) {
  for (const auto& t : pos_tags) {
    if (find(t)) throw ContractError("duplicate tag name: " + t);
    add(t);
  }
}

TagId TagSet::add(std::string_view name) {
  if (auto id = find(name)) return *id;
  if (name.empty() || name.find_first_of("_ \t\r\n") != std::string_view::npos) {
    throw ContractError("tag names must be non-empty without '_' or whitespace: " + std::string(name));
  }
  const auto id = static_cast<TagId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<TagId> TagSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& TagSet::name(TagId id) const {
  static const std::string kNonWord = "<non-word>";
  if (id == non_word_id()) return kNonWord;
  if (!is_pos(id)) throw ContractError("tag id out of range");
  return names_[static_cast<std::size_t>(id)];
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && utf8::is_space(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !utf8::is_space(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Corpus parse_corpus(std::string_view text, TagSet& tags, std::string source,
                    Split split) {
  Corpus corpus;
  corpus.source = std::move(source);
  corpus.split = split;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;

    const auto tokens = split_tokens(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    Sentence sentence;
    sentence.line = line_no;
    for (auto token : tokens) {
      const auto sep = token.rfind('_');
      if (sep == std::string_view::npos) {
        throw ParseError(line_no, "token without '_' separator: " +
                                      std::string(token));
      }
      const auto surface_bytes = token.substr(0, sep);
      const auto tag = token.substr(sep + 1);
      if (surface_bytes.empty()) {
        throw ParseError(line_no, "empty surface in token: " + std::string(token));
      }
      if (tag.empty()) {
        throw ParseError(line_no, "empty tag in token: " + std::string(token));
      }
      auto surface = utf8::decode(surface_bytes);
      if (!surface) throw ParseError(line_no, "invalid UTF-8");
      sentence.chars += *surface;
      sentence.words.push_back({std::move(*surface), tags.add(tag)});
    }
    corpus.sentences.push_back(std::move(sentence));
    if (end == text.size()) break;
  }
  return corpus;
}

Corpus read_corpus_file(const std::string& path, TagSet& tags, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), tags, path, split);
}

std::string serialize_sentence(const Sentence& sentence, const TagSet& tags) {
  std::string out;
  for (std::size_t j = 0; j < sentence.words.size(); ++j) {
    if (j) out.push_back(' ');
    out += utf8::encode(sentence.words[j].surface);
    out.push_back('_');
    out += tags.name(sentence.words[j].tag);
  }
  return out;
}

std::string serialize_tagged(std::u32string_view chars,
                             const std::vector<TaggedSpan>& spans,
                             const TagSet& tags) {
  Sentence s;
  s.chars = chars;
  s.words = spans_to_words(spans, chars);
  return serialize_sentence(s, tags);
}

std::vector<TaggedSpan> words_to_spans(const Sentence& sentence) {
  std::vector<TaggedSpan> out;
  out.reserve(sentence.words.size());
  int l = 0;
  for (const auto& w : sentence.words) {
    const int r = l + static_cast<int>(w.surface.size());
    out.push_back({{l, r}, w.tag});
    l = r;
  }
  return out;
}

std::vector<Span> untagged(const std::vector<TaggedSpan>& spans) {
  std::vector<Span> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(s.span);
  return out;
}

bool is_partition(const std::vector<Span>& spans, int n) {
  int at = 0;
  for (const auto& s : spans) {
    if (s.l != at || s.r <= s.l) return false;
    at = s.r;
  }
  return at == n;
}

std::vector<Word> spans_to_words(const std::vector<TaggedSpan>& spans,
                                 std::u32string_view chars) {
  std::vector<Word> out;
  out.reserve(spans.size());
  int at = 0;
  for (const auto& s : spans) {
    if (s.span.l != at) {
      throw ContractError(s.span.l > at ? "gap in spans" : "overlapping spans");
    }
    if (s.span.r <= s.span.l || s.span.r > static_cast<int>(chars.size())) {
      throw ContractError("span out of range");
    }
    out.push_back({std::u32string(chars.substr(static_cast<std::size_t>(s.span.l),
                                               static_cast<std::size_t>(s.span.length()))),
                   s.tag});
    at = s.span.r;
  }
  if (at != static_cast<int>(chars.size())) {
    throw ContractError("gap in spans: characters after the last span");
  }
  return out;
}

Vocab::Vocab() = default;

Vocab::Vocab(const std::u32string& chars) {
  for (char32_t c : chars) {
    if (index_.count(c)) throw ContractError("duplicate vocab character");
    add(c);
  }
}

CharId Vocab::add(char32_t c) {
  auto it = index_.find(c);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<CharId>(chars_.size() + 2);
  chars_.push_back(c);
  index_.emplace(c, id);
  return id;
}

CharId Vocab::lookup(char32_t c) const noexcept {
  auto it = index_.find(c);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<CharId> Vocab::encode(std::u32string_view chars) const {
  std::vector<CharId> ids;
  ids.reserve(chars.size());
  for (char32_t c : chars) ids.push_back(lookup(c));
  return ids;
}

Vocab build_vocab(const Corpus& train) {
  if (train.empty()) throw ContractError("cannot build a vocabulary from an empty corpus");
  Vocab vocab;
  for (const auto& s : train.sentences) {
    for (char32_t c : s.chars) vocab.add(c);
  }
  return vocab;
}

std::unordered_set<std::u32string> word_types(const Corpus& corpus) {
  std::unordered_set<std::u32string> types;
  for (const auto& s : corpus.sentences) {
    for (const auto& w : s.words) types.insert(w.surface);
  }
  return types;
}

CorpusStats corpus_stats(const Corpus& train, const Corpus& eval) {
  CorpusStats st;
  const auto types = word_types(train);
  for (const auto& s : train.sentences) {
    ++st.train_sentences;
    st.train_chars += s.chars.size();
    st.train_words += s.words.size();
  }
  for (const auto& s : eval.sentences) {
    ++st.eval_sentences;
    st.eval_chars += s.chars.size();
    st.eval_words += s.words.size();
    for (const auto& w : s.words) {
      if (!types.count(w.surface)) ++st.eval_oov_words;
    }
  }
  if (st.eval_words == 0) {
    throw ContractError("OOV rate undefined: evaluation corpus has no words");
  }
  st.oov_rate = 100.0 * static_cast<double>(st.eval_oov_words) /
                static_cast<double>(st.eval_words);
  return st;
}

std::string format_stats(const CorpusStats& st) {
  std::ostringstream out;
  out << "train_sentences\t" << st.train_sentences << '\n'
      << "train_chars\t" << st.train_chars << '\n'
      << "train_words\t" << st.train_words << '\n'
      << "eval_sentences\t" << st.eval_sentences << '\n'
      << "eval_chars\t" << st.eval_chars << '\n'
      << "eval_words\t" << st.eval_words << '\n'
      << "eval_oov_words\t" << st.eval_oov_words << '\n';
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", st.oov_rate);
  out << "oov_rate\t" << buf << '\n';
  return out.str();
}

}  // namespace spanseg
