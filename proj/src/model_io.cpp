#include "spanseg/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spanseg/training.hpp"
#include "spanseg/utf8.hpp"

namespace spanseg {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'A', 'N', 'S', 'E', 'G', '\0'};

using Kind = ModelFormatError::Kind;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  const std::uint8_t* take(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw ModelFormatError(Kind::truncated, std::string("model file truncated while reading ") + what);
    }
    const auto* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename U>
  U uint(const char* what) {
    const auto* p = take(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
    return v;
  }
  std::string str(const char* what) {
    const auto n = uint<std::uint32_t>(what);
    const auto* p = take(n, what);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelArtifact& a) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint(kModelFormatVersion);
  w.str(format_config(a.config));
  w.uint(static_cast<std::uint32_t>(a.vocab.chars().size()));
  for (char32_t c : a.vocab.chars()) w.uint(static_cast<std::uint32_t>(c));
  w.uint(static_cast<std::uint32_t>(a.tags.pos_count()));
  for (const auto& t : a.tags.pos_tags()) w.str(t);
  const auto& store = a.model.params();
  w.uint(static_cast<std::uint32_t>(store.size()));
  for (const auto& p : store) {
    w.str(p.name);
    w.uint(static_cast<std::uint32_t>(p.value.shape.size()));
    for (auto d : p.value.shape) w.uint(static_cast<std::uint64_t>(d));
    for (float f : p.value.data) w.uint(std::bit_cast<std::uint32_t>(f));
  }
  return w.take();
}

ModelArtifact deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ModelFormatError(Kind::bad_magic, "not a spanseg model file");
  }
  r.take(sizeof kMagic, "magic");
  const auto version = r.uint<std::uint32_t>("version");
  if (version != kModelFormatVersion) {
    throw ModelFormatError(Kind::version, "unsupported model format version " +
                                              std::to_string(version) + " (expected " +
                                              std::to_string(kModelFormatVersion) + ")");
  }

  const auto config_text = r.str("config");
  TrainConfig config;
  try {
    config = parse_config(config_text, TrainConfig{});
    validate(config);
  } catch (const std::exception& e) {
    throw ModelFormatError(Kind::malformed, std::string("bad config header: ") + e.what());
  }

  const auto vocab_count = r.uint<std::uint32_t>("vocab size");
  std::u32string chars;
  for (std::uint32_t i = 0; i < vocab_count; ++i) {
    chars.push_back(static_cast<char32_t>(r.uint<std::uint32_t>("vocab")));
  }
  Vocab vocab;
  try {
    vocab = Vocab(chars);
  } catch (const ContractError&) {
    throw ModelFormatError(Kind::malformed, "duplicate vocab characters");
  }

  const auto tag_count = r.uint<std::uint32_t>("tag count");
  std::vector<std::string> tag_names;
  for (std::uint32_t i = 0; i < tag_count; ++i) tag_names.push_back(r.str("tag name"));
  TagSet tags;
  try {
    tags = TagSet(tag_names);
  } catch (const ContractError&) {
    throw ModelFormatError(Kind::malformed, "invalid or duplicate tag names");
  }

  ModelArtifact out{config, vocab, tags, Model<float>(dims_for(config, vocab, tags))};
  auto& store = out.model.params();
  const auto tensor_count = r.uint<std::uint32_t>("tensor count");
  if (tensor_count != store.size()) {
    throw ModelFormatError(Kind::shape, "expected " + std::to_string(store.size()) +
                                            " tensors, file has " + std::to_string(tensor_count));
  }
  std::vector<bool> seen(store.size(), false);
  for (std::uint32_t t = 0; t < tensor_count; ++t) {
    const auto name = r.str("tensor name");
    const auto id = store.find(name);
    if (!id) throw ModelFormatError(Kind::shape, "unexpected tensor " + name);
    if (seen[*id]) throw ModelFormatError(Kind::shape, "duplicate tensor " + name);
    seen[*id] = true;
    auto& value = store.value(*id);
    const auto rank = r.uint<std::uint32_t>("tensor rank");
    std::vector<std::size_t> shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(r.uint<std::uint64_t>("tensor shape"));
    if (shape != value.shape) throw ModelFormatError(Kind::shape, "shape mismatch for tensor " + name);
    for (auto& f : value.data) f = std::bit_cast<float>(r.uint<std::uint32_t>("tensor data"));
  }
  if (!r.done()) throw ModelFormatError(Kind::malformed, "trailing bytes after last tensor");
  return out;
}

void save_model(const std::string& path, const ModelArtifact& artifact) {
  const auto bytes = serialize_model(artifact);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace spanseg
