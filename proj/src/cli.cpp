#include "spanseg/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spanseg/config.hpp"
#include "spanseg/corpus.hpp"
#include "spanseg/error.hpp"
#include "spanseg/eval.hpp"
#include "spanseg/model_io.hpp"
#include "spanseg/pipeline.hpp"
#include "spanseg/synthetic.hpp"
#include "spanseg/training.hpp"
#include "spanseg/utf8.hpp"

namespace spanseg {

namespace {

namespace fs = std::filesystem;

// Failure that maps to kExitInput with a plain message.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("failed writing " + path);
}

Corpus load_corpus(const std::string& path, TagSet& tags, Split split) {
  const auto text = read_text(path);
  try {
    return parse_corpus(text, tags, path, split);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct TrainArgs {
  std::string train, dev, config, out;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig config;
  if (!a.config.empty()) {
    try {
      config = parse_config(read_text(a.config));
    } catch (const ParseError& e) {
      throw InputError(a.config + ": " + e.what());
    }
  }
  if (a.seed) config.seed = *a.seed;
  try {
    validate(config);
  } catch (const ContractError& e) {
    throw InputError(e.what());
  }

  TagSet tags;
  const auto train_corpus = load_corpus(a.train, tags, Split::train);
  const auto dev_corpus = load_corpus(a.dev, tags, Split::dev);
  if (train_corpus.empty()) throw InputError(a.train + ": no sentences");
  const auto vocab = build_vocab(train_corpus);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw InputError("cannot create " + a.out + ": " + ec.message());
  const auto log_path = (fs::path(a.out) / "train.log").string();
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw InputError("cannot write " + log_path);

  const auto dims = dims_for(config, vocab, tags);
  log << format_log_header(Model<float>(dims).params().element_count()) << std::flush;
  auto result = train(train_corpus, dev_corpus, vocab, tags, config, [&](const EpochRecord& r) {
    log << format_epoch(r) << std::flush;
    out << format_epoch(r) << std::flush;
  });

  save_model((fs::path(a.out) / "best.model").string(), {config, vocab, tags, result.best});
  save_model((fs::path(a.out) / "final.model").string(), {config, vocab, tags, result.final_model});
  out << "best epoch " << result.best_epoch << ", dev joint F1 " << result.best_dev_f1
      << (result.early_stopped ? " (early stop)" : "") << '\n';
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& input, const std::string& output) {
  ModelArtifact art = [&] {
    try {
      return load_model(model_path);
    } catch (const ModelFormatError& e) {
      throw InputError(model_path + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw InputError(e.what());
    }
  }();

  const auto text = read_text(input);
  std::vector<std::u32string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    auto decoded = utf8::decode(std::string_view(text).substr(pos, end - pos));
    if (!decoded) throw InputError(input + ": line " + std::to_string(lines.size() + 1) + ": invalid UTF-8");
    std::erase_if(*decoded, utf8::is_space);
    lines.push_back(std::move(*decoded));
    pos = end + 1;
  }

  const auto pred = predict_batch(art.model, art.vocab, lines, art.config.max_span_len);
  std::string result;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    result += serialize_tagged(lines[i], pred[i], art.tags);
    result += '\n';
  }
  write_text(output, result);
  return kExitOk;
}

struct EvalArgs {
  std::string gold, pred, train, cas, compare, json;
};

std::vector<std::vector<TaggedSpan>> aligned_spans(const Corpus& gold, const Corpus& pred,
                                                   const std::string& pred_path) {
  if (gold.size() != pred.size()) {
    throw InputError(pred_path + ": " + std::to_string(pred.size()) + " sentences, gold has " +
                     std::to_string(gold.size()));
  }
  std::vector<std::vector<TaggedSpan>> out;
  out.reserve(pred.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold.sentences[i].chars != pred.sentences[i].chars) {
      throw InputError(pred_path + ": line " + std::to_string(pred.sentences[i].line) +
                       ": characters differ from gold line " +
                       std::to_string(gold.sentences[i].line));
    }
    out.push_back(words_to_spans(pred.sentences[i]));
  }
  return out;
}

int cmd_evaluate(const EvalArgs& a, std::ostream& out) {
  TagSet tags;
  const auto gold = load_corpus(a.gold, tags, Split::test);
  const auto pred = load_corpus(a.pred, tags, Split::other);
  const auto pred_spans = aligned_spans(gold, pred, a.pred);

  std::vector<std::vector<TaggedSpan>> gold_spans;
  std::vector<std::vector<Span>> gold_seg, pred_seg;
  for (const auto& s : gold.sentences) {
    gold_spans.push_back(words_to_spans(s));
    gold_seg.push_back(untagged(gold_spans.back()));
  }
  for (const auto& p : pred_spans) pred_seg.push_back(untagged(p));

  MetricsReport report;
  report.seg = seg_prf(gold_seg, pred_seg);
  report.joint = joint_prf(gold_spans, pred_spans);
  if (!a.train.empty()) {
    TagSet train_tags;
    const auto train_corpus = load_corpus(a.train, train_tags, Split::train);
    report.vocab = recall_by_vocab(gold.sentences, pred_spans, word_types(train_corpus));
  }
  if (!a.cas.empty()) {
    std::vector<std::u32string> cas;
    try {
      cas = parse_cas_list(read_text(a.cas));
    } catch (const ParseError& e) {
      throw InputError(a.cas + ": " + e.what());
    }
    report.cas = cas_accuracy(gold.sentences, pred_seg, cas);
  }
  if (!a.compare.empty()) {
    const auto other = load_corpus(a.compare, tags, Split::other);
    const auto other_spans = aligned_spans(gold, other, a.compare);
    const auto fa = per_sentence_joint_f1(gold_spans, pred_spans);
    const auto fb = per_sentence_joint_f1(gold_spans, other_spans);
    if (fa.size() < 2) throw InputError("--compare needs at least two sentences");
    report.significance = paired_t_test(fa, fb);
  }
  out << format_report(report);
  if (!a.json.empty()) write_text(a.json, report_to_json(report));
  return kExitOk;
}

int cmd_stats(const std::string& train_path, const std::string& eval_path, std::ostream& out) {
  TagSet tags;
  const auto train_corpus = load_corpus(train_path, tags, Split::train);
  const auto eval_corpus = load_corpus(eval_path, tags, Split::test);
  try {
    out << format_stats(corpus_stats(train_corpus, eval_corpus));
  } catch (const ContractError& e) {
    throw InputError(e.what());
  }
  return kExitOk;
}

int cmd_generate(const std::string& kind, std::size_t sentences, std::uint64_t seed,
                 const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir + ": " + ec.message());
  if (kind == "memorize") {
    write_text((fs::path(dir) / "train.txt").string(), memorization_text());
    return kExitOk;
  }
  const auto text = lexicon_text(sentences, seed);
  const std::size_t n_train = sentences * 8 / 10, n_dev = sentences / 10;
  std::string parts[3];
  std::size_t line = 0, pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    parts[line < n_train ? 0 : line < n_train + n_dev ? 1 : 2] += text.substr(pos, end - pos + 1);
    pos = end + 1;
    ++line;
  }
  write_text((fs::path(dir) / "train.txt").string(), parts[0]);
  write_text((fs::path(dir) / "dev.txt").string(), parts[1]);
  write_text((fs::path(dir) / "test.txt").string(), parts[2]);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint word segmentation and POS tagging with span scoring"};
  app.require_subcommand(1);

  TrainArgs ta;
  std::uint64_t seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--train", ta.train, "Training corpus")->required();
  train_cmd->add_option("--dev", ta.dev, "Development corpus")->required();
  train_cmd->add_option("--config", ta.config, "Config file (key = value)");
  train_cmd->add_option("--out", ta.out, "Output directory")->required();
  auto* seed_opt = train_cmd->add_option("--seed", seed, "Overrides the config seed");

  std::string model_path, input, output;
  auto* predict_cmd = app.add_subcommand("predict", "Segment and tag raw text");
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  predict_cmd->add_option("--input", input, "One raw sentence per line")->required();
  predict_cmd->add_option("--out", output, "Output in corpus format")->required();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against gold");
  eval_cmd->add_option("--gold", ea.gold, "Gold corpus")->required();
  eval_cmd->add_option("--pred", ea.pred, "Predicted corpus")->required();
  eval_cmd->add_option("--train", ea.train, "Training corpus, enables OOV/IV recall");
  eval_cmd->add_option("--cas", ea.cas, "CAS list, one string per line");
  eval_cmd->add_option("--compare", ea.compare, "Second prediction file for a paired t-test");
  eval_cmd->add_option("--json", ea.json, "Also write the report as JSON");

  std::string stats_train, stats_eval;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics and OOV rate");
  stats_cmd->add_option("--train", stats_train, "Training corpus")->required();
  stats_cmd->add_option("--eval", stats_eval, "Evaluation corpus")->required();

  std::string gen_kind = "lexicon", gen_dir;
  std::size_t gen_sentences = 500;
  std::uint64_t gen_seed = 1;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic corpus");
  gen_cmd->add_option("--kind", gen_kind, "memorize or lexicon")
      ->check(CLI::IsMember({"memorize", "lexicon"}));
  gen_cmd->add_option("--sentences", gen_sentences, "Sentence count (lexicon)")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen_seed, "Generator seed (lexicon)");
  gen_cmd->add_option("--out", gen_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      if (*seed_opt) ta.seed = seed;
      return cmd_train(ta, out);
    }
    if (*predict_cmd) return cmd_predict(model_path, input, output);
    if (*eval_cmd) return cmd_evaluate(ea, out);
    if (*stats_cmd) return cmd_stats(stats_train, stats_eval, out);
    if (*gen_cmd) return cmd_generate(gen_kind, gen_sentences, gen_seed, gen_dir);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace spanseg
