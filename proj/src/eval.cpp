#include "spanseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include "json.hpp"

#include "spanseg/error.hpp"
#include "spanseg/utf8.hpp"

namespace spanseg {

namespace {

int extent(const std::vector<Span>& spans) { return spans.empty() ? 0 : spans.back().r; }
int extent(const std::vector<TaggedSpan>& spans) {
  return spans.empty() ? 0 : spans.back().span.r;
}

template <typename T>
void check_aligned(const std::vector<std::vector<T>>& gold,
                   const std::vector<std::vector<T>>& pred) {
  if (gold.size() != pred.size()) {
    throw ContractError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                        std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (extent(gold[i]) != extent(pred[i])) {
      throw ContractError("sentence " + std::to_string(i + 1) + ": length mismatch");
    }
  }
}

template <typename T>
std::size_t count_matches(const std::vector<T>& gold, const std::vector<T>& pred) {
  const std::set<T> g(gold.begin(), gold.end());
  std::size_t m = 0;
  for (const auto& p : pred) m += g.count(p);
  return m;
}

std::string rate(const std::optional<double>& r) {
  if (!r) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *r);
  return buf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::json prf_json(const PRF& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1},
          {"matched", p.matched},     {"gold", p.gold},     {"pred", p.pred}};
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

PRF make_prf(std::size_t matched, std::size_t gold, std::size_t pred) {
  PRF r;
  r.matched = matched;
  r.gold = gold;
  r.pred = pred;
  r.precision = pred ? static_cast<double>(matched) / static_cast<double>(pred) : 0.0;
  r.recall = gold ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  const double s = r.precision + r.recall;
  r.f1 = s > 0 ? 2 * r.precision * r.recall / s : 0.0;
  return r;
}

PRF seg_prf(const std::vector<std::vector<Span>>& gold,
            const std::vector<std::vector<Span>>& pred) {
  check_aligned(gold, pred);
  std::size_t m = 0, g = 0, p = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    m += count_matches(gold[i], pred[i]);
    g += gold[i].size();
    p += pred[i].size();
  }
  return make_prf(m, g, p);
}

PRF joint_prf(const std::vector<std::vector<TaggedSpan>>& gold,
              const std::vector<std::vector<TaggedSpan>>& pred) {
  check_aligned(gold, pred);
  std::size_t m = 0, g = 0, p = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    m += count_matches(gold[i], pred[i]);
    g += gold[i].size();
    p += pred[i].size();
  }
  return make_prf(m, g, p);
}

std::vector<double> per_sentence_joint_f1(const std::vector<std::vector<TaggedSpan>>& gold,
                                          const std::vector<std::vector<TaggedSpan>>& pred) {
  check_aligned(gold, pred);
  std::vector<double> out;
  out.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].empty() && pred[i].empty()) {
      out.push_back(1.0);
      continue;
    }
    out.push_back(make_prf(count_matches(gold[i], pred[i]), gold[i].size(), pred[i].size()).f1);
  }
  return out;
}

VocabRecall recall_by_vocab(const std::vector<Sentence>& gold,
                            const std::vector<std::vector<TaggedSpan>>& pred,
                            const std::unordered_set<std::u32string>& train_types) {
  if (gold.size() != pred.size()) throw ContractError("recall_by_vocab: sentence count mismatch");
  VocabRecall r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::set<TaggedSpan> predicted(pred[i].begin(), pred[i].end());
    const auto spans = words_to_spans(gold[i]);
    for (std::size_t j = 0; j < spans.size(); ++j) {
      const bool known = train_types.count(gold[i].words[j].surface) != 0;
      const bool hit = predicted.count(spans[j]) != 0;
      if (known) {
        ++r.iv_total;
        r.iv_correct += hit;
      } else {
        ++r.oov_total;
        r.oov_correct += hit;
      }
    }
  }
  if (r.iv_total) r.iv = static_cast<double>(r.iv_correct) / static_cast<double>(r.iv_total);
  if (r.oov_total) r.oov = static_cast<double>(r.oov_correct) / static_cast<double>(r.oov_total);
  return r;
}

CasResult cas_accuracy(const std::vector<Sentence>& gold,
                       const std::vector<std::vector<Span>>& pred,
                       const std::vector<std::u32string>& cas) {
  if (gold.size() != pred.size()) throw ContractError("cas_accuracy: sentence count mismatch");
  CasResult r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& chars = gold[i].chars;
    const auto n = chars.size();
    std::vector<char> gold_b(n + 1, 0), pred_b(n + 1, 0);
    for (const auto& s : words_to_spans(gold[i])) {
      gold_b[static_cast<std::size_t>(s.span.l)] = 1;
      gold_b[static_cast<std::size_t>(s.span.r)] = 1;
    }
    for (const auto& s : pred[i]) {
      if (s.l < 0 || s.r > static_cast<int>(n)) throw ContractError("cas_accuracy: span out of range");
      pred_b[static_cast<std::size_t>(s.l)] = 1;
      pred_b[static_cast<std::size_t>(s.r)] = 1;
    }
    for (const auto& pattern : cas) {
      if (pattern.empty() || pattern.size() > n) continue;
      for (auto at = chars.find(pattern); at != std::u32string::npos;
           at = chars.find(pattern, at + 1)) {
        ++r.occurrences;
        bool same = true;
        for (std::size_t b = at; b <= at + pattern.size() && same; ++b) {
          same = gold_b[b] == pred_b[b];
        }
        r.correct += same;
      }
    }
  }
  if (r.occurrences) {
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.occurrences);
  }
  return r;
}

std::vector<std::u32string> parse_cas_list(std::string_view text) {
  std::vector<std::u32string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto decoded = utf8::decode(text.substr(pos, end - pos));
    if (!decoded) throw ParseError(line_no, "invalid UTF-8 in CAS list");
    std::u32string s;
    for (char32_t c : *decoded) {
      if (!utf8::is_space(c)) s.push_back(c);
    }
    if (!s.empty()) out.push_back(std::move(s));
    pos = end + 1;
  }
  return out;
}

SignificanceResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("paired_t_test: lists differ in length");
  if (a.size() < 2) throw ContractError("paired_t_test: need at least two pairs");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  SignificanceResult r;
  r.df = n - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p = 0.0;
    }
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.df));
  r.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 0.0, 1.0);
  return r;
}

std::string format_report(const MetricsReport& m) {
  std::ostringstream out;
  auto prf = [&](const std::string& key, const PRF& p) {
    out << key << "_precision\t" << fixed(p.precision) << '\n'
        << key << "_recall\t" << fixed(p.recall) << '\n'
        << key << "_f1\t" << fixed(p.f1) << '\n'
        << key << "_matched\t" << p.matched << '\n'
        << key << "_gold\t" << p.gold << '\n'
        << key << "_pred\t" << p.pred << '\n';
  };
  prf("seg", m.seg);
  prf("joint", m.joint);
  if (m.vocab) {
    out << "r_pos_oov\t" << rate(m.vocab->oov) << '\n'
        << "r_pos_iv\t" << rate(m.vocab->iv) << '\n'
        << "oov_words\t" << m.vocab->oov_total << '\n'
        << "iv_words\t" << m.vocab->iv_total << '\n';
  }
  if (m.cas) {
    out << "cas_accuracy\t" << rate(m.cas->accuracy) << '\n'
        << "cas_occurrences\t" << m.cas->occurrences << '\n';
  }
  if (m.significance) {
    out << "t_statistic\t" << fixed(m.significance->t) << '\n'
        << "t_df\t" << m.significance->df << '\n'
        << "p_value\t" << fixed(m.significance->p) << '\n';
  }
  return out.str();
}

std::string report_to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["seg"] = prf_json(m.seg);
  j["joint"] = prf_json(m.joint);
  if (m.vocab) {
    j["r_pos_oov"] = opt_json(m.vocab->oov);
    j["r_pos_iv"] = opt_json(m.vocab->iv);
    j["oov_words"] = m.vocab->oov_total;
    j["iv_words"] = m.vocab->iv_total;
  }
  if (m.cas) {
    j["cas_accuracy"] = opt_json(m.cas->accuracy);
    j["cas_occurrences"] = m.cas->occurrences;
  }
  if (m.significance) {
    j["significance"] = {{"t", std::isfinite(m.significance->t) ? nlohmann::json(m.significance->t)
                                                              : nlohmann::json(nullptr)},
                         {"df", m.significance->df},
                         {"p", m.significance->p}};
  }
  return j.dump(2) + "\n";
}

}  // namespace spanseg
