#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "spanseg/corpus.hpp"
#include "spanseg/decoder.hpp"
#include "spanseg/encoder.hpp"
#include "spanseg/model.hpp"
#include "spanseg/nn.hpp"
#include "spanseg/training.hpp"

namespace spanseg::testing {

// Random partition of [0, n) into spans of length <= max_len.
inline std::vector<Span> random_partition(Rng& rng, int n, int max_len) {
  std::vector<Span> out;
  int l = 0;
  while (l < n) {
    const int len = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(std::min(max_len, n - l))));
    out.push_back({l, l + len});
    l += len;
  }
  return out;
}

inline std::vector<TaggedSpan> random_tagged_partition(Rng& rng, int n, int max_len, std::size_t pos_tags) {
  std::vector<TaggedSpan> out;
  for (const auto& s : random_partition(rng, n, max_len)) {
    out.push_back({s, static_cast<TagId>(rng.below(pos_tags))});
  }
  return out;
}

struct GradCase {
  ModelDims dims;
  int max_span_len = 0;
  std::vector<CharId> ids;
  std::vector<TaggedSpan> gold;
};

// Tiny random configuration: n <= 6, hidden <= 8, d <= 4, |T| <= 4.
inline GradCase random_grad_case(std::uint64_t seed) {
  Rng rng(seed);
  GradCase c;
  c.dims.vocab = 2 + 1 + rng.below(4);
  c.dims.embed = 1 + rng.below(4);
  c.dims.hidden = 1 + rng.below(8);
  c.dims.mlp = 1 + rng.below(4);
  c.dims.tags = 2 + rng.below(3);
  const int n = 1 + static_cast<int>(rng.below(6));
  c.max_span_len = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) c.ids.push_back(static_cast<CharId>(rng.below(c.dims.vocab)));
  c.gold = random_tagged_partition(rng, n, n, c.dims.tags - 1);
  return c;
}

// Smallest |pre-activation| over the four MLPs at the model's current point.
// A finite difference that crosses a ReLU kink is not a gradient error, so
// the checks only use points where this is comfortably positive.
inline double min_relu_margin(const Model<double>& model, const std::vector<CharId>& ids) {
  const auto table = encode_ids<double>(ids, model);
  const auto& m = model.ids();
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& mlp : {m.seg_left, m.seg_right, m.tag_left, m.tag_right}) {
    const auto& w = model.value(mlp.w);
    const auto& b = model.value(mlp.b);
    for (int r = 0; r <= table.n(); ++r) {
      const auto x = table.boundary(r);
      for (std::size_t j = 0; j < w.dim(0); ++j) {
        double pre = b.data[j];
        for (std::size_t k = 0; k < x.size(); ++k) pre += w.data[j * x.size() + k] * x[k];
        margin = std::min(margin, std::abs(pre));
      }
    }
  }
  return margin;
}

inline constexpr double kReluMargin = 0.02;

// Gradient check of j_total for one case; the segmentation used by the tag
// loss is decoded once at the starting point and then held fixed.
inline GradCheckReport check_case(const GradCase& c, std::uint64_t seed, double eps = 1e-3,
                                  double tol = 1e-4) {
  Model<double> model(c.dims);
  model.randomize(seed, 0.5);
  for (std::uint64_t k = 1; min_relu_margin(model, c.ids) < kReluMargin; ++k) {
    model.randomize(Rng::mix(seed, k), 0.5);
  }
  LossOptions opt;
  opt.max_span_len = c.max_span_len;
  const auto seg = compute_loss<double>(c.ids, c.gold, model, opt).segmentation;
  opt.frozen = &seg;
  auto& store = model.params();
  return finite_diff_check(
      store, [&] { return compute_loss<double>(c.ids, c.gold, model, opt).loss.j_total; },
      [&] {
        auto buf = store.make_grad_buffer();
        compute_loss<double>(c.ids, c.gold, model, opt, &buf);
        store.zero_grad();
        store.accumulate(buf);
      },
      eps, tol);
}

}  // namespace spanseg::testing
