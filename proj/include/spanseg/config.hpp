#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spanseg {

struct TrainConfig {
  std::size_t embed_dim = 64;
  std::size_t hidden = 200;
  std::size_t mlp = 500;
  double lr = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int max_epochs = 100;
  int patience = 20;
  std::size_t batch_size = 16;
  int max_span_len = 7;
  double dropout = 0.1;
  std::uint64_t seed = 1;
  // Sentences of a batch are split round-robin into this many partial
  // gradient sums, accumulated in a fixed order. Results depend on this
  // value but never on the thread count.
  std::size_t grad_groups = 4;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Throws ContractError describing the first invalid field.
void validate(const TrainConfig& config);

// `key = value` lines; `#` starts a comment; unknown keys are errors
// (ParseError with the line number). Keys missing from the text keep the
// values already in `base`.
TrainConfig parse_config(std::string_view text, TrainConfig base = {});
TrainConfig read_config_file(const std::string& path, TrainConfig base = {});

// Every field, one `key = value` line each; parse_config inverts it exactly.
std::string format_config(const TrainConfig& config);

}  // namespace spanseg
