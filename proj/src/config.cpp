#include "spanseg/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "spanseg/error.hpp"

namespace spanseg {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if constexpr (std::is_floating_point_v<T>) {
    std::string buf(text);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || buf.empty()) return false;
    out = static_cast<T>(v);
    return true;
  } else {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
  }
}

using Setter = std::function<bool(TrainConfig&, std::string_view)>;

template <typename T>
Setter field(T TrainConfig::*member) {
  return [member](TrainConfig& c, std::string_view v) { return parse_number(v, c.*member); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"embed_dim", field(&TrainConfig::embed_dim)},
      {"hidden", field(&TrainConfig::hidden)},
      {"mlp", field(&TrainConfig::mlp)},
      {"lr", field(&TrainConfig::lr)},
      {"weight_decay", field(&TrainConfig::weight_decay)},
      {"beta1", field(&TrainConfig::beta1)},
      {"beta2", field(&TrainConfig::beta2)},
      {"eps", field(&TrainConfig::eps)},
      {"max_epochs", field(&TrainConfig::max_epochs)},
      {"patience", field(&TrainConfig::patience)},
      {"batch_size", field(&TrainConfig::batch_size)},
      {"max_span_len", field(&TrainConfig::max_span_len)},
      {"dropout", field(&TrainConfig::dropout)},
      {"seed", field(&TrainConfig::seed)},
      {"grad_groups", field(&TrainConfig::grad_groups)},
  };
  return table;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& what) { throw ContractError("invalid config: " + what); };
  if (c.embed_dim == 0) fail("embed_dim must be positive");
  if (c.hidden == 0) fail("hidden must be positive");
  if (c.mlp == 0) fail("mlp must be positive");
  if (!(c.lr > 0)) fail("lr must be positive");
  if (c.weight_decay < 0) fail("weight_decay must be non-negative");
  if (!(c.beta1 >= 0 && c.beta1 < 1) || !(c.beta2 >= 0 && c.beta2 < 1)) fail("betas must be in [0, 1)");
  if (!(c.eps > 0)) fail("eps must be positive");
  if (c.max_epochs <= 0) fail("max_epochs must be positive");
  if (c.patience < 0) fail("patience must be non-negative");
  if (c.patience > c.max_epochs) fail("patience must not exceed max_epochs");
  if (c.batch_size == 0) fail("batch_size must be positive");
  if (c.max_span_len <= 0) fail("max_span_len must be positive");
  if (!(c.dropout >= 0 && c.dropout < 1)) fail("dropout must be in [0, 1)");
  if (c.grad_groups == 0) fail("grad_groups must be positive");
}

TrainConfig parse_config(std::string_view text, TrainConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(line_no, "unknown config key: " + std::string(key));
    if (!it->second(base, value)) {
      throw ParseError(line_no, "bad value for " + std::string(key) + ": " + std::string(value));
    }
  }
  return base;
}

TrainConfig read_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), base);
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "embed_dim = " << c.embed_dim << '\n'
      << "hidden = " << c.hidden << '\n'
      << "mlp = " << c.mlp << '\n'
      << "lr = " << exact(c.lr) << '\n'
      << "weight_decay = " << exact(c.weight_decay) << '\n'
      << "beta1 = " << exact(c.beta1) << '\n'
      << "beta2 = " << exact(c.beta2) << '\n'
      << "eps = " << exact(c.eps) << '\n'
      << "max_epochs = " << c.max_epochs << '\n'
      << "patience = " << c.patience << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "max_span_len = " << c.max_span_len << '\n'
      << "dropout = " << exact(c.dropout) << '\n'
      << "seed = " << c.seed << '\n'
      << "grad_groups = " << c.grad_groups << '\n';
  return out.str();
}

}  // namespace spanseg
