#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "spanseg/error.hpp"

namespace spanseg {

// Dense row-major array.
template <typename Real>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<Real> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, Real fill = Real(0))
      : shape(std::move(dims)), data(element_count(shape), fill) {}

  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  Real* ptr() noexcept { return data.data(); }
  const Real* ptr() const noexcept { return data.data(); }
  std::span<Real> view() noexcept { return data; }
  std::span<const Real> view() const noexcept { return data; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

using ParamId = std::size_t;

template <typename Real>
struct Param {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;
};

// Gradient storage shaped like a ParamStore, one flat buffer per parameter.
// Workers fill private buffers; ParamStore::accumulate sums them in a fixed
// order so results do not depend on scheduling.
template <typename Real>
struct GradBuffer {
  std::vector<std::vector<Real>> slots;

  std::vector<Real>& operator[](ParamId id) { return slots[id]; }
  const std::vector<Real>& operator[](ParamId id) const { return slots[id]; }
  void zero() {
    for (auto& s : slots) std::fill(s.begin(), s.end(), Real(0));
  }
};

template <typename Real>
class ParamStore {
 public:
  ParamId add(std::string name, std::vector<std::size_t> shape) {
    if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
    const ParamId id = params_.size();
    Tensor<Real> value(shape);
    Tensor<Real> grad(std::move(shape));
    index_.emplace(name, id);
    params_.push_back({std::move(name), std::move(value), std::move(grad)});
    return id;
  }

  std::optional<ParamId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Param<Real>& operator[](ParamId id) { return params_.at(id); }
  const Param<Real>& operator[](ParamId id) const { return params_.at(id); }
  Tensor<Real>& value(ParamId id) { return params_.at(id).value; }
  const Tensor<Real>& value(ParamId id) const { return params_.at(id).value; }
  Tensor<Real>& grad(ParamId id) { return params_.at(id).grad; }

  std::size_t size() const noexcept { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), Real(0));
  }

  GradBuffer<Real> make_grad_buffer() const {
    GradBuffer<Real> buf;
    buf.slots.reserve(params_.size());
    for (const auto& p : params_) buf.slots.emplace_back(p.value.size(), Real(0));
    return buf;
  }

  void accumulate(const GradBuffer<Real>& buf) {
    if (buf.slots.size() != params_.size()) throw ContractError("gradient buffer layout mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& g = params_[i].grad.data;
      const auto& src = buf.slots[i];
      if (src.size() != g.size()) throw ContractError("gradient buffer shape mismatch");
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += src[k];
    }
  }

  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (const auto& p : params_) {
      const ParamId id = out.add(p.name, p.value.shape);
      auto& dst = out.value(id).data;
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<Other>(p.value.data[k]);
    }
    return out;
  }

 private:
  std::vector<Param<Real>> params_;
  std::unordered_map<std::string, ParamId> index_;
};

// Seeded generator with portable derived distributions (the standard
// distributions are implementation-defined, which would break byte-identical
// logs across toolchains).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, bound).
  std::size_t below(std::size_t bound) {
    if (bound == 0) throw ContractError("Rng::below(0)");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  // Derives an independent stream; used to give each sentence of a batch its
  // own dropout generator regardless of which thread processes it.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spanseg
