#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "spanseg/corpus.hpp"
#include "spanseg/model.hpp"

namespace spanseg {

// Fencepost representations for boundary indices 0..n. Row l holds
// f_l ⊕ b_{l+1}, with f_0 and b_{n+1} fixed to zero.
template <typename Real>
class BoundaryTable {
 public:
  BoundaryTable() = default;
  BoundaryTable(int n, std::size_t dim)
      : n_(n), dim_(dim), data_(static_cast<std::size_t>(n + 1) * dim, Real(0)) {}

  int n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_ + 1); }

  std::span<const Real> boundary(int l) const {
    check(l);
    return std::span<const Real>(data_).subspan(static_cast<std::size_t>(l) * dim_, dim_);
  }
  std::span<Real> row(int l) {
    check(l);
    return std::span<Real>(data_).subspan(static_cast<std::size_t>(l) * dim_, dim_);
  }
  const Real* data() const noexcept { return data_.data(); }
  Real* data() noexcept { return data_.data(); }

  friend bool operator==(const BoundaryTable&, const BoundaryTable&) = default;

 private:
  void check(int l) const {
    if (l < 0 || l > n_) throw ContractError("boundary index out of range");
  }

  int n_ = 0;
  std::size_t dim_ = 0;
  std::vector<Real> data_;
};

struct EncodeOptions {
  bool train = false;
  double dropout = 0.0;  // embedding dropout, train mode only
  Rng* rng = nullptr;
  Exec exec = Exec::serial;
};

template <typename Real>
struct EncoderTrace {
  std::vector<CharId> ids;
  std::vector<Real> inputs;      // n x embed, after dropout
  std::vector<Real> input_mask;  // empty when no dropout was applied
  BiLstmStates<Real> states;
};

// Throws ContractError when ids is empty.
template <typename Real>
BoundaryTable<Real> encode_ids(std::span<const CharId> ids, const Model<Real>& model,
                               const EncodeOptions& options = {},
                               EncoderTrace<Real>* trace = nullptr);

template <typename Real>
BoundaryTable<Real> encode_sentence(std::u32string_view chars, const Vocab& vocab,
                                    const Model<Real>& model,
                                    const EncodeOptions& options = {});

// grad holds dLoss/d(boundary row) for every row.
template <typename Real>
void encode_backward(const EncoderTrace<Real>& trace, const Model<Real>& model,
                     const BoundaryTable<Real>& grad, GradBuffer<Real>& grads,
                     Exec exec = Exec::serial);

}  // namespace spanseg
