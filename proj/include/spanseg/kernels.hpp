#pragma once

// Dense inner loops used by the encoder and scorer. Every kernel exists in a
// serial reference form and an OpenMP form. Both forms perform the same
// floating-point operations per output element in the same order, so their
// results are bit-identical; the tests rely on that.

#include <cstddef>
#include <span>

#include "spanseg/corpus.hpp"

namespace spanseg {

enum class Exec { serial, parallel };

namespace kernels {

namespace serial {

// Y[i] = W X[i] + b for i < rows. W is out x in; b may be null.
template <typename Real>
void affine_rows(const Real* x, std::size_t rows, std::size_t in, const Real* w,
                 const Real* b, std::size_t out, Real* y);

// Accumulates dW += dY^T X, db += colsum(dY), dX += dY W. db and dX may be null.
template <typename Real>
void affine_rows_backward(const Real* x, std::size_t rows, std::size_t in,
                          const Real* w, std::size_t out, const Real* dy,
                          Real* dw, Real* db, Real* dx);

// logits[l * max_len + k - 1] = <left[l], right[l + k]> for every span
// (l, l + k) with 1 <= k <= max_len and l + k <= n. Rows have `width`
// entries. Slots for spans past the sentence end are left untouched.
template <typename Real>
void span_dots(const Real* left, const Real* right, std::size_t width, int n,
               int max_len, double* logits);

// scores[s * tags + t] = left[l_s]^T W_t right[r_s]; W is tags x width x width.
template <typename Real>
void tag_biaffine(const Real* left, const Real* right, std::size_t width,
                  const Real* w, std::size_t tags, std::span<const Span> spans,
                  double* scores);

}  // namespace serial

// Same contracts as serial::, parallelized over independent outputs.
namespace omp {

template <typename Real>
void affine_rows(const Real* x, std::size_t rows, std::size_t in, const Real* w,
                 const Real* b, std::size_t out, Real* y);
template <typename Real>
void affine_rows_backward(const Real* x, std::size_t rows, std::size_t in,
                          const Real* w, std::size_t out, const Real* dy,
                          Real* dw, Real* db, Real* dx);
template <typename Real>
void span_dots(const Real* left, const Real* right, std::size_t width, int n,
               int max_len, double* logits);
template <typename Real>
void tag_biaffine(const Real* left, const Real* right, std::size_t width,
                  const Real* w, std::size_t tags, std::span<const Span> spans,
                  double* scores);

}  // namespace omp

template <typename Real>
void affine_rows(Exec exec, const Real* x, std::size_t rows, std::size_t in,
                 const Real* w, const Real* b, std::size_t out, Real* y) {
  if (exec == Exec::parallel) {
    omp::affine_rows(x, rows, in, w, b, out, y);
  } else {
    serial::affine_rows(x, rows, in, w, b, out, y);
  }
}

template <typename Real>
void affine_rows_backward(Exec exec, const Real* x, std::size_t rows,
                          std::size_t in, const Real* w, std::size_t out,
                          const Real* dy, Real* dw, Real* db, Real* dx) {
  if (exec == Exec::parallel) {
    omp::affine_rows_backward(x, rows, in, w, out, dy, dw, db, dx);
  } else {
    serial::affine_rows_backward(x, rows, in, w, out, dy, dw, db, dx);
  }
}

template <typename Real>
void span_dots(Exec exec, const Real* left, const Real* right, std::size_t width,
               int n, int max_len, double* logits) {
  if (exec == Exec::parallel) {
    omp::span_dots(left, right, width, n, max_len, logits);
  } else {
    serial::span_dots(left, right, width, n, max_len, logits);
  }
}

template <typename Real>
void tag_biaffine(Exec exec, const Real* left, const Real* right,
                  std::size_t width, const Real* w, std::size_t tags,
                  std::span<const Span> spans, double* scores) {
  if (exec == Exec::parallel) {
    omp::tag_biaffine(left, right, width, w, tags, spans, scores);
  } else {
    serial::tag_biaffine(left, right, width, w, tags, spans, scores);
  }
}

// Serial-only backward of tag_biaffine: dW_t += g left ⊗ right,
// dleft += g W_t right, dright += g W_t^T left.
template <typename Real>
void tag_biaffine_backward(const Real* left, const Real* right, std::size_t width,
                           const Real* w, std::size_t tags,
                           std::span<const Span> spans, const double* grad,
                           Real* dw, Real* dleft, Real* dright);

// Serial-only backward of span_dots.
template <typename Real>
void span_dots_backward(const Real* left, const Real* right, std::size_t width,
                        int n, int max_len, const double* grad, Real* dleft,
                        Real* dright);

}  // namespace kernels
}  // namespace spanseg
