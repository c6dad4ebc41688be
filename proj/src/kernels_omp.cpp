#include <algorithm>
#include <cstdint>

#include "spanseg/kernels.hpp"

namespace spanseg::kernels::omp {

template <typename Real>
void affine_rows(const Real* x, std::size_t rows, std::size_t in, const Real* w,
                 const Real* b, std::size_t out, Real* y) {
  const auto total = static_cast<std::int64_t>(rows * out);
#pragma omp parallel for schedule(static)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const auto i = static_cast<std::size_t>(idx) / out;
    const auto o = static_cast<std::size_t>(idx) % out;
    const Real* xi = x + i * in;
    const Real* wo = w + o * in;
    Real acc = b ? b[o] : Real(0);
    for (std::size_t j = 0; j < in; ++j) acc += wo[j] * xi[j];
    y[i * out + o] = acc;
  }
}

template <typename Real>
void affine_rows_backward(const Real* x, std::size_t rows, std::size_t in,
                          const Real* w, std::size_t out, const Real* dy,
                          Real* dw, Real* db, Real* dx) {
  const auto out_n = static_cast<std::int64_t>(out);
#pragma omp parallel for schedule(static)
  for (std::int64_t oi = 0; oi < out_n; ++oi) {
    const auto o = static_cast<std::size_t>(oi);
    Real* dwo = dw + o * in;
    for (std::size_t i = 0; i < rows; ++i) {
      const Real g = dy[i * out + o];
      if (g == Real(0)) continue;
      const Real* xi = x + i * in;
      for (std::size_t j = 0; j < in; ++j) dwo[j] += g * xi[j];
    }
    if (db) {
      Real acc = db[o];
      for (std::size_t i = 0; i < rows; ++i) acc += dy[i * out + o];
      db[o] = acc;
    }
  }
  if (!dx) return;
  const auto rows_n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows_n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Real* dxi = dx + i * in;
    const Real* dyi = dy + i * out;
    for (std::size_t o = 0; o < out; ++o) {
      const Real g = dyi[o];
      if (g == Real(0)) continue;
      const Real* wo = w + o * in;
      for (std::size_t j = 0; j < in; ++j) dxi[j] += g * wo[j];
    }
  }
}

template <typename Real>
void span_dots(const Real* left, const Real* right, std::size_t width, int n,
               int max_len, double* logits) {
#pragma omp parallel for schedule(static)
  for (int l = 0; l < n; ++l) {
    const Real* u = left + static_cast<std::size_t>(l) * width;
    const int kmax = std::min(max_len, n - l);
    for (int k = 1; k <= kmax; ++k) {
      const Real* v = right + static_cast<std::size_t>(l + k) * width;
      Real acc = 0;
      for (std::size_t j = 0; j < width; ++j) acc += u[j] * v[j];
      logits[static_cast<std::size_t>(l) * max_len + (k - 1)] = static_cast<double>(acc);
    }
  }
}

template <typename Real>
void tag_biaffine(const Real* left, const Real* right, std::size_t width,
                  const Real* w, std::size_t tags, std::span<const Span> spans,
                  double* scores) {
  const std::size_t block = width * width;
  const auto total = static_cast<std::int64_t>(spans.size() * tags);
#pragma omp parallel for schedule(static)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const auto s = static_cast<std::size_t>(idx) / tags;
    const auto t = static_cast<std::size_t>(idx) % tags;
    const Real* u = left + static_cast<std::size_t>(spans[s].l) * width;
    const Real* v = right + static_cast<std::size_t>(spans[s].r) * width;
    const Real* wt = w + t * block;
    Real acc = 0;
    for (std::size_t a = 0; a < width; ++a) {
      const Real* row = wt + a * width;
      Real inner = 0;
      for (std::size_t b = 0; b < width; ++b) inner += row[b] * v[b];
      acc += u[a] * inner;
    }
    scores[s * tags + t] = static_cast<double>(acc);
  }
}

#define SPANSEG_INSTANTIATE(Real)                                                   \
  template void affine_rows<Real>(const Real*, std::size_t, std::size_t,           \
                                  const Real*, const Real*, std::size_t, Real*);   \
  template void affine_rows_backward<Real>(const Real*, std::size_t, std::size_t,  \
                                           const Real*, std::size_t, const Real*,  \
                                           Real*, Real*, Real*);                    \
  template void span_dots<Real>(const Real*, const Real*, std::size_t, int, int,   \
                                double*);                                           \
  template void tag_biaffine<Real>(const Real*, const Real*, std::size_t,          \
                                   const Real*, std::size_t, std::span<const Span>, \
                                   double*);

SPANSEG_INSTANTIATE(float)
SPANSEG_INSTANTIATE(double)

#undef SPANSEG_INSTANTIATE

}  // namespace spanseg::kernels::omp
