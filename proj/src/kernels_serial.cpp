#include <algorithm>

#include "spanseg/kernels.hpp"

namespace spanseg::kernels {

namespace serial {

template <typename Real>
void affine_rows(const Real* x, std::size_t rows, std::size_t in, const Real* w,
                 const Real* b, std::size_t out, Real* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const Real* xi = x + i * in;
    for (std::size_t o = 0; o < out; ++o) {
      const Real* wo = w + o * in;
      Real acc = b ? b[o] : Real(0);
      for (std::size_t j = 0; j < in; ++j) acc += wo[j] * xi[j];
      y[i * out + o] = acc;
    }
  }
}

template <typename Real>
void affine_rows_backward(const Real* x, std::size_t rows, std::size_t in,
                          const Real* w, std::size_t out, const Real* dy,
                          Real* dw, Real* db, Real* dx) {
  for (std::size_t o = 0; o < out; ++o) {
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
  for (std::size_t i = 0; i < rows; ++i) {
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
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const Real* u = left + static_cast<std::size_t>(spans[s].l) * width;
    const Real* v = right + static_cast<std::size_t>(spans[s].r) * width;
    for (std::size_t t = 0; t < tags; ++t) {
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
}

}  // namespace serial

template <typename Real>
void tag_biaffine_backward(const Real* left, const Real* right, std::size_t width,
                           const Real* w, std::size_t tags,
                           std::span<const Span> spans, const double* grad,
                           Real* dw, Real* dleft, Real* dright) {
  const std::size_t block = width * width;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const Real* u = left + static_cast<std::size_t>(spans[s].l) * width;
    const Real* v = right + static_cast<std::size_t>(spans[s].r) * width;
    Real* du = dleft + static_cast<std::size_t>(spans[s].l) * width;
    Real* dv = dright + static_cast<std::size_t>(spans[s].r) * width;
    for (std::size_t t = 0; t < tags; ++t) {
      const Real g = static_cast<Real>(grad[s * tags + t]);
      if (g == Real(0)) continue;
      const Real* wt = w + t * block;
      Real* dwt = dw + t * block;
      for (std::size_t a = 0; a < width; ++a) {
        const Real* row = wt + a * width;
        Real* drow = dwt + a * width;
        const Real gu = g * u[a];
        Real inner = 0;
        for (std::size_t b = 0; b < width; ++b) {
          drow[b] += gu * v[b];
          inner += row[b] * v[b];
          dv[b] += gu * row[b];
        }
        du[a] += g * inner;
      }
    }
  }
}

template <typename Real>
void span_dots_backward(const Real* left, const Real* right, std::size_t width,
                        int n, int max_len, const double* grad, Real* dleft,
                        Real* dright) {
  for (int l = 0; l < n; ++l) {
    const Real* u = left + static_cast<std::size_t>(l) * width;
    Real* du = dleft + static_cast<std::size_t>(l) * width;
    const int kmax = std::min(max_len, n - l);
    for (int k = 1; k <= kmax; ++k) {
      const Real g = static_cast<Real>(grad[static_cast<std::size_t>(l) * max_len + (k - 1)]);
      if (g == Real(0)) continue;
      const Real* v = right + static_cast<std::size_t>(l + k) * width;
      Real* dv = dright + static_cast<std::size_t>(l + k) * width;
      for (std::size_t j = 0; j < width; ++j) {
        du[j] += g * v[j];
        dv[j] += g * u[j];
      }
    }
  }
}

#define SPANSEG_INSTANTIATE(Real)                                                   \
  template void serial::affine_rows<Real>(const Real*, std::size_t, std::size_t,   \
                                          const Real*, const Real*, std::size_t,   \
                                          Real*);                                   \
  template void serial::affine_rows_backward<Real>(                                 \
      const Real*, std::size_t, std::size_t, const Real*, std::size_t, const Real*, \
      Real*, Real*, Real*);                                                         \
  template void serial::span_dots<Real>(const Real*, const Real*, std::size_t, int, \
                                        int, double*);                              \
  template void serial::tag_biaffine<Real>(const Real*, const Real*, std::size_t,  \
                                           const Real*, std::size_t,                \
                                           std::span<const Span>, double*);         \
  template void tag_biaffine_backward<Real>(const Real*, const Real*, std::size_t, \
                                            const Real*, std::size_t,               \
                                            std::span<const Span>, const double*,   \
                                            Real*, Real*, Real*);                   \
  template void span_dots_backward<Real>(const Real*, const Real*, std::size_t,    \
                                         int, int, const double*, Real*, Real*);

SPANSEG_INSTANTIATE(float)
SPANSEG_INSTANTIATE(double)

#undef SPANSEG_INSTANTIATE

}  // namespace spanseg::kernels
