// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetgt/errors.hpp"
#include "hetgt/parallel.hpp"
#include "hetgt/rng.hpp"
#include "hetgt/sparse.hpp"
#include "hetgt/tape.hpp"
#include "hetgt/tensor.hpp"

namespace hetgt {

enum class Act { identity, relu, leaky_relu, elu, tanh, sigmoid };

inline const char* act_name(Act a) {
  switch (a) {
    case Act::identity: return "identity";
    case Act::relu: return "relu";
    case Act::leaky_relu: return "leaky_relu";
    case Act::elu: return "elu";
    case Act::tanh: return "tanh";
    case Act::sigmoid: return "sigmoid";
  }
  return "?";
}

inline Act parse_act(std::string_view s) {
  if (s == "identity") return Act::identity;
  if (s == "relu") return Act::relu;
  if (s == "leaky_relu") return Act::leaky_relu;
  if (s == "elu") return Act::elu;
  if (s == "tanh") return Act::tanh;
  if (s == "sigmoid") return Act::sigmoid;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

namespace detail {

template <class S>
std::string shape_str(const Tensor<S>& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// dense ops
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> matmul(Tape<S>& tp, const Tensor<S>& a, const Tensor<S>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " +
                         detail::shape_str(a) + " * " + detail::shape_str(b));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor<S> out(m, n);
  {
    const S* A = a.data();
    const S* B = b.data();
    S* C = out.data();
#pragma omp parallel for schedule(static) num_threads(max_threads()) \
    if (parallel_worth(m * k * n))
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
      S* ci = C + static_cast<std::size_t>(i) * n;
      const S* ai = A + static_cast<std::size_t>(i) * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const S aik = ai[kk];
        const S* bk = B + kk * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
      }
    }
  }
  tp.record("matmul", {&a, &b}, out, [a, b, out]() {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    const S* G = out.grad_data();
    if (a.requires_grad()) {
      S* GA = a.grad_data();
      const S* B = b.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
          const S* gi = G + i * n;
          const S* bk = B + kk * n;
          S s = S(0);
          for (std::size_t j = 0; j < n; ++j) s += gi[j] * bk[j];
          GA[i * k + kk] += s;
        }
      }
    }
    if (b.requires_grad()) {
      S* GB = b.grad_data();
      const S* A = a.data();
      for (std::size_t i = 0; i < m; ++i) {
        const S* gi = G + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const S aik = A[i * k + kk];
          S* gb = GB + kk * n;
          for (std::size_t j = 0; j < n; ++j) gb[j] += aik * gi[j];
        }
      }
    }
  });
  return out;
}

template <class S>
Tensor<S> add(Tape<S>& tp, const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("add: shapes differ, " + detail::shape_str(a) +
                         " vs " + detail::shape_str(b));
  }
  Tensor<S> out(a.rows(), a.cols());
  const S* A = a.data();
  const S* B = b.data();
  S* C = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) C[i] = A[i] + B[i];
  tp.record("add", {&a, &b}, out, [a, b, out]() {
    const S* G = out.grad_data();
    const std::size_t n = out.size();
    if (a.requires_grad()) {
      S* GA = a.grad_data();
      for (std::size_t i = 0; i < n; ++i) GA[i] += G[i];
    }
    if (b.requires_grad()) {
      S* GB = b.grad_data();
      for (std::size_t i = 0; i < n; ++i) GB[i] += G[i];
    }
  });
  return out;
}

/// out[i, :] = x[i, :] + r[0, :]
template <class S>
Tensor<S> add_row(Tape<S>& tp, const Tensor<S>& x, const Tensor<S>& r) {
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw DimensionError("add_row: bias must be 1x" +
                         std::to_string(x.cols()) + ", got " +
                         detail::shape_str(r));
  }
  const std::size_t n = x.rows(), c = x.cols();
  Tensor<S> out(n, c);
  const S* X = x.data();
  const S* R = r.data();
  S* C = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) C[i * c + j] = X[i * c + j] + R[j];
  }
  tp.record("add_row", {&x, &r}, out, [x, r, out]() {
    const S* G = out.grad_data();
    const std::size_t n = x.rows(), c = x.cols();
    if (x.requires_grad()) {
      S* GX = x.grad_data();
      for (std::size_t i = 0; i < n * c; ++i) GX[i] += G[i];
    }
    if (r.requires_grad()) {
      S* GR = r.grad_data();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) GR[j] += G[i * c + j];
      }
    }
  });
  return out;
}

template <class S>
Tensor<S> scale_const(Tape<S>& tp, const Tensor<S>& x, S c) {
  Tensor<S> out(x.rows(), x.cols());
  const S* X = x.data();
  S* C = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) C[i] = c * X[i];
  tp.record("scale_const", {&x}, out, [x, out, c]() {
    if (!x.requires_grad()) return;
    const S* G = out.grad_data();
    S* GX = x.grad_data();
    for (std::size_t i = 0; i < x.size(); ++i) GX[i] += c * G[i];
  });
  return out;
}

/// out = s[0,0] * x, with gradients into both factors.
template <class S>
Tensor<S> scale_scalar(Tape<S>& tp, const Tensor<S>& x, const Tensor<S>& s) {
  if (s.size() != 1) {
    throw DimensionError("scale_scalar: scale must be 1x1, got " +
                         detail::shape_str(s));
  }
  const S sv = s.data()[0];
  Tensor<S> out(x.rows(), x.cols());
  const S* X = x.data();
  S* C = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) C[i] = sv * X[i];
  tp.record("scale_scalar", {&x, &s}, out, [x, s, out]() {
    const S* G = out.grad_data();
    const std::size_t n = x.size();
    if (x.requires_grad()) {
      const S sv = s.data()[0];
      S* GX = x.grad_data();
      for (std::size_t i = 0; i < n; ++i) GX[i] += sv * G[i];
    }
    if (s.requires_grad()) {
      const S* X = x.data();
      S acc = S(0);
      for (std::size_t i = 0; i < n; ++i) acc += G[i] * X[i];
      s.grad_data()[0] += acc;
    }
  });
  return out;
}

/// out[i, :] = w[i] * x[i, :]. Rows with w[i] == 0 are left exactly zero
/// (never multiplied), so a zero weight cannot produce -0.0.
template <class S>
Tensor<S> diag_scale(Tape<S>& tp, const Tensor<S>& x,
                     std::span<const double> w) {
  if (w.size() != x.rows()) {
    throw DimensionError("diag_scale: weight count " +
                         std::to_string(w.size()) + " != rows " +
                         std::to_string(x.rows()));
  }
  const std::size_t n = x.rows(), c = x.cols();
  Tensor<S> out(n, c);
  const S* X = x.data();
  S* C = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    const S wi = static_cast<S>(w[i]);
    for (std::size_t j = 0; j < c; ++j) C[i * c + j] = wi * X[i * c + j];
  }
  std::vector<double> wv(w.begin(), w.end());
  tp.record("diag_scale", {&x}, out, [x, out, wv = std::move(wv)]() {
    if (!x.requires_grad()) return;
    const S* G = out.grad_data();
    S* GX = x.grad_data();
    const std::size_t c = x.cols();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (wv[i] == 0.0) continue;
      const S wi = static_cast<S>(wv[i]);
      for (std::size_t j = 0; j < c; ++j) GX[i * c + j] += wi * G[i * c + j];
    }
  });
  return out;
}

template <class S>
Tensor<S> activation(Tape<S>& tp, const Tensor<S>& x, Act kind,
                     double slope = 0.01) {
  Tensor<S> out(x.rows(), x.cols());
  const S* X = x.data();
  S* C = out.data();
  const S sl = static_cast<S>(slope);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const S v = X[i];
    switch (kind) {
      case Act::identity: C[i] = v; break;
      case Act::relu: C[i] = v > S(0) ? v : S(0); break;
      case Act::leaky_relu: C[i] = v > S(0) ? v : sl * v; break;
      case Act::elu: C[i] = v > S(0) ? v : std::expm1(v); break;
      case Act::tanh: C[i] = std::tanh(v); break;
      case Act::sigmoid: C[i] = S(1) / (S(1) + std::exp(-v)); break;
    }
  }
  // Backward rebuilt from the stored output alone.
  tp.record(std::string("act_") + act_name(kind), {&x}, out,
            [x, out, kind, sl]() {
              if (!x.requires_grad()) return;
              const S* G = out.grad_data();
              const S* Y = out.data();
              S* GX = x.grad_data();
              for (std::size_t i = 0; i < x.size(); ++i) {
                const S y = Y[i];
                S d = S(0);
                switch (kind) {
                  case Act::identity: d = S(1); break;
                  case Act::relu: d = y > S(0) ? S(1) : S(0); break;
                  case Act::leaky_relu: d = y > S(0) ? S(1) : sl; break;
                  case Act::elu: d = y > S(0) ? S(1) : y + S(1); break;
                  case Act::tanh: d = S(1) - y * y; break;
                  case Act::sigmoid: d = y * (S(1) - y); break;
                }
                GX[i] += d * G[i];
              }
            });
  return out;
}

/// Inverted dropout: kept entries are scaled by 1/(1-p) so the expectation
/// is unchanged. In eval mode (or p == 0) the input tensor is returned
/// untouched. Consumes exactly x.size() draws from `rng` in row-major order.
template <class S>
Tensor<S> dropout(Tape<S>& tp, const Tensor<S>& x, double p, Rng& rng,
                  bool train = true) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout: rate must lie in [0,1), got " +
                      std::to_string(p));
  }
  if (!train || p == 0.0) return x;
  const S inv = static_cast<S>(1.0 / (1.0 - p));
  const std::size_t n = x.size();
  auto mask = std::make_shared<std::vector<std::uint8_t>>(n);
  Tensor<S> out(x.rows(), x.cols());
  const S* X = x.data();
  S* C = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    const bool keep = !rng.bernoulli(p);
    (*mask)[i] = keep;
    C[i] = keep ? inv * X[i] : S(0);
  }
  tp.record("dropout", {&x}, out, [x, out, mask, inv]() {
    if (!x.requires_grad()) return;
    const S* G = out.grad_data();
    S* GX = x.grad_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if ((*mask)[i]) GX[i] += inv * G[i];
    }
  });
  return out;
}

/// Rows [r0, r1) of x, copied.
template <class S>
Tensor<S> slice_rows(Tape<S>& tp, const Tensor<S>& x, std::size_t r0,
                     std::size_t r1) {
  if (r0 >= r1 || r1 > x.rows()) {
    throw RangeError("slice_rows: [" + std::to_string(r0) + "," +
                     std::to_string(r1) + ") out of " +
                     std::to_string(x.rows()) + " rows");
  }
  const std::size_t c = x.cols();
  Tensor<S> out(r1 - r0, c);
  std::copy_n(x.data() + r0 * c, (r1 - r0) * c, out.data());
  tp.record("slice_rows", {&x}, out, [x, out, r0]() {
    if (!x.requires_grad()) return;
    const S* G = out.grad_data();
    S* GX = x.grad_data() + r0 * x.cols();
    for (std::size_t i = 0; i < out.size(); ++i) GX[i] += G[i];
  });
  return out;
}

template <class S>
Tensor<S> concat_rows(Tape<S>& tp, const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  const std::size_t c = parts.front().cols();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.cols() != c) {
      throw DimensionError("concat_rows: column counts differ");
    }
    n += p.rows();
  }
  Tensor<S> out(n, c);
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy_n(p.data(), p.size(), out.data() + off);
    off += p.size();
  }
  std::vector<const Tensor<S>*> ins;
  ins.reserve(parts.size());
  for (const auto& p : parts) ins.push_back(&p);
  tp.record("concat_rows", ins, out, [parts, out]() {
    const S* G = out.grad_data();
    std::size_t off = 0;
    for (const auto& p : parts) {
      if (p.requires_grad()) {
        S* GP = p.grad_data();
        for (std::size_t i = 0; i < p.size(); ++i) GP[i] += G[off + i];
      }
      off += p.size();
    }
  });
  return out;
}

template <class S>
Tensor<S> sum_all(Tape<S>& tp, const Tensor<S>& x) {
  Tensor<S> out(1, 1);
  const S* X = x.data();
  S acc = S(0);
  for (std::size_t i = 0; i < x.size(); ++i) acc += X[i];
  out.data()[0] = acc;
  tp.record("sum_all", {&x}, out, [x, out]() {
    if (!x.requires_grad()) return;
    const S g = out.grad_data()[0];
    S* GX = x.grad_data();
    for (std::size_t i = 0; i < x.size(); ++i) GX[i] += g;
  });
  return out;
}

/// Mean of all entries. The forward sum accumulates in ascending value
/// order, which does not depend on element numbering, so the result is
/// exactly invariant under any permutation of rows.
template <class S>
Tensor<S> mean_all(Tape<S>& tp, const Tensor<S>& x) {
  if (x.size() == 0) throw ContractError("mean_all: empty tensor");
  Tensor<S> out(1, 1);
  std::vector<S> sorted(x.values());
  std::sort(sorted.begin(), sorted.end());
  S acc = S(0);
  for (const S v : sorted) acc += v;
  out.data()[0] = acc / static_cast<S>(x.size());
  tp.record("mean_all", {&x}, out, [x, out]() {
    if (!x.requires_grad()) return;
    const S g = out.grad_data()[0] / static_cast<S>(x.size());
    S* GX = x.grad_data();
    for (std::size_t i = 0; i < x.size(); ++i) GX[i] += g;
  });
  return out;
}

// ---------------------------------------------------------------------------
// sparse / segmented ops
// ---------------------------------------------------------------------------

/// out = M * x with M sparse. Rows fold their entries in the iteration
/// (insertion) order; the backward product x_grad += M^T * out_grad walks the
/// precomputed transpose.
template <class S>
Tensor<S> spmm(Tape<S>& tp, const SparseAdjacency& m, const Tensor<S>& x) {
  if (m.n_cols != x.rows()) {
    throw DimensionError("spmm: matrix is " + std::to_string(m.n_rows) + "x" +
                         std::to_string(m.n_cols) + " but input has " +
                         std::to_string(x.rows()) + " rows");
  }
  const std::size_t f = x.cols();
  Tensor<S> out(m.n_rows, f);
  {
    const S* X = x.data();
    S* C = out.data();
#pragma omp parallel for schedule(static) num_threads(max_threads()) \
    if (parallel_worth(m.nnz() * f))
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(m.n_rows);
         ++r) {
      S* o = C + static_cast<std::size_t>(r) * f;
      for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
        const S w = static_cast<S>(m.iter_val[p]);
        const S* xr = X + static_cast<std::size_t>(m.iter_col[p]) * f;
        for (std::size_t j = 0; j < f; ++j) o[j] += w * xr[j];
      }
    }
  }
  tp.record("spmm", {&x}, out, [&m, x, out]() {
    if (!x.requires_grad()) return;
    const std::size_t f = x.cols();
    const S* G = out.grad_data();
    S* GX = x.grad_data();
    for (std::size_t c = 0; c < m.n_cols; ++c) {
      S* gx = GX + c * f;
      for (std::size_t q = m.t_row_ptr[c]; q < m.t_row_ptr[c + 1]; ++q) {
        const S w = static_cast<S>(m.t_val[q]);
        const S* gr = G + static_cast<std::size_t>(m.t_col[q]) * f;
        for (std::size_t j = 0; j < f; ++j) gx[j] += w * gr[j];
      }
    }
  });
  return out;
}

template <class S>
Tensor<S> gather_rows(Tape<S>& tp, const Tensor<S>& x,
                      const std::vector<std::uint32_t>& idx) {
  const std::size_t c = x.cols();
  Tensor<S> out(idx.size(), c);
  const S* X = x.data();
  S* C = out.data();
  for (std::size_t e = 0; e < idx.size(); ++e) {
    if (idx[e] >= x.rows()) {
      throw RangeError("gather_rows: index " + std::to_string(idx[e]) +
                       " out of " + std::to_string(x.rows()));
    }
    std::copy_n(X + static_cast<std::size_t>(idx[e]) * c, c, C + e * c);
  }
  tp.record("gather_rows", {&x}, out, [x, out, idx]() {
    if (!x.requires_grad()) return;
    const std::size_t c = x.cols();
    const S* G = out.grad_data();
    S* GX = x.grad_data();
    for (std::size_t e = 0; e < idx.size(); ++e) {
      S* gx = GX + static_cast<std::size_t>(idx[e]) * c;
      for (std::size_t j = 0; j < c; ++j) gx[j] += G[e * c + j];
    }
  });
  return out;
}

/// Per-entry value rows for segmented attention: edge entries read
/// h[source], the self entry reads z[target]. h and z must agree on width
/// and node count.
template <class S>
Tensor<S> gather_entries(Tape<S>& tp, const Tensor<S>& h, const Tensor<S>& z,
                         const SegmentIndex& seg) {
  if (h.cols() != z.cols() || h.rows() != z.rows()) {
    throw DimensionError("gather_entries: h " + detail::shape_str(h) +
                         " and z " + detail::shape_str(z) + " differ");
  }
  if (h.rows() != seg.n_nodes) {
    throw DimensionError("gather_entries: tensors have " +
                         std::to_string(h.rows()) + " rows, segments expect " +
                         std::to_string(seg.n_nodes));
  }
  const std::size_t c = h.cols(), e_count = seg.entries();
  Tensor<S> out(e_count, c);
  const S* H = h.data();
  const S* Z = z.data();
  S* C = out.data();
  for (std::size_t e = 0; e < e_count; ++e) {
    const S* src = seg.is_self[e]
                       ? Z + static_cast<std::size_t>(seg.target[e]) * c
                       : H + static_cast<std::size_t>(seg.source[e]) * c;
    std::copy_n(src, c, C + e * c);
  }
  tp.record("gather_entries", {&h, &z}, out, [h, z, &seg, out]() {
    const std::size_t c = h.cols();
    const S* G = out.grad_data();
    const bool hg = h.requires_grad(), zg = z.requires_grad();
    for (std::size_t e = 0; e < seg.entries(); ++e) {
      S* dst = nullptr;
      if (seg.is_self[e]) {
        if (!zg) continue;
        dst = z.grad_data() + static_cast<std::size_t>(seg.target[e]) * c;
      } else {
        if (!hg) continue;
        dst = h.grad_data() + static_cast<std::size_t>(seg.source[e]) * c;
      }
      for (std::size_t j = 0; j < c; ++j) dst[j] += G[e * c + j];
    }
  });
  return out;
}

namespace detail {

/// Shared numerically-stable softmax over [b, e) of a column.
template <class S>
void softmax_span(const S* x, S* y, std::size_t b, std::size_t e) {
  S mx = x[b];
  for (std::size_t p = b + 1; p < e; ++p) mx = std::max(mx, x[p]);
  S denom = S(0);
  for (std::size_t p = b; p < e; ++p) {
    y[p] = std::exp(x[p] - mx);
    denom += y[p];
  }
  for (std::size_t p = b; p < e; ++p) y[p] /= denom;
}

template <class S>
void softmax_span_pull(const S* y, const S* g, S* gx, std::size_t b,
                       std::size_t e) {
  S dot = S(0);
  for (std::size_t p = b; p < e; ++p) dot += g[p] * y[p];
  for (std::size_t p = b; p < e; ++p) gx[p] += y[p] * (g[p] - dot);
}

}  // namespace detail

/// Max-subtracted softmax within every segment of a column of scores.
template <class S>
Tensor<S> segment_softmax(Tape<S>& tp, const Tensor<S>& scores,
                          const SegmentIndex& seg) {
  if (scores.cols() != 1 || scores.rows() != seg.entries()) {
    throw DimensionError("segment_softmax: scores must be " +
                         std::to_string(seg.entries()) + "x1, got " +
                         detail::shape_str(scores));
  }
  Tensor<S> out(scores.rows(), 1);
  const S* X = scores.data();
  S* Y = out.data();
  for (std::size_t s = 0; s < seg.segments(); ++s) {
    detail::softmax_span(X, Y, seg.seg_ptr[s], seg.seg_ptr[s + 1]);
  }
  tp.record("segment_softmax", {&scores}, out, [scores, &seg, out]() {
    if (!scores.requires_grad()) return;
    const S* Y = out.data();
    const S* G = out.grad_data();
    S* GX = scores.grad_data();
    for (std::size_t s = 0; s < seg.segments(); ++s) {
      detail::softmax_span_pull(Y, G, GX, seg.seg_ptr[s], seg.seg_ptr[s + 1]);
    }
  });
  return out;
}

/// Softmax over one whole n x 1 column.
template <class S>
Tensor<S> softmax_col(Tape<S>& tp, const Tensor<S>& x) {
  if (x.cols() != 1 || x.rows() == 0) {
    throw DimensionError("softmax_col: need a non-empty nx1 column, got " +
                         detail::shape_str(x));
  }
  Tensor<S> out(x.rows(), 1);
  detail::softmax_span(x.data(), out.data(), 0, x.rows());
  tp.record("softmax_col", {&x}, out, [x, out]() {
    if (!x.requires_grad()) return;
    detail::softmax_span_pull(out.data(), out.grad_data(), x.grad_data(),
                              std::size_t{0}, x.rows());
  });
  return out;
}

/// out[target(e), :] += alpha[e] * vals[e, :], folding each segment's
/// entries in stored order (edge entries first, self last).
template <class S>
Tensor<S> segment_weighted_sum(Tape<S>& tp, const Tensor<S>& alpha,
                               const Tensor<S>& vals, const SegmentIndex& seg) {
  if (alpha.cols() != 1 || alpha.rows() != seg.entries() ||
      vals.rows() != seg.entries()) {
    throw DimensionError("segment_weighted_sum: weights " +
                         detail::shape_str(alpha) + " / values " +
                         detail::shape_str(vals) + " do not match " +
                         std::to_string(seg.entries()) + " entries");
  }
  const std::size_t f = vals.cols();
  Tensor<S> out(seg.n_nodes, f);
  {
    const S* A = alpha.data();
    const S* V = vals.data();
    S* C = out.data();
#pragma omp parallel for schedule(static) num_threads(max_threads()) \
    if (parallel_worth(seg.entries() * f))
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(seg.segments());
         ++s) {
      S* o = C + static_cast<std::size_t>(seg.seg_target[s]) * f;
      for (std::size_t p = seg.seg_ptr[s]; p < seg.seg_ptr[s + 1]; ++p) {
        const S a = A[p];
        const S* v = V + p * f;
        for (std::size_t j = 0; j < f; ++j) o[j] += a * v[j];
      }
    }
  }
  tp.record("segment_weighted_sum", {&alpha, &vals}, out,
            [alpha, vals, &seg, out]() {
              const std::size_t f = vals.cols();
              const S* G = out.grad_data();
              const S* A = alpha.data();
              const S* V = vals.data();
              const bool ag = alpha.requires_grad(), vg = vals.requires_grad();
              for (std::size_t p = 0; p < seg.entries(); ++p) {
                const S* gt = G + static_cast<std::size_t>(seg.target[p]) * f;
                if (ag) {
                  S s = S(0);
                  const S* v = V + p * f;
                  for (std::size_t j = 0; j < f; ++j) s += gt[j] * v[j];
                  alpha.grad_data()[p] += s;
                }
                if (vg) {
                  S* gv = vals.grad_data() + p * f;
                  const S a = A[p];
                  for (std::size_t j = 0; j < f; ++j) gv[j] += a * gt[j];
                }
              }
            });
  return out;
}

}  // namespace hetgt
