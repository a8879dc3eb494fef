// Copyright 2026 The Ambix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ambix/ops.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "ambix/error.h"

namespace ambix::nn {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using VectorMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

void RequireShape(bool ok, const std::string& what) {
  Require(ok, ErrorCode::kShapeError, what);
}

template <typename T>
bool Wants(const NodePtr<T>& n) {
  return n->requires_grad;
}

// Columns of one im2col block: rows are (c, ki, kj), columns output pixels
// [row0, row0 + rows) x [0, B).
template <typename T>
void Im2Col(const T* x, std::int64_t cin, std::int64_t a, std::int64_t b, int k, int before,
            std::int64_t row0, std::int64_t rows, T* cols) {
  const std::int64_t width = rows * b;
  for (std::int64_t c = 0; c < cin; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        T* dst = cols + ((c * k + ki) * k + kj) * width;
        for (std::int64_t r = 0; r < rows; ++r) {
          const std::int64_t src_row = row0 + r + ki - before;
          T* out = dst + r * b;
          if (src_row < 0 || src_row >= a) {
            std::fill(out, out + b, T(0));
            continue;
          }
          const T* in = x + (c * a + src_row) * b;
          const std::int64_t shift = kj - before;
          const std::int64_t lo = std::max<std::int64_t>(0, -shift);
          const std::int64_t hi = std::min<std::int64_t>(b, b - shift);
          std::fill(out, out + lo, T(0));
          std::copy(in + lo + shift, in + hi + shift, out + lo);
          std::fill(out + std::max(lo, hi), out + b, T(0));
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const T* cols, std::int64_t cin, std::int64_t a, std::int64_t b, int k, int before,
            std::int64_t row0, std::int64_t rows, T* dx) {
  const std::int64_t width = rows * b;
  for (std::int64_t c = 0; c < cin; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const T* src = cols + ((c * k + ki) * k + kj) * width;
        for (std::int64_t r = 0; r < rows; ++r) {
          const std::int64_t dst_row = row0 + r + ki - before;
          if (dst_row < 0 || dst_row >= a) continue;
          T* out = dx + (c * a + dst_row) * b;
          const T* in = src + r * b;
          const std::int64_t shift = kj - before;
          const std::int64_t lo = std::max<std::int64_t>(0, -shift);
          const std::int64_t hi = std::min<std::int64_t>(b, b - shift);
          for (std::int64_t j = lo; j < hi; ++j) out[j + shift] += in[j];
        }
      }
    }
  }
}

// Output rows per im2col block, bounding the block to ~4M elements.
std::int64_t ConvBlockRows(std::int64_t patch, std::int64_t a, std::int64_t b) {
  const std::int64_t budget = 4 << 20;
  return std::clamp<std::int64_t>(budget / std::max<std::int64_t>(1, patch * b), 1, a);
}

}  // namespace

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  RequireShape(a.shape() == b.shape(), "Add: shape " + ShapeString(a.shape()) + " vs " +
                                           ShapeString(b.shape()));
  std::vector<T> out(a.value());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  auto pa = a.shared(), pb = b.shared();
  return MakeResult<T>(a.shape(), std::move(out), {pa, pb}, [pa, pb](Node<T>& n) {
    for (auto* p : {pa.get(), pb.get()}) {
      if (!p->requires_grad) continue;
      auto& g = p->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  RequireShape(a.shape() == b.shape(), "Mul: shape " + ShapeString(a.shape()) + " vs " +
                                           ShapeString(b.shape()));
  std::vector<T> out(a.value());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  auto pa = a.shared(), pb = b.shared();
  return MakeResult<T>(a.shape(), std::move(out), {pa, pb}, [pa, pb](Node<T>& n) {
    if (pa->requires_grad) {
      auto& g = pa->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa->value[i];
    }
  });
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& x, T s) {
  std::vector<T> out(x.value());
  for (auto& v : out) v *= s;
  auto px = x.shared();
  return MakeResult<T>(x.shape(), std::move(out), {px}, [px, s](Node<T>& n) {
    auto& g = px->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
  });
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& x) {
  T total = 0;
  for (T v : x.value()) total += v;
  auto px = x.shared();
  return MakeResult<T>({}, {total}, {px}, [px](Node<T>& n) {
    auto& g = px->GradBuffer();
    for (auto& v : g) v += n.grad[0];
  });
}

template <typename T>
Tensor<T> Relu(const Tensor<T>& x) {
  std::vector<T> out(x.value());
  for (auto& v : out) v = v > T(0) ? v : T(0);
  auto px = x.shared();
  return MakeResult<T>(x.shape(), std::move(out), {px}, [px](Node<T>& n) {
    auto& g = px->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (px->value[i] > T(0)) g[i] += n.grad[i];
    }
  });
}

template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, double p, bool training, std::mt19937_64& rng) {
  Require(p >= 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
          "dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.value().size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& m : mask) m = u(rng) >= p ? keep_scale : T(0);
  std::vector<T> out(x.value());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  auto px = x.shared();
  return MakeResult<T>(x.shape(), std::move(out), {px},
                       [px, mask = std::move(mask)](Node<T>& n) {
                         auto& g = px->GradBuffer();
                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += mask[i] * n.grad[i];
                       });
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& x, Shape shape) {
  RequireShape(NumElements(shape) == x.size(),
               "Reshape: " + ShapeString(x.shape()) + " to " + ShapeString(shape));
  auto px = x.shared();
  return MakeResult<T>(std::move(shape), x.value(), {px}, [px](Node<T>& n) {
    auto& g = px->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

namespace {

// Copies src (shape `in`) into dst permuted by `perm`; with `accumulate` the
// inverse direction is taken and dst gathers from src.
template <typename T>
void PermuteCopy(const T* src, T* dst, const Shape& in, const std::vector<int>& perm,
                 bool inverse_accumulate) {
  const int r = static_cast<int>(in.size());
  std::array<std::int64_t, 4> in_dims{1, 1, 1, 1}, in_strides{0, 0, 0, 0};
  // Pad to 4 axes at the front.
  const int pad = 4 - r;
  for (int i = 0; i < r; ++i) in_dims[pad + i] = in[i];
  std::array<std::int64_t, 4> stride_by_axis{};
  std::int64_t s = 1;
  for (int i = 3; i >= 0; --i) {
    stride_by_axis[i] = s;
    s *= in_dims[i];
  }
  std::array<int, 4> p4{0, 1, 2, 3};
  for (int i = 0; i < r; ++i) p4[pad + i] = pad + perm[i];
  std::array<std::int64_t, 4> out_dims{};
  for (int i = 0; i < 4; ++i) {
    out_dims[i] = in_dims[p4[i]];
    in_strides[i] = stride_by_axis[p4[i]];
  }
  std::int64_t o = 0;
  for (std::int64_t i0 = 0; i0 < out_dims[0]; ++i0) {
    for (std::int64_t i1 = 0; i1 < out_dims[1]; ++i1) {
      for (std::int64_t i2 = 0; i2 < out_dims[2]; ++i2) {
        const std::int64_t base = i0 * in_strides[0] + i1 * in_strides[1] + i2 * in_strides[2];
        const std::int64_t st = in_strides[3];
        if (inverse_accumulate) {
          for (std::int64_t i3 = 0; i3 < out_dims[3]; ++i3) dst[base + i3 * st] += src[o++];
        } else {
          for (std::int64_t i3 = 0; i3 < out_dims[3]; ++i3) dst[o++] = src[base + i3 * st];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> Permute(const Tensor<T>& x, const std::vector<int>& perm) {
  const int r = x.rank();
  RequireShape(static_cast<int>(perm.size()) == r && r <= 4 && r >= 1,
               "Permute: permutation rank mismatch");
  std::vector<bool> used(r, false);
  for (int p : perm) {
    RequireShape(p >= 0 && p < r && !used[p], "Permute: invalid permutation");
    used[p] = true;
  }
  Shape out_shape(r);
  for (int i = 0; i < r; ++i) out_shape[i] = x.shape()[perm[i]];
  std::vector<T> out(x.value().size());
  PermuteCopy(x.value().data(), out.data(), x.shape(), perm, false);
  auto px = x.shared();
  return MakeResult<T>(std::move(out_shape), std::move(out), {px}, [px, perm](Node<T>& n) {
    PermuteCopy(n.grad.data(), px->GradBuffer().data(), px->shape, perm, true);
  });
}

template <typename T>
Tensor<T> SliceLast(const Tensor<T>& x, std::int64_t start, std::int64_t length) {
  RequireShape(x.rank() >= 1, "SliceLast: scalar input");
  const std::int64_t last = x.shape().back();
  RequireShape(start >= 0 && length >= 0 && start + length <= last,
               "SliceLast: range outside the last axis");
  const std::int64_t rows = x.size() / std::max<std::int64_t>(last, 1);
  Shape shape = x.shape();
  shape.back() = length;
  std::vector<T> out(rows * length);
  for (std::int64_t r = 0; r < rows; ++r) {
    std::copy_n(x.value().begin() + r * last + start, length, out.begin() + r * length);
  }
  auto px = x.shared();
  return MakeResult<T>(std::move(shape), std::move(out), {px},
                       [px, rows, last, start, length](Node<T>& n) {
                         auto& g = px->GradBuffer();
                         for (std::int64_t r = 0; r < rows; ++r) {
                           for (std::int64_t j = 0; j < length; ++j) {
                             g[r * last + start + j] += n.grad[r * length + j];
                           }
                         }
                       });
}

template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  RequireShape(w.rank() == 2 && x.rank() >= 1, "Linear: weight must be [out, in]");
  const std::int64_t in = w.dim(1), out_features = w.dim(0);
  RequireShape(x.shape().back() == in, "Linear: input features " +
                                           std::to_string(x.shape().back()) + " vs weight " +
                                           ShapeString(w.shape()));
  if (b.defined()) {
    RequireShape(b.rank() == 1 && b.dim(0) == out_features, "Linear: bias shape");
  }
  const std::int64_t rows = x.size() / in;
  Shape shape = x.shape();
  shape.back() = out_features;
  std::vector<T> out(rows * out_features);
  ConstMatrixMap<T> xm(x.value().data(), rows, in);
  ConstMatrixMap<T> wm(w.value().data(), out_features, in);
  MatrixMap<T> ym(out.data(), rows, out_features);
  ym.noalias() = xm * wm.transpose();
  if (b.defined()) ym.rowwise() += ConstVectorMap<T>(b.value().data(), out_features).transpose();
  auto px = x.shared(), pw = w.shared();
  NodePtr<T> pb = b.defined() ? b.shared() : nullptr;
  std::vector<NodePtr<T>> parents{px, pw};
  if (pb) parents.push_back(pb);
  return MakeResult<T>(std::move(shape), std::move(out), std::move(parents),
                       [px, pw, pb, rows, in, out_features](Node<T>& n) {
                         ConstMatrixMap<T> gy(n.grad.data(), rows, out_features);
                         if (px->requires_grad) {
                           MatrixMap<T> gx(px->GradBuffer().data(), rows, in);
                           gx.noalias() +=
                               gy * ConstMatrixMap<T>(pw->value.data(), out_features, in);
                         }
                         if (pw->requires_grad) {
                           MatrixMap<T> gw(pw->GradBuffer().data(), out_features, in);
                           gw.noalias() +=
                               gy.transpose() * ConstMatrixMap<T>(px->value.data(), rows, in);
                         }
                         if (pb && pb->requires_grad) {
                           // Row by row so the summation order does not depend on
                           // how the buffers happen to be aligned.
                           VectorMap<T> gb(pb->GradBuffer().data(), out_features);
                           for (std::int64_t r = 0; r < rows; ++r) gb += gy.row(r).transpose();
                         }
                       });
}

template <typename T>
Tensor<T> BatchMatMul(const Tensor<T>& a, const Tensor<T>& b, bool transpose_a,
                      bool transpose_b) {
  RequireShape(a.rank() == 3 && b.rank() == 3 && a.dim(0) == b.dim(0),
               "BatchMatMul: need [B, M, K] x [B, K, N]");
  const std::int64_t batch = a.dim(0);
  const std::int64_t ar = a.dim(1), ac = a.dim(2), br = b.dim(1), bc = b.dim(2);
  const std::int64_t m = transpose_a ? ac : ar, k = transpose_a ? ar : ac;
  const std::int64_t k2 = transpose_b ? bc : br, nn = transpose_b ? br : bc;
  RequireShape(k == k2, "BatchMatMul: inner dimensions " + ShapeString(a.shape()) + " x " +
                            ShapeString(b.shape()));
  std::vector<T> out(batch * m * nn);
  for (std::int64_t i = 0; i < batch; ++i) {
    ConstMatrixMap<T> am(a.value().data() + i * ar * ac, ar, ac);
    ConstMatrixMap<T> bm(b.value().data() + i * br * bc, br, bc);
    MatrixMap<T> cm(out.data() + i * m * nn, m, nn);
    if (!transpose_a && !transpose_b) cm.noalias() = am * bm;
    if (!transpose_a && transpose_b) cm.noalias() = am * bm.transpose();
    if (transpose_a && !transpose_b) cm.noalias() = am.transpose() * bm;
    if (transpose_a && transpose_b) cm.noalias() = am.transpose() * bm.transpose();
  }
  auto pa = a.shared(), pb = b.shared();
  return MakeResult<T>({batch, m, nn}, std::move(out), {pa, pb},
                       [=](Node<T>& n) {
                         for (std::int64_t i = 0; i < batch; ++i) {
                           ConstMatrixMap<T> gc(n.grad.data() + i * m * nn, m, nn);
                           ConstMatrixMap<T> am(pa->value.data() + i * ar * ac, ar, ac);
                           ConstMatrixMap<T> bm(pb->value.data() + i * br * bc, br, bc);
                           if (pa->requires_grad) {
                             MatrixMap<T> ga(pa->GradBuffer().data() + i * ar * ac, ar, ac);
                             // C = op(A) op(B): dop(A) = dC op(B)^T.
                             if (!transpose_a && !transpose_b) ga.noalias() += gc * bm.transpose();
                             if (!transpose_a && transpose_b) ga.noalias() += gc * bm;
                             if (transpose_a && !transpose_b) ga.noalias() += bm * gc.transpose();
                             if (transpose_a && transpose_b)
                               ga.noalias() += bm.transpose() * gc.transpose();
                           }
                           if (pb->requires_grad) {
                             MatrixMap<T> gb(pb->GradBuffer().data() + i * br * bc, br, bc);
                             if (!transpose_a && !transpose_b) gb.noalias() += am.transpose() * gc;
                             if (!transpose_a && transpose_b) gb.noalias() += gc.transpose() * am;
                             if (transpose_a && !transpose_b) gb.noalias() += am * gc;
                             if (transpose_a && transpose_b)
                               gb.noalias() += gc.transpose() * am.transpose();
                           }
                         }
                       });
}

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x) {
  RequireShape(x.rank() >= 1 && x.shape().back() > 0, "Softmax: empty last axis");
  const std::int64_t cols = x.shape().back();
  const std::int64_t rows = x.size() / cols;
  std::vector<T> out(x.value().size());
  using Row = Eigen::Array<T, Eigen::Dynamic, 1>;
  // Reductions and exp run on an aligned scratch row: on an unaligned Map
  // Eigen peels a scalar head whose length depends on the address, which
  // changes the rounding from one allocation to the next.
  Row scratch(cols);
  for (std::int64_t r = 0; r < rows; ++r) {
    scratch = Eigen::Map<const Row>(x.value().data() + r * cols, cols);
    scratch = (scratch - scratch.maxCoeff()).exp();
    Eigen::Map<Row>(out.data() + r * cols, cols) = scratch * (T(1) / scratch.sum());
  }
  auto px = x.shared();
  auto result = MakeResult<T>(x.shape(), std::move(out), {px}, nullptr);
  if (result.requires_grad()) {
    Node<T>* self = result.node();
    result.node()->backward = [px, rows, cols, self](Node<T>& n) {
      auto& g = px->GradBuffer();
      Row scratch(cols);
      for (std::int64_t r = 0; r < rows; ++r) {
        Eigen::Map<const Row> y(self->value.data() + r * cols, cols);
        Eigen::Map<const Row> gy(n.grad.data() + r * cols, cols);
        Eigen::Map<Row> gx(g.data() + r * cols, cols);
        scratch = gy * y;
        gx += y * (gy - scratch.sum());
      }
    };
  }
  return result;
}

template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  RequireShape(x.rank() == 3 && w.rank() == 4 && w.dim(2) == w.dim(3),
               "Conv2d: need x [C, A, B] and square w [O, C, k, k]");
  RequireShape(w.dim(1) == x.dim(0), "Conv2d: input channels " + std::to_string(x.dim(0)) +
                                         " vs weight " + ShapeString(w.shape()));
  RequireShape(b.rank() == 1 && b.dim(0) == w.dim(0), "Conv2d: bias shape");
  const std::int64_t cin = x.dim(0), a = x.dim(1), bb = x.dim(2), cout = w.dim(0);
  const int k = static_cast<int>(w.dim(2));
  const int before = k / 2;
  const std::int64_t patch = cin * k * k;
  const std::int64_t block = ConvBlockRows(patch, a, bb);
  std::vector<T> out(cout * a * bb);
  std::vector<T> cols(patch * block * bb);
  ConstMatrixMap<T> wm(w.value().data(), cout, patch);
  for (std::int64_t row0 = 0; row0 < a; row0 += block) {
    const std::int64_t rows = std::min(block, a - row0);
    const std::int64_t width = rows * bb;
    Im2Col(x.value().data(), cin, a, bb, k, before, row0, rows, cols.data());
    ConstMatrixMap<T> cm(cols.data(), patch, width);
    Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>> om(out.data() + row0 * bb, cout, width,
                                                         Eigen::OuterStride<>(a * bb));
    om.noalias() = wm * cm;
  }
  for (std::int64_t o = 0; o < cout; ++o) {
    const T bias = b.value()[o];
    T* dst = out.data() + o * a * bb;
    for (std::int64_t i = 0; i < a * bb; ++i) dst[i] += bias;
  }
  auto px = x.shared(), pw = w.shared(), pb = b.shared();
  return MakeResult<T>({cout, a, bb}, std::move(out), {px, pw, pb},
                       [=](Node<T>& n) {
                         if (pb->requires_grad) {
                           auto& g = pb->GradBuffer();
                           for (std::int64_t o = 0; o < cout; ++o) {
                             const T* src = n.grad.data() + o * a * bb;
                             T s = 0;
                             for (std::int64_t i = 0; i < a * bb; ++i) s += src[i];
                             g[o] += s;
                           }
                         }
                         if (!px->requires_grad && !pw->requires_grad) return;
                         std::vector<T> cols(patch * block * bb);
                         std::vector<T> dcols;
                         if (px->requires_grad) dcols.resize(patch * block * bb);
                         for (std::int64_t row0 = 0; row0 < a; row0 += block) {
                           const std::int64_t rows = std::min(block, a - row0);
                           const std::int64_t width = rows * bb;
                           Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>> gy(
                               n.grad.data() + row0 * bb, cout, width,
                               Eigen::OuterStride<>(a * bb));
                           if (pw->requires_grad) {
                             Im2Col(px->value.data(), cin, a, bb, k, before, row0, rows,
                                    cols.data());
                             MatrixMap<T> gw(pw->GradBuffer().data(), cout, patch);
                             gw.noalias() +=
                                 gy * ConstMatrixMap<T>(cols.data(), patch, width).transpose();
                           }
                           if (px->requires_grad) {
                             MatrixMap<T> dc(dcols.data(), patch, width);
                             dc.noalias() =
                                 ConstMatrixMap<T>(pw->value.data(), cout, patch).transpose() * gy;
                             Col2Im(dcols.data(), cin, a, bb, k, before, row0, rows,
                                    px->GradBuffer().data());
                           }
                         }
                       });
}

template <typename T>
Tensor<T> ConvTranspose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                          int stride) {
  RequireShape(x.rank() == 3 && w.rank() == 4, "ConvTranspose2d: need x [C, D, F], w 4-D");
  RequireShape(w.dim(0) == x.dim(0), "ConvTranspose2d: input channels " +
                                         std::to_string(x.dim(0)) + " vs weight " +
                                         ShapeString(w.shape()));
  RequireShape(w.dim(2) == 1, "ConvTranspose2d: kernel height must be 1 (receptive field "
                              "of one along directions), got " + ShapeString(w.shape()));
  RequireShape(stride >= 1, "ConvTranspose2d: stride must be positive");
  RequireShape(b.rank() == 1 && b.dim(0) == w.dim(1), "ConvTranspose2d: bias shape");
  const std::int64_t cin = x.dim(0), d = x.dim(1), f = x.dim(2);
  const std::int64_t cout = w.dim(1), kw = w.dim(3);
  const std::int64_t fo = (f - 1) * stride + kw;
  // Reorder w to [kw, C_out, C_in] so each tap is a contiguous GEMM operand.
  auto tap_weights = [cin, cout, kw](const std::vector<T>& wv) {
    std::vector<T> taps(kw * cout * cin);
    for (std::int64_t c = 0; c < cin; ++c)
      for (std::int64_t o = 0; o < cout; ++o)
        for (std::int64_t j = 0; j < kw; ++j) taps[(j * cout + o) * cin + c] = wv[(c * cout + o) * kw + j];
    return taps;
  };
  const auto taps = tap_weights(w.value());
  std::vector<T> out(cout * d * fo, T(0));
  std::vector<T> tmp(cout * d * f);
  ConstMatrixMap<T> xm(x.value().data(), cin, d * f);
  for (std::int64_t j = 0; j < kw; ++j) {
    MatrixMap<T> tm(tmp.data(), cout, d * f);
    tm.noalias() = ConstMatrixMap<T>(taps.data() + j * cout * cin, cout, cin) * xm;
    for (std::int64_t o = 0; o < cout; ++o) {
      for (std::int64_t r = 0; r < d; ++r) {
        const T* src = tmp.data() + (o * d + r) * f;
        T* dst = out.data() + (o * d + r) * fo + j;
        for (std::int64_t i = 0; i < f; ++i) dst[i * stride] += src[i];
      }
    }
  }
  for (std::int64_t o = 0; o < cout; ++o) {
    for (std::int64_t i = 0; i < d * fo; ++i) out[o * d * fo + i] += b.value()[o];
  }
  auto px = x.shared(), pw = w.shared(), pb = b.shared();
  return MakeResult<T>({cout, d, fo}, std::move(out), {px, pw, pb},
                       [=](Node<T>& n) {
                         if (pb->requires_grad) {
                           auto& g = pb->GradBuffer();
                           for (std::int64_t o = 0; o < cout; ++o) {
                             T s = 0;
                             for (std::int64_t i = 0; i < d * fo; ++i) s += n.grad[o * d * fo + i];
                             g[o] += s;
                           }
                         }
                         const auto taps = tap_weights(pw->value);
                         std::vector<T> gtap(cout * d * f);
                         std::vector<T> gw_taps;
                         if (pw->requires_grad) gw_taps.assign(kw * cout * cin, T(0));
                         ConstMatrixMap<T> xm(px->value.data(), cin, d * f);
                         for (std::int64_t j = 0; j < kw; ++j) {
                           for (std::int64_t o = 0; o < cout; ++o) {
                             for (std::int64_t r = 0; r < d; ++r) {
                               const T* src = n.grad.data() + (o * d + r) * fo + j;
                               T* dst = gtap.data() + (o * d + r) * f;
                               for (std::int64_t i = 0; i < f; ++i) dst[i] = src[i * stride];
                             }
                           }
                           ConstMatrixMap<T> gt(gtap.data(), cout, d * f);
                           if (px->requires_grad) {
                             MatrixMap<T> gx(px->GradBuffer().data(), cin, d * f);
                             gx.noalias() +=
                                 ConstMatrixMap<T>(taps.data() + j * cout * cin, cout, cin)
                                     .transpose() * gt;
                           }
                           if (pw->requires_grad) {
                             MatrixMap<T> gwt(gw_taps.data() + j * cout * cin, cout, cin);
                             gwt.noalias() += gt * xm.transpose();
                           }
                         }
                         if (pw->requires_grad) {
                           auto& g = pw->GradBuffer();
                           for (std::int64_t c = 0; c < cin; ++c)
                             for (std::int64_t o = 0; o < cout; ++o)
                               for (std::int64_t j = 0; j < kw; ++j)
                                 g[(c * cout + o) * kw + j] += gw_taps[(j * cout + o) * cin + c];
                         }
                       });
}

template <typename T>
Tensor<T> GroupNorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    int groups, double eps) {
  RequireShape(x.rank() >= 1, "GroupNorm: scalar input");
  const std::int64_t c = x.dim(0);
  RequireShape(groups >= 1 && c % groups == 0,
               "GroupNorm: " + std::to_string(c) + " channels not divisible by " +
                   std::to_string(groups) + " groups");
  RequireShape(gamma.rank() == 1 && gamma.dim(0) == c && beta.rank() == 1 && beta.dim(0) == c,
               "GroupNorm: affine parameters must be [C]");
  const std::int64_t spatial = x.size() / std::max<std::int64_t>(c, 1);
  const std::int64_t per_group = (c / groups) * spatial;
  std::vector<T> normed(x.value().size());
  std::vector<T> inv_std(groups);
  for (int g = 0; g < groups; ++g) {
    const T* in = x.value().data() + g * per_group;
    double mean = 0.0;
    for (std::int64_t i = 0; i < per_group; ++i) mean += in[i];
    mean /= static_cast<double>(per_group);
    double var = 0.0;
    for (std::int64_t i = 0; i < per_group; ++i) var += (in[i] - mean) * (in[i] - mean);
    var /= static_cast<double>(per_group);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[g] = static_cast<T>(is);
    T* o = normed.data() + g * per_group;
    for (std::int64_t i = 0; i < per_group; ++i) o[i] = static_cast<T>((in[i] - mean) * is);
  }
  std::vector<T> out(normed.size());
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const T ga = gamma.value()[ch], be = beta.value()[ch];
    for (std::int64_t i = 0; i < spatial; ++i) {
      out[ch * spatial + i] = ga * normed[ch * spatial + i] + be;
    }
  }
  auto px = x.shared(), pg = gamma.shared(), pbt = beta.shared();
  return MakeResult<T>(
      x.shape(), std::move(out), {px, pg, pbt},
      [=, normed = std::move(normed), inv_std = std::move(inv_std)](Node<T>& n) {
        if (pg->requires_grad || pbt->requires_grad) {
          for (std::int64_t ch = 0; ch < c; ++ch) {
            T sg = 0, sb = 0;
            for (std::int64_t i = 0; i < spatial; ++i) {
              sg += n.grad[ch * spatial + i] * normed[ch * spatial + i];
              sb += n.grad[ch * spatial + i];
            }
            if (pg->requires_grad) pg->GradBuffer()[ch] += sg;
            if (pbt->requires_grad) pbt->GradBuffer()[ch] += sb;
          }
        }
        if (!px->requires_grad) return;
        auto& gx = px->GradBuffer();
        const std::int64_t cpg = c / groups;
        std::vector<T> dn(per_group);
        for (int g = 0; g < groups; ++g) {
          double mean_dn = 0.0, mean_dn_n = 0.0;
          for (std::int64_t i = 0; i < per_group; ++i) {
            const std::int64_t ch = g * cpg + i / spatial;
            const std::int64_t idx = g * per_group + i;
            dn[i] = n.grad[idx] * pg->value[ch];
            mean_dn += dn[i];
            mean_dn_n += dn[i] * normed[idx];
          }
          mean_dn /= static_cast<double>(per_group);
          mean_dn_n /= static_cast<double>(per_group);
          for (std::int64_t i = 0; i < per_group; ++i) {
            const std::int64_t idx = g * per_group + i;
            gx[idx] += static_cast<T>(inv_std[g] * (dn[i] - mean_dn - normed[idx] * mean_dn_n));
          }
        }
      });
}

template <typename T>
Tensor<T> Mix(const Tensor<T>& e, const Tensor<T>& x) {
  RequireShape(e.rank() == 4 && x.rank() == 3, "Mix: need e [L, 2P, F, T] and x [2P, F, T]");
  RequireShape(e.dim(1) == x.dim(0) && e.dim(2) == x.dim(1) && e.dim(3) == x.dim(2) &&
                   x.dim(0) % 2 == 0,
               "Mix: shapes " + ShapeString(e.shape()) + " and " + ShapeString(x.shape()));
  const std::int64_t l_count = e.dim(0), p_count = x.dim(0) / 2;
  const std::int64_t ft = x.dim(1) * x.dim(2);
  std::vector<T> out(2 * l_count * ft, T(0));
  const T* ev = e.value().data();
  const T* xv = x.value().data();
  for (std::int64_t l = 0; l < l_count; ++l) {
    T* ore = out.data() + (2 * l) * ft;
    T* oim = out.data() + (2 * l + 1) * ft;
    for (std::int64_t p = 0; p < p_count; ++p) {
      const T* er = ev + (l * 2 * p_count + 2 * p) * ft;
      const T* ei = er + ft;
      const T* xr = xv + (2 * p) * ft;
      const T* xi = xr + ft;
      for (std::int64_t i = 0; i < ft; ++i) {
        ore[i] += er[i] * xr[i] - ei[i] * xi[i];
        oim[i] += er[i] * xi[i] + ei[i] * xr[i];
      }
    }
  }
  auto pe = e.shared(), px = x.shared();
  return MakeResult<T>({2 * l_count, x.dim(1), x.dim(2)}, std::move(out), {pe, px},
                       [=](Node<T>& n) {
                         const T* ev = pe->value.data();
                         const T* xv = px->value.data();
                         T* ge = pe->requires_grad ? pe->GradBuffer().data() : nullptr;
                         T* gx = px->requires_grad ? px->GradBuffer().data() : nullptr;
                         for (std::int64_t l = 0; l < l_count; ++l) {
                           const T* gre = n.grad.data() + (2 * l) * ft;
                           const T* gim = n.grad.data() + (2 * l + 1) * ft;
                           for (std::int64_t p = 0; p < p_count; ++p) {
                             const std::int64_t eo = (l * 2 * p_count + 2 * p) * ft;
                             const std::int64_t xo = (2 * p) * ft;
                             for (std::int64_t i = 0; i < ft; ++i) {
                               const T er = ev[eo + i], ei = ev[eo + ft + i];
                               const T xr = xv[xo + i], xi = xv[xo + ft + i];
                               if (ge) {
                                 ge[eo + i] += gre[i] * xr + gim[i] * xi;
                                 ge[eo + ft + i] += -gre[i] * xi + gim[i] * xr;
                               }
                               if (gx) {
                                 gx[xo + i] += gre[i] * er + gim[i] * ei;
                                 gx[xo + ft + i] += -gre[i] * ei + gim[i] * er;
                               }
                             }
                           }
                         }
                       });
}

template <typename T>
Tensor<T> IstftLayer(const Tensor<T>& x, const StftParams& params, std::size_t length) {
  RequireShape(x.rank() == 3 && x.dim(0) % 2 == 0 && x.dim(1) == params.bins(),
               "IstftLayer: need [2L, F, T] with F = " + std::to_string(params.bins()) +
                   ", got " + ShapeString(x.shape()));
  const int l_count = static_cast<int>(x.dim(0) / 2);
  const int bins = static_cast<int>(x.dim(1));
  const int frames = static_cast<int>(x.dim(2));
  Spectrogram spec(l_count, frames, params);
  const std::int64_t ft = static_cast<std::int64_t>(bins) * frames;
  for (int l = 0; l < l_count; ++l) {
    for (std::int64_t i = 0; i < ft; ++i) {
      spec.data()[l * ft + i] = Complex(x.value()[(2 * l) * ft + i],
                                        x.value()[(2 * l + 1) * ft + i]);
    }
  }
  const AudioBuffer audio = Istft(spec, length);
  std::vector<T> out(static_cast<std::size_t>(l_count) * length);
  for (int l = 0; l < l_count; ++l) {
    for (std::size_t i = 0; i < length; ++i) out[l * length + i] = static_cast<T>(audio.channels[l][i]);
  }
  auto px = x.shared();
  return MakeResult<T>({l_count, static_cast<std::int64_t>(length)}, std::move(out), {px},
                       [=](Node<T>& n) {
                         AudioBuffer g(l_count, length, params.sample_rate);
                         for (int l = 0; l < l_count; ++l) {
                           for (std::size_t i = 0; i < length; ++i) g.channels[l][i] = n.grad[l * length + i];
                         }
                         const Spectrogram adj = IstftAdjoint(g, params, frames);
                         auto& gx = px->GradBuffer();
                         for (int l = 0; l < l_count; ++l) {
                           for (std::int64_t i = 0; i < ft; ++i) {
                             gx[(2 * l) * ft + i] += static_cast<T>(adj.data()[l * ft + i].real());
                             gx[(2 * l + 1) * ft + i] += static_cast<T>(adj.data()[l * ft + i].imag());
                           }
                         }
                       });
}

template <typename T>
Tensor<T> MseLoss(const Tensor<T>& a, const Tensor<T>& b) {
  RequireShape(a.shape() == b.shape(), "MseLoss: shape " + ShapeString(a.shape()) + " vs " +
                                           ShapeString(b.shape()));
  RequireShape(a.size() > 0, "MseLoss: empty input");
  double total = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.value()[i]) - b.value()[i];
    total += d * d;
  }
  const double n = static_cast<double>(a.size());
  auto pa = a.shared(), pb = b.shared();
  return MakeResult<T>({}, {static_cast<T>(total / n)}, {pa, pb}, [pa, pb, n](Node<T>& node) {
    const T s = static_cast<T>(2.0 / n) * node.grad[0];
    if (pa->requires_grad) {
      auto& g = pa->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * (pa->value[i] - pb->value[i]);
    }
    if (pb->requires_grad) {
      auto& g = pb->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= s * (pa->value[i] - pb->value[i]);
    }
  });
}

#define AMBIX_INSTANTIATE(T)                                                                \
  template Tensor<T> Add(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> Mul(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> Scale(const Tensor<T>&, T);                                            \
  template Tensor<T> Sum(const Tensor<T>&);                                                 \
  template Tensor<T> Relu(const Tensor<T>&);                                                \
  template Tensor<T> Dropout(const Tensor<T>&, double, bool, std::mt19937_64&);             \
  template Tensor<T> Reshape(const Tensor<T>&, Shape);                                      \
  template Tensor<T> Permute(const Tensor<T>&, const std::vector<int>&);                    \
  template Tensor<T> SliceLast(const Tensor<T>&, std::int64_t, std::int64_t);               \
  template Tensor<T> Linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> BatchMatMul(const Tensor<T>&, const Tensor<T>&, bool, bool);           \
  template Tensor<T> Softmax(const Tensor<T>&);                                             \
  template Tensor<T> Conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> ConvTranspose2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,  \
                                     int);                                                  \
  template Tensor<T> GroupNorm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int,   \
                               double);                                                     \
  template Tensor<T> Mix(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> IstftLayer(const Tensor<T>&, const StftParams&, std::size_t);          \
  template Tensor<T> MseLoss(const Tensor<T>&, const Tensor<T>&);

AMBIX_INSTANTIATE(float)
AMBIX_INSTANTIATE(double)
#undef AMBIX_INSTANTIATE

}  // namespace ambix::nn
