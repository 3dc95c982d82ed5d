#pragma once
// Internal: shape resolution and index mapping for broadcasting elementwise ops.

#include <initializer_list>
#include <string>

#include "fdvae/error.hpp"
#include "fdvae/numerics/tensor.hpp"

namespace fdvae::num::detail {

struct BroadcastIndex {
  std::size_t cols = 0;
  bool row_fixed = false;
  bool col_fixed = false;

  std::size_t operator()(std::size_t r, std::size_t c) const noexcept {
    return (row_fixed ? 0 : r) * cols + (col_fixed ? 0 : c);
  }
};

struct BroadcastShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

inline BroadcastShape resolve_shape(const char* op, std::initializer_list<const Tensor*> ts) {
  BroadcastShape s{1, 1};
  for (const Tensor* t : ts) {
    if (t->rows() > s.rows) s.rows = t->rows();
    if (t->cols() > s.cols) s.cols = t->cols();
  }
  for (const Tensor* t : ts) {
    const bool ok = (t->rows() == s.rows || t->rows() == 1) && (t->cols() == s.cols || t->cols() == 1);
    if (!ok) {
      std::string msg = std::string(op) + ": incompatible shapes";
      for (const Tensor* u : ts) msg += " " + u->shape_string();
      throw InvalidArgument(msg);
    }
  }
  return s;
}

inline BroadcastIndex index_for(const Tensor& t, const BroadcastShape& s) {
  return BroadcastIndex{t.cols(), t.rows() == 1 && s.rows != 1, t.cols() == 1 && s.cols != 1};
}

}  // namespace fdvae::num::detail
