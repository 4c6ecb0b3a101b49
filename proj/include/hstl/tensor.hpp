#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hstl/errors.hpp"

namespace hstl {

// Rank-4 feature volume indexed (channel, frame, row, column), row-major in
// that order. This is the FeatureMap flowing between all network blocks.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int c, int t, int h, int w)
      : c_(c), t_(t), h_(h), w_(w),
        v_(static_cast<std::size_t>(c) * t * h * w, 0.0) {
    if (c < 0 || t < 0 || h < 0 || w < 0)
      throw ShapeError("Tensor4: negative dimension");
  }

  int c() const { return c_; }
  int t() const { return t_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return v_.size(); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  std::size_t index(int c, int t, int h, int w) const {
    return ((static_cast<std::size_t>(c) * t_ + t) * h_ + h) * w_ + w;
  }

  double& at(int c, int t, int h, int w) { return v_[index(c, t, h, w)]; }
  double at(int c, int t, int h, int w) const { return v_[index(c, t, h, w)]; }

  bool same_shape(const Tensor4& o) const {
    return c_ == o.c_ && t_ == o.t_ && h_ == o.h_ && w_ == o.w_;
  }

  std::string shape_str() const {
    return "(" + std::to_string(c_) + "," + std::to_string(t_) + "," +
           std::to_string(h_) + "," + std::to_string(w_) + ")";
  }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  std::vector<double>& raw() { return v_; }
  const std::vector<double>& raw() const { return v_; }

 private:
  int c_ = 0, t_ = 0, h_ = 0, w_ = 0;
  std::vector<double> v_;
};

// Extract rows [row0, row1) into a new tensor.
inline Tensor4 slice_rows(const Tensor4& x, int row0, int row1) {
  Tensor4 out(x.c(), x.t(), row1 - row0, x.w());
  for (int c = 0; c < x.c(); ++c)
    for (int t = 0; t < x.t(); ++t)
      for (int h = row0; h < row1; ++h)
        for (int w = 0; w < x.w(); ++w)
          out.at(c, t, h - row0, w) = x.at(c, t, h, w);
  return out;
}

// Write `part` into rows [row0, row0 + part.h) of `dst`.
inline void paste_rows(Tensor4& dst, const Tensor4& part, int row0) {
  for (int c = 0; c < part.c(); ++c)
    for (int t = 0; t < part.t(); ++t)
      for (int h = 0; h < part.h(); ++h)
        for (int w = 0; w < part.w(); ++w)
          dst.at(c, t, row0 + h, w) = part.at(c, t, h, w);
}

// Add `part` into rows [row0, row0 + part.h) of `dst` (gradient scatter).
inline void add_rows(Tensor4& dst, const Tensor4& part, int row0) {
  for (int c = 0; c < part.c(); ++c)
    for (int t = 0; t < part.t(); ++t)
      for (int h = 0; h < part.h(); ++h)
        for (int w = 0; w < part.w(); ++w)
          dst.at(c, t, row0 + h, w) += part.at(c, t, h, w);
}

// Mutable view of one named parameter tensor and its gradient buffer.
// The registry order is fixed by construction, which keeps checkpoints,
// optimizer state and finite-difference sweeps aligned.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  std::size_t count = 0;
  std::vector<std::size_t> dims;
};

}  // namespace hstl
