#include "hstl/conv3d.hpp"

#include <cmath>

#include "hstl/errors.hpp"

namespace hstl {

Conv3dLayer::Conv3dLayer(int in_c, int out_c, std::array<int, 3> kernel)
    : in_c_(in_c), out_c_(out_c), kernel_(kernel) {
  for (int kd : kernel_)
    if (kd < 1 || kd % 2 == 0)
      throw ConfigError("Conv3dLayer: kernel dims must be odd, got " +
                        std::to_string(kd));
  const int k = in_c_ * kernel_[0] * kernel_[1] * kernel_[2];
  weight = MatRM::Zero(out_c_, k);
  bias = Eigen::VectorXd::Zero(out_c_);
  weight_grad = MatRM::Zero(out_c_, k);
  bias_grad = Eigen::VectorXd::Zero(out_c_);
}

void Conv3dLayer::init_he(Rng& rng) {
  const double stddev = std::sqrt(2.0 / weight.cols());
  for (Eigen::Index r = 0; r < weight.rows(); ++r)
    for (Eigen::Index c = 0; c < weight.cols(); ++c)
      weight(r, c) = rng.normal(0.0, stddev);
  bias.setZero();
}

void Conv3dLayer::zero_grad() {
  weight_grad.setZero();
  bias_grad.setZero();
}

void Conv3dLayer::im2col_frame(const Tensor4& x, int t_out,
                               Eigen::MatrixXd& cols) const {
  const int kt = kernel_[0], kh = kernel_[1], kw = kernel_[2];
  const int pt = kt / 2, ph = kh / 2, pw = kw / 2;
  const int h = x.h(), w = x.w(), t_len = x.t();
  cols.setZero();
  for (int y = 0; y < h; ++y) {
    for (int xo = 0; xo < w; ++xo) {
      const int col = y * w + xo;
      double* dst = cols.data() + static_cast<std::size_t>(col) * cols.rows();
      int row = 0;
      for (int ci = 0; ci < in_c_; ++ci) {
        for (int dt = 0; dt < kt; ++dt) {
          const int ti = t_out + dt - pt;
          for (int dy = 0; dy < kh; ++dy) {
            const int yi = y + dy - ph;
            if (ti < 0 || ti >= t_len || yi < 0 || yi >= h) {
              row += kw;
              continue;
            }
            for (int dx = 0; dx < kw; ++dx) {
              const int xi = xo + dx - pw;
              if (xi >= 0 && xi < w) dst[row] = x.at(ci, ti, yi, xi);
              ++row;
            }
          }
        }
      }
    }
  }
}

Tensor4 Conv3dLayer::forward(const Tensor4& x) const {
  if (x.c() != in_c_)
    throw ShapeError("Conv3dLayer: input has " + std::to_string(x.c()) +
                     " channels, expected " + std::to_string(in_c_));
  const int n = x.h() * x.w();
  Tensor4 out(out_c_, x.t(), x.h(), x.w());
  Eigen::MatrixXd cols(weight.cols(), n);
  Eigen::MatrixXd frame(out_c_, n);
  for (int t = 0; t < x.t(); ++t) {
    im2col_frame(x, t, cols);
    frame.noalias() = weight * cols;
    frame.colwise() += bias;
    for (int co = 0; co < out_c_; ++co) {
      double* dst = out.data() + out.index(co, t, 0, 0);
      for (int j = 0; j < n; ++j) dst[j] = frame(co, j);
    }
  }
  return out;
}

Tensor4 Conv3dLayer::backward(const Tensor4& x, const Tensor4& dout) {
  const int kt = kernel_[0], kh = kernel_[1], kw = kernel_[2];
  const int pt = kt / 2, ph = kh / 2, pw = kw / 2;
  const int h = x.h(), w = x.w(), t_len = x.t(), n = h * w;
  Tensor4 dx(in_c_, t_len, h, w);
  Eigen::MatrixXd cols(weight.cols(), n);
  Eigen::MatrixXd dframe(out_c_, n);
  Eigen::MatrixXd dcols(weight.cols(), n);
  for (int t = 0; t < t_len; ++t) {
    for (int co = 0; co < out_c_; ++co) {
      const double* src = dout.data() + dout.index(co, t, 0, 0);
      for (int j = 0; j < n; ++j) dframe(co, j) = src[j];
    }
    im2col_frame(x, t, cols);
    weight_grad.noalias() += dframe * cols.transpose();
    bias_grad.noalias() += dframe.rowwise().sum();
    dcols.noalias() = weight.transpose() * dframe;
    // col2im: scatter-add each column back into the padded input window.
    for (int y = 0; y < h; ++y) {
      for (int xo = 0; xo < w; ++xo) {
        const int col = y * w + xo;
        const double* src = dcols.data() + static_cast<std::size_t>(col) * dcols.rows();
        int row = 0;
        for (int ci = 0; ci < in_c_; ++ci) {
          for (int dt = 0; dt < kt; ++dt) {
            const int ti = t + dt - pt;
            for (int dy = 0; dy < kh; ++dy) {
              const int yi = y + dy - ph;
              if (ti < 0 || ti >= t_len || yi < 0 || yi >= h) {
                row += kw;
                continue;
              }
              for (int dx_ = 0; dx_ < kw; ++dx_) {
                const int xi = xo + dx_ - pw;
                if (xi >= 0 && xi < w) dx.at(ci, ti, yi, xi) += src[row];
                ++row;
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

void leaky_relu_inplace(Tensor4& x, double slope) {
  double* p = x.data();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] <= 0.0) p[i] *= slope;
}

void leaky_relu_backward_inplace(const Tensor4& preact, Tensor4& dout,
                                 double slope) {
  const double* p = preact.data();
  double* g = dout.data();
  const std::size_t n = dout.size();
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] <= 0.0) g[i] *= slope;
}

}  // namespace hstl
