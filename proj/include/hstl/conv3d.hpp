#pragma once

#include <Eigen/Dense>
#include <array>

#include "hstl/rng.hpp"
#include "hstl/tensor.hpp"

namespace hstl {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 3D convolution, stride 1, zero same-padding (odd kernels only), so spatial
// and temporal resolutions are preserved. Weight layout is
// (out_c) x (in_c * kt * kh * kw) with the column index iterating
// (in_channel, dt, dy, dx) row-major; checkpoints store the same order.
class Conv3dLayer {
 public:
  Conv3dLayer() = default;
  Conv3dLayer(int in_c, int out_c, std::array<int, 3> kernel);

  void init_he(Rng& rng);

  Tensor4 forward(const Tensor4& x) const;
  // Accumulates weight/bias gradients; returns the input gradient.
  Tensor4 backward(const Tensor4& x, const Tensor4& dout);

  void zero_grad();

  int in_channels() const { return in_c_; }
  int out_channels() const { return out_c_; }
  const std::array<int, 3>& kernel() const { return kernel_; }

  MatRM weight;  // out_c x (in_c*kt*kh*kw)
  Eigen::VectorXd bias;
  MatRM weight_grad;
  Eigen::VectorXd bias_grad;

 private:
  void im2col_frame(const Tensor4& x, int t_out, Eigen::MatrixXd& cols) const;

  int in_c_ = 0, out_c_ = 0;
  std::array<int, 3> kernel_{3, 3, 3};
};

// Leaky rectifier, applied after every convolution.
void leaky_relu_inplace(Tensor4& x, double slope);
// dpre = dout * (preact > 0 ? 1 : slope), written into dout.
void leaky_relu_backward_inplace(const Tensor4& preact, Tensor4& dout, double slope);

}  // namespace hstl
