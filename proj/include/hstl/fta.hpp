#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hstl/conv3d.hpp"
#include "hstl/hierarchy.hpp"
#include "hstl/tensor.hpp"

namespace hstl {

// The two weight-generator linear maps (C -> C) of one region.
struct FtaRegionParams {
  MatRM fc1_weight, fc2_weight;
  Eigen::VectorXd fc1_bias, fc2_bias;
  MatRM fc1_weight_grad, fc2_weight_grad;
  Eigen::VectorXd fc1_bias_grad, fc2_bias_grad;
};

// Softmax-normalized per-channel-per-frame scale weights; w1 + w2 = 1.
struct ScaleWeights {
  Eigen::MatrixXd w1, w2;  // C x T/3
};

// Two temporal max pools over one region: kernel 3 stride 3, and kernel 5
// stride 3 centered on each stride-3 anchor with replicate padding. Both
// outputs have T/3 frames; u_hat = u1 + u2. Requires T divisible by 3.
struct MultiscalePoolOut {
  Tensor4 u1, u2, u_hat;
  std::vector<int> argmax1, argmax2;  // earliest maximizing source frame
};
MultiscalePoolOut multiscale_pool(const Tensor4& region);

// g = spatial mean of u_hat per (channel, frame); logits z_s = FC_s(g);
// weights are the softmax over the two scales.
struct FrameWeightTape {
  Eigen::MatrixXd gap;  // C x T'
  ScaleWeights weights;
};
ScaleWeights frame_weights(const Tensor4& u_hat, const FtaRegionParams& params,
                           FrameWeightTape* tape = nullptr);

struct FtaRegionTape {
  MultiscalePoolOut pools;
  FrameWeightTape fw;
  int in_t = 0;
};

struct FtaTape {
  std::vector<FtaRegionTape> regions;
};

// Frame-level temporal aggregation: per region, Y = w1 .* U1 + w2 .* U2 with
// the weights broadcast over rows and columns; regions concatenated along
// rows. Compresses T to T/3, channel count unchanged.
class FtaBlock {
 public:
  FtaBlock() = default;
  FtaBlock(const PartitionLevel& level, int channels);

  void init(Rng& rng);

  Tensor4 forward(const Tensor4& x, FtaTape* tape = nullptr) const;
  Tensor4 backward(const FtaTape& tape, const Tensor4& dout);

  void zero_grad();

  const PartitionLevel& level() const { return level_; }
  int channels() const { return channels_; }

  std::vector<FtaRegionParams> regions;

 private:
  PartitionLevel level_;
  int channels_ = 0, k_ = 0;
};

}  // namespace hstl
