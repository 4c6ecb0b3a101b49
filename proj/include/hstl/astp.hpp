#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hstl/conv3d.hpp"
#include "hstl/hierarchy.hpp"
#include "hstl/tensor.hpp"

namespace hstl {

// Generalized-mean exponent; learnable per region.
struct GemParams {
  double p = 6.5;
  double epsilon = 1e-6;
};

// One column per region of the level.
struct LevelEmbedding {
  Eigen::MatrixXd vectors;  // C_out x K_l
  int level_index = 0;
};

// out[c,0,h,w] = max over t of x[c,t,h,w]. `argmax` (optional) receives the
// earliest maximizing frame per (c,h,w) cell for gradient routing.
Tensor4 temporal_max(const Tensor4& x, std::vector<int>* argmax = nullptr);

// Per-spatial-location linear map across channels; spatial dims unchanged.
Tensor4 channel_map(const Tensor4& x, const MatRM& weight,
                    const Eigen::VectorXd& bias);

// out[c] = ( mean over (h,w) of max(x[c,0,h,w], eps)^p )^(1/p); requires T=1.
Eigen::VectorXd gem_pool(const Tensor4& region, const GemParams& params);

struct AstpTape {
  std::vector<int> tmax_argmax;
  Tensor4 tmax_out;   // input of the channel map
  Tensor4 fc_out;     // input of the GeM stage
  int in_t = 0;
};

// Adaptive spatio-temporal pooling for one branch: temporal max, a channel
// map shared across the level's regions, then per-region GeM. Produces one
// embedding column per region.
class AstpBranch {
 public:
  AstpBranch() = default;
  AstpBranch(const PartitionLevel& level, int in_channels, int out_channels,
             double gem_p_init = 6.5, double gem_epsilon = 1e-6);

  void init(Rng& rng);

  LevelEmbedding forward(const Tensor4& x, AstpTape* tape = nullptr) const;
  // dvec has one column of output gradient per region.
  Tensor4 backward(const AstpTape& tape, const Eigen::MatrixXd& dvec);

  void zero_grad();

  const PartitionLevel& level() const { return level_; }
  int in_channels() const { return in_c_; }
  int out_channels() const { return out_c_; }

  MatRM fc_weight;  // out_c x in_c
  Eigen::VectorXd fc_bias;
  MatRM fc_weight_grad;
  Eigen::VectorXd fc_bias_grad;
  std::vector<GemParams> gem;  // per region
  std::vector<double> gem_p_grad;

 private:
  PartitionLevel level_;
  int in_c_ = 0, out_c_ = 0, k_ = 0;
};

}  // namespace hstl
