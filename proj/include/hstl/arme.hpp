#pragma once

#include <array>
#include <vector>

#include "hstl/conv3d.hpp"
#include "hstl/hierarchy.hpp"
#include "hstl/tensor.hpp"

namespace hstl {

// Channel plan and kernel of one ARME stage. With two conv layers the chain
// is in -> mid -> out; with one layer it is in -> out.
struct RegionConvSpec {
  int in_channels = 1;
  int out_channels = 32;
  int mid_channels = 32;
  std::array<int, 3> kernel{3, 3, 3};
  int conv_layers_per_region = 1;
  double slope = 0.01;  // leaky-ReLU slope, applied after every convolution
};

// Split x into one row band per group of the level; region j has height
// (|P_j| / k) * H. Concatenating the pieces in order reconstructs x.
std::vector<Tensor4> split_regions(const Tensor4& x, const PartitionLevel& level);

struct ArmeRegionTape {
  Tensor4 input;
  std::vector<Tensor4> preact;  // post-conv, pre-activation, one per conv
  std::vector<Tensor4> act;     // post-activation, act[i] feeds conv i+1
};

struct ArmeTape {
  std::vector<ArmeRegionTape> regions;
};

// Adaptive region-based motion extractor: an independent 3D convolution
// stack per region, outputs reassembled to full height. Region j's output
// rows depend only on region j's input rows.
class ArmeLevel {
 public:
  ArmeLevel() = default;
  ArmeLevel(const PartitionLevel& level, const RegionConvSpec& spec);

  void init(Rng& rng);

  Tensor4 forward(const Tensor4& x, ArmeTape* tape = nullptr) const;
  Tensor4 backward(const ArmeTape& tape, const Tensor4& dout);

  void zero_grad();

  int region_count() const { return static_cast<int>(convs_.size()); }
  const PartitionLevel& level() const { return level_; }
  const RegionConvSpec& spec() const { return spec_; }

  std::vector<std::vector<Conv3dLayer>>& region_convs() { return convs_; }
  const std::vector<std::vector<Conv3dLayer>>& region_convs() const { return convs_; }

 private:
  PartitionLevel level_;
  RegionConvSpec spec_;
  int k_ = 0;
  std::vector<std::vector<Conv3dLayer>> convs_;  // [region][conv]
};

// Verification harness: compares analytic gradients of a random linear
// functional of the ARME output against central finite differences on a
// small random instance; returns the max relative error over all weights,
// biases and input cells.
double arme_backward_check(const RegionConvSpec& spec, const PartitionLevel& level,
                           int t_len, int rows_per_part, int width,
                           std::uint64_t seed, double fd_step = 1e-3);

}  // namespace hstl
