#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hstl/arme.hpp"
#include "hstl/astp.hpp"
#include "hstl/fta.hpp"
#include "hstl/hierarchy.hpp"
#include "hstl/optim.hpp"
#include "hstl/tensor.hpp"

namespace hstl {

// Stacked ARME stages applied at one hierarchy level (one stage for the
// base architecture; the large-dataset variant stacks two at level 3).
struct LevelPlan {
  std::vector<RegionConvSpec> armes;
};

struct TrainSpec {
  OptimSpec optimizer;
  long iterations = 1000;
  int batch_p = 8;
  int batch_k = 8;
  double margin = 0.2;
  long log_every = 10;
  long checkpoint_every = 0;  // 0 = final checkpoint only
};

struct HstlConfig {
  PartitionHierarchy hierarchy;
  std::vector<LevelPlan> level_plans;  // levels 1..L-1; level L is ASTP-only
  int fta_level = 2;
  int embedding_dim = 128;
  bool spatial_downsample_after_level1 = false;
  double label_smoothing = 0.0;
  int input_h = 64;
  int input_w = 44;
  int clip_len = 30;
  double gem_p_init = 6.5;
  double gem_epsilon = 1e-6;
  int num_classes = 0;  // fixed when training starts, kept in the checkpoint
  TrainSpec train;
  std::string preset_name;

  // Empty when the config is buildable; otherwise one line per problem.
  std::vector<std::string> validate() const;
};

// Named presets: casia (the reference architecture), oumvlp / grew / gait3d
// (the large-dataset variant), desk (small synthetic-corpus setup).
HstlConfig make_preset(const std::string& name);

std::string config_to_json(const HstlConfig& config);
HstlConfig config_from_json(const std::string& json_text);
// FNV-1a 64-bit over the canonical JSON dump.
std::string config_hash(const HstlConfig& config);

// 2x2 spatial max pooling, stride 2; T unchanged. argmax (optional) stores
// the flat input index per output cell for gradient routing.
Tensor4 spatial_downsample(const Tensor4& x, std::vector<int>* argmax = nullptr);
Tensor4 spatial_downsample_backward(const Tensor4& dout,
                                    const std::vector<int>& argmax, int in_h,
                                    int in_w);

// One embedding branch in final concatenation order.
struct BranchSpec {
  enum class Kind { kMain, kLevel, kFta };
  Kind kind = Kind::kLevel;
  int level_index = 0;  // partition level of the regions
  int channels = 0;     // ASTP in/out channel count
  int strip_offset = 0;
  int strip_count = 0;
};

struct ClipTape {
  Tensor4 input;  // temporally padded clip
  std::vector<std::vector<ArmeTape>> arme;  // [level-1][stage]
  std::vector<int> ds_argmax;
  int ds_in_h = 0, ds_in_w = 0;
  FtaTape fta;
  std::vector<AstpTape> branches;            // strip order
  std::vector<Eigen::VectorXd> strip_in;     // ASTP output per strip
  Eigen::MatrixXd embeddings;                // D x n_strips
};

struct ForwardOut {
  Eigen::MatrixXd embeddings;  // D x n_strips
  Eigen::MatrixXd logits;      // n_cls x n_strips (empty when no classifier)
};

// The full HSTL assembly: ARME chain with one FTA insertion, per-level ASTP
// branches, and per-strip embedding heads / classifiers.
class HstlModel {
 public:
  HstlModel(const HstlConfig& config, std::uint64_t seed);

  ForwardOut forward(const Tensor4& clip, ClipTape* tape = nullptr) const;
  // dembeddings: D x n_strips; dlogits: n_cls x n_strips (may be empty).
  void backward(const ClipTape& tape, const Eigen::MatrixXd& dembeddings,
                const Eigen::MatrixXd& dlogits);

  void zero_grad();
  std::vector<ParamRef> parameters();

  int n_strips() const { return n_strips_; }
  const std::vector<BranchSpec>& branches() const { return branch_specs_; }
  const HstlConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t parameter_count() const;
  // Convolution parameters per hierarchy level (ablation instrumentation).
  std::vector<std::size_t> conv_parameter_count_per_level() const;

  // Replicate-pads the last frame until T is divisible by 3.
  static Tensor4 pad_clip_frames(const Tensor4& clip);

 private:
  void check_finite(const Tensor4& x, const std::string& where) const;

  HstlConfig config_;
  std::uint64_t seed_ = 0;
  int n_strips_ = 0;

  std::vector<std::vector<ArmeLevel>> arme_levels_;  // [level-1][stage]
  FtaBlock fta_;
  std::vector<BranchSpec> branch_specs_;
  std::vector<AstpBranch> astp_branches_;  // parallel to branch_specs_

  // Per-strip linear head (embedding_dim x C) and classifier (n_cls x D).
  std::vector<MatRM> head_w_, head_w_grad_;
  std::vector<Eigen::VectorXd> head_b_, head_b_grad_;
  std::vector<MatRM> cls_w_, cls_w_grad_;
  std::vector<Eigen::VectorXd> cls_b_, cls_b_grad_;
};

}  // namespace hstl
