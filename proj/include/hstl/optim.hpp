#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hstl/tensor.hpp"

namespace hstl {

// Optimizer preset: "adam" (adaptive-moment) or "sgd" (momentum 0.9).
// Weight decay is added to the raw gradient; the learning rate is multiplied
// by `gamma` at each milestone iteration.
struct OptimSpec {
  std::string type = "adam";
  double lr = 1e-5;
  double weight_decay = 5e-4;
  double gamma = 0.1;
  std::vector<long> milestones;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double sgd_momentum = 0.9;
};

class Optimizer {
 public:
  Optimizer(const OptimSpec& spec, const std::vector<ParamRef>& params);

  // Applies one update from the gradients currently stored in the params.
  void step();

  double current_lr() const { return lr_; }
  long iteration() const { return iter_; }

 private:
  OptimSpec spec_;
  std::vector<ParamRef> params_;
  std::vector<std::vector<double>> m_;  // first moment / momentum
  std::vector<std::vector<double>> v_;  // second moment (adam only)
  double lr_ = 0.0;
  long iter_ = 0;
};

}  // namespace hstl
