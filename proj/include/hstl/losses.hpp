#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hstl {

struct LossReport {
  double triplet = 0.0;
  double ce = 0.0;
  double active_triplet_fraction = 0.0;
  double total = 0.0;  // triplet + ce, unit weights
};

// Batch-all triplet loss over one strip's embeddings (columns = samples).
// Mean of max(0, d_ap - d_an + margin) over the triples with a positive
// hinge; also reports the fraction of active triples. The gradient is
// accumulated into dgrad (same shape as embeddings) when non-null.
double triplet_batch_all_strip(const Eigen::MatrixXd& embeddings,
                               const std::vector<int>& labels, double margin,
                               double* active_fraction,
                               Eigen::MatrixXd* dgrad = nullptr,
                               double grad_scale = 1.0);

// Multi-strip wrapper: strips averaged.
double triplet_batch_all(const std::vector<Eigen::MatrixXd>& strip_embeddings,
                         const std::vector<int>& labels, double margin,
                         double* active_fraction,
                         std::vector<Eigen::MatrixXd>* dgrads = nullptr);

// Label-smoothed cross entropy for one strip's logits (columns = samples).
// Target mass 1-eps on the true class, eps/(n_cls-1) elsewhere; mean over
// the batch. Gradient accumulated into dgrad when non-null.
double cross_entropy_smoothed_strip(const Eigen::MatrixXd& logits,
                                    const std::vector<int>& labels, double eps,
                                    Eigen::MatrixXd* dgrad = nullptr,
                                    double grad_scale = 1.0);

// Multi-strip wrapper: mean over batch and strips.
double cross_entropy_smoothed(const std::vector<Eigen::MatrixXd>& strip_logits,
                              const std::vector<int>& labels, double eps,
                              std::vector<Eigen::MatrixXd>* dgrads = nullptr);

}  // namespace hstl
