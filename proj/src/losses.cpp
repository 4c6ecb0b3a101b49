#include "hstl/losses.hpp"

#include <cmath>

#include "hstl/errors.hpp"

namespace hstl {

namespace {

// Pairwise Euclidean distances between columns.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& e) {
  const Eigen::Index n = e.cols();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (e.col(i) - e.col(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

}  // namespace

double triplet_batch_all_strip(const Eigen::MatrixXd& embeddings,
                               const std::vector<int>& labels, double margin,
                               double* active_fraction, Eigen::MatrixXd* dgrad,
                               double grad_scale) {
  const Eigen::Index n = embeddings.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw ShapeError("triplet loss: label count mismatch");
  bool multi_class = false;
  bool has_pair = false;
  for (Eigen::Index i = 0; i < n && !(multi_class && has_pair); ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (labels[i] != labels[j]) multi_class = true;
      else has_pair = true;
    }
  if (!multi_class || !has_pair)
    throw ConfigError("triplet loss: batch needs >=2 subjects with >=2 clips each");

  const Eigen::MatrixXd dist = pairwise_distances(embeddings);

  long total = 0, active = 0;
  double loss_sum = 0.0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (Eigen::Index q = 0; q < n; ++q) {
        if (labels[q] == labels[a]) continue;
        ++total;
        const double hinge = dist(a, p) - dist(a, q) + margin;
        if (hinge > 0.0) {
          ++active;
          loss_sum += hinge;
        }
      }
    }
  if (active_fraction)
    *active_fraction = total > 0 ? static_cast<double>(active) / total : 0.0;
  if (total == 0) return 0.0;
  const double loss = active > 0 ? loss_sum / active : 0.0;

  if (dgrad && active > 0) {
    const double scale = grad_scale / active;
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index p = 0; p < n; ++p) {
        if (p == a || labels[p] != labels[a]) continue;
        for (Eigen::Index q = 0; q < n; ++q) {
          if (labels[q] == labels[a]) continue;
          const double hinge = dist(a, p) - dist(a, q) + margin;
          if (hinge <= 0.0) continue;
          // d d_ap / d a = (a - p) / d_ap; zero subgradient at d = 0.
          if (dist(a, p) > 0.0) {
            const Eigen::VectorXd g =
                (embeddings.col(a) - embeddings.col(p)) * (scale / dist(a, p));
            dgrad->col(a) += g;
            dgrad->col(p) -= g;
          }
          if (dist(a, q) > 0.0) {
            const Eigen::VectorXd g =
                (embeddings.col(a) - embeddings.col(q)) * (scale / dist(a, q));
            dgrad->col(a) -= g;
            dgrad->col(q) += g;
          }
        }
      }
  }
  return loss;
}

double triplet_batch_all(const std::vector<Eigen::MatrixXd>& strip_embeddings,
                         const std::vector<int>& labels, double margin,
                         double* active_fraction,
                         std::vector<Eigen::MatrixXd>* dgrads) {
  const std::size_t s_n = strip_embeddings.size();
  if (s_n == 0) throw ShapeError("triplet loss: no strips");
  if (dgrads) {
    dgrads->resize(s_n);
    for (std::size_t s = 0; s < s_n; ++s)
      (*dgrads)[s] = Eigen::MatrixXd::Zero(strip_embeddings[s].rows(),
                                           strip_embeddings[s].cols());
  }
  double loss = 0.0, frac = 0.0;
  for (std::size_t s = 0; s < s_n; ++s) {
    double f = 0.0;
    loss += triplet_batch_all_strip(strip_embeddings[s], labels, margin, &f,
                                    dgrads ? &(*dgrads)[s] : nullptr,
                                    1.0 / static_cast<double>(s_n));
    frac += f;
  }
  if (active_fraction) *active_fraction = frac / static_cast<double>(s_n);
  return loss / static_cast<double>(s_n);
}

double cross_entropy_smoothed_strip(const Eigen::MatrixXd& logits,
                                    const std::vector<int>& labels, double eps,
                                    Eigen::MatrixXd* dgrad, double grad_scale) {
  const Eigen::Index n_cls = logits.rows();
  const Eigen::Index n = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw ShapeError("cross entropy: label count mismatch");
  if (eps < 0.0 || eps >= 1.0)
    throw ConfigError("cross entropy: eps must be in [0, 1)");

  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= n_cls)
      throw ConfigError("cross entropy: label " + std::to_string(labels[i]) +
                        " out of range for " + std::to_string(n_cls) + " classes");
    const double zmax = logits.col(i).maxCoeff();
    const Eigen::VectorXd shifted = logits.col(i).array() - zmax;
    const double lse = std::log(shifted.array().exp().sum());
    const double off = n_cls > 1 ? eps / static_cast<double>(n_cls - 1) : 0.0;
    for (Eigen::Index c = 0; c < n_cls; ++c) {
      const double target = (c == labels[i]) ? 1.0 - eps : off;
      if (target > 0.0) loss -= target * (shifted[c] - lse);
    }
    if (dgrad) {
      const Eigen::VectorXd softmax = (shifted.array() - lse).exp();
      for (Eigen::Index c = 0; c < n_cls; ++c) {
        const double target = (c == labels[i]) ? 1.0 - eps : off;
        (*dgrad)(c, i) += grad_scale / n * (softmax[c] - target);
      }
    }
  }
  return loss / n;
}

double cross_entropy_smoothed(const std::vector<Eigen::MatrixXd>& strip_logits,
                              const std::vector<int>& labels, double eps,
                              std::vector<Eigen::MatrixXd>* dgrads) {
  const std::size_t s_n = strip_logits.size();
  if (s_n == 0) throw ShapeError("cross entropy: no strips");
  if (dgrads) {
    dgrads->resize(s_n);
    for (std::size_t s = 0; s < s_n; ++s)
      (*dgrads)[s] =
          Eigen::MatrixXd::Zero(strip_logits[s].rows(), strip_logits[s].cols());
  }
  double loss = 0.0;
  for (std::size_t s = 0; s < s_n; ++s)
    loss += cross_entropy_smoothed_strip(strip_logits[s], labels, eps,
                                         dgrads ? &(*dgrads)[s] : nullptr,
                                         1.0 / static_cast<double>(s_n));
  return loss / static_cast<double>(s_n);
}

}  // namespace hstl
