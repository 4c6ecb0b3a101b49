#include "hstl/astp.hpp"

#include <cmath>

#include "hstl/errors.hpp"

namespace hstl {

Tensor4 temporal_max(const Tensor4& x, std::vector<int>* argmax) {
  if (x.t() < 1) throw ShapeError("temporal_max: T must be >= 1");
  Tensor4 out(x.c(), 1, x.h(), x.w());
  if (argmax) argmax->assign(static_cast<std::size_t>(x.c()) * x.h() * x.w(), 0);
  std::size_t cell = 0;
  for (int c = 0; c < x.c(); ++c) {
    for (int h = 0; h < x.h(); ++h) {
      for (int w = 0; w < x.w(); ++w, ++cell) {
        double best = x.at(c, 0, h, w);
        int best_t = 0;
        for (int t = 1; t < x.t(); ++t) {
          const double v = x.at(c, t, h, w);
          if (v > best) {
            best = v;
            best_t = t;
          }
        }
        out.at(c, 0, h, w) = best;
        if (argmax) (*argmax)[cell] = best_t;
      }
    }
  }
  return out;
}

Tensor4 channel_map(const Tensor4& x, const MatRM& weight,
                    const Eigen::VectorXd& bias) {
  if (x.c() != weight.cols())
    throw ShapeError("channel_map: input channels " + std::to_string(x.c()) +
                     " != weight cols " + std::to_string(weight.cols()));
  const int n = x.t() * x.h() * x.w();
  Eigen::Map<const Eigen::MatrixXd> xin(x.data(), n, x.c());  // column c is channel c
  Tensor4 out(static_cast<int>(weight.rows()), x.t(), x.h(), x.w());
  Eigen::Map<Eigen::MatrixXd> xout(out.data(), n, weight.rows());
  xout.noalias() = xin * weight.transpose();
  xout.rowwise() += bias.transpose();
  return out;
}

Eigen::VectorXd gem_pool(const Tensor4& region, const GemParams& params) {
  if (region.t() != 1) throw ShapeError("gem_pool: expected T=1 input");
  if (params.p <= 0.0 || params.epsilon <= 0.0)
    throw ConfigError("gem_pool: p and epsilon must be positive");
  const int n = region.h() * region.w();
  if (n == 0) throw ShapeError("gem_pool: empty region");
  Eigen::VectorXd out(region.c());
  for (int c = 0; c < region.c(); ++c) {
    double acc = 0.0;
    const double* src = region.data() + region.index(c, 0, 0, 0);
    for (int i = 0; i < n; ++i)
      acc += std::pow(std::max(src[i], params.epsilon), params.p);
    out[c] = std::pow(acc / n, 1.0 / params.p);
  }
  return out;
}

AstpBranch::AstpBranch(const PartitionLevel& level, int in_channels,
                       int out_channels, double gem_p_init, double gem_epsilon)
    : level_(level), in_c_(in_channels), out_c_(out_channels) {
  for (const auto& g : level.groups) k_ += static_cast<int>(g.size());
  fc_weight = MatRM::Zero(out_c_, in_c_);
  fc_bias = Eigen::VectorXd::Zero(out_c_);
  fc_weight_grad = MatRM::Zero(out_c_, in_c_);
  fc_bias_grad = Eigen::VectorXd::Zero(out_c_);
  gem.assign(level.groups.size(), GemParams{gem_p_init, gem_epsilon});
  gem_p_grad.assign(level.groups.size(), 0.0);
}

void AstpBranch::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / in_c_);
  for (Eigen::Index r = 0; r < fc_weight.rows(); ++r)
    for (Eigen::Index c = 0; c < fc_weight.cols(); ++c)
      fc_weight(r, c) = rng.normal(0.0, stddev);
  fc_bias.setZero();
}

void AstpBranch::zero_grad() {
  fc_weight_grad.setZero();
  fc_bias_grad.setZero();
  std::fill(gem_p_grad.begin(), gem_p_grad.end(), 0.0);
}

LevelEmbedding AstpBranch::forward(const Tensor4& x, AstpTape* tape) const {
  if (x.h() % k_ != 0)
    throw ShapeError("AstpBranch: height " + std::to_string(x.h()) +
                     " not divisible by k=" + std::to_string(k_));
  std::vector<int> argmax;
  Tensor4 tmax = temporal_max(x, tape ? &argmax : nullptr);
  Tensor4 mapped = channel_map(tmax, fc_weight, fc_bias);

  LevelEmbedding emb;
  emb.level_index = level_.level_index;
  emb.vectors.resize(out_c_, static_cast<Eigen::Index>(level_.groups.size()));
  const int band = x.h() / k_;
  for (std::size_t j = 0; j < level_.groups.size(); ++j) {
    const int row0 = (level_.groups[j].front() - 1) * band;
    const int row1 = level_.groups[j].back() * band;
    const Tensor4 region = slice_rows(mapped, row0, row1);
    emb.vectors.col(static_cast<Eigen::Index>(j)) = gem_pool(region, gem[j]);
  }
  if (tape) {
    tape->tmax_argmax = std::move(argmax);
    tape->tmax_out = std::move(tmax);
    tape->fc_out = std::move(mapped);
    tape->in_t = x.t();
  }
  return emb;
}

Tensor4 AstpBranch::backward(const AstpTape& tape, const Eigen::MatrixXd& dvec) {
  const Tensor4& mapped = tape.fc_out;
  const int band = mapped.h() / k_;
  Tensor4 dmapped(mapped.c(), 1, mapped.h(), mapped.w());

  // GeM backward per region, including d/dp.
  for (std::size_t j = 0; j < level_.groups.size(); ++j) {
    const GemParams& gp = gem[j];
    const int row0 = (level_.groups[j].front() - 1) * band;
    const int row1 = level_.groups[j].back() * band;
    const int n = (row1 - row0) * mapped.w();
    for (int c = 0; c < mapped.c(); ++c) {
      double m = 0.0, dm_dp = 0.0;
      for (int h = row0; h < row1; ++h)
        for (int w = 0; w < mapped.w(); ++w) {
          const double y = std::max(mapped.at(c, 0, h, w), gp.epsilon);
          const double yp = std::pow(y, gp.p);
          m += yp;
          dm_dp += yp * std::log(y);
        }
      m /= n;
      dm_dp /= n;
      const double out = std::pow(m, 1.0 / gp.p);
      const double go = dvec(c, static_cast<Eigen::Index>(j));
      // d out / d p
      gem_p_grad[j] +=
          go * out * (-std::log(m) / (gp.p * gp.p) + dm_dp / (gp.p * m));
      // d out / d y_i = m^(1/p - 1) * y_i^(p-1) / n, zero inside the clamp
      const double scale = std::pow(m, 1.0 / gp.p - 1.0) / n;
      for (int h = row0; h < row1; ++h)
        for (int w = 0; w < mapped.w(); ++w) {
          const double v = mapped.at(c, 0, h, w);
          if (v > gp.epsilon)
            dmapped.at(c, 0, h, w) += go * scale * std::pow(v, gp.p - 1.0);
        }
    }
  }

  // Channel-map backward.
  const Tensor4& tmax = tape.tmax_out;
  const int n_loc = tmax.h() * tmax.w();
  Eigen::Map<const Eigen::MatrixXd> xin(tmax.data(), n_loc, tmax.c());
  Eigen::Map<const Eigen::MatrixXd> dmap(dmapped.data(), n_loc, mapped.c());
  fc_weight_grad.noalias() += dmap.transpose() * xin;
  fc_bias_grad.noalias() += dmap.colwise().sum().transpose();
  Eigen::MatrixXd dtmax_mat = dmap * fc_weight;  // n_loc x in_c

  // Temporal-max backward: route to the earliest maximizing frame.
  Tensor4 dx(tmax.c(), tape.in_t, tmax.h(), tmax.w());
  std::size_t cell = 0;
  for (int c = 0; c < tmax.c(); ++c)
    for (int h = 0; h < tmax.h(); ++h)
      for (int w = 0; w < tmax.w(); ++w, ++cell) {
        const int t = tape.tmax_argmax[cell];
        dx.at(c, t, h, w) += dtmax_mat(h * tmax.w() + w, c);
      }
  return dx;
}

}  // namespace hstl
