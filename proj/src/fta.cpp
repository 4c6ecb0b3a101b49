#include "hstl/fta.hpp"

#include <algorithm>
#include <cmath>

#include "hstl/errors.hpp"

namespace hstl {

MultiscalePoolOut multiscale_pool(const Tensor4& region) {
  if (region.t() % 3 != 0)
    throw ShapeError("multiscale_pool: T=" + std::to_string(region.t()) +
                     " not divisible by 3 (caller must pad)");
  const int t_out = region.t() / 3;
  MultiscalePoolOut out;
  out.u1 = Tensor4(region.c(), t_out, region.h(), region.w());
  out.u2 = Tensor4(region.c(), t_out, region.h(), region.w());
  out.u_hat = Tensor4(region.c(), t_out, region.h(), region.w());
  const std::size_t cells =
      static_cast<std::size_t>(region.c()) * t_out * region.h() * region.w();
  out.argmax1.assign(cells, 0);
  out.argmax2.assign(cells, 0);

  std::size_t cell = 0;
  for (int c = 0; c < region.c(); ++c) {
    for (int i = 0; i < t_out; ++i) {
      for (int h = 0; h < region.h(); ++h) {
        for (int w = 0; w < region.w(); ++w, ++cell) {
          // kernel 3: frames [3i, 3i+2]
          double best1 = region.at(c, 3 * i, h, w);
          int arg1 = 3 * i;
          for (int t = 3 * i + 1; t <= 3 * i + 2; ++t) {
            const double v = region.at(c, t, h, w);
            if (v > best1) {
              best1 = v;
              arg1 = t;
            }
          }
          // kernel 5 centered on the anchor 3i+1, replicate-padded
          double best2 = -std::numeric_limits<double>::infinity();
          int arg2 = 0;
          for (int dt = -1; dt <= 3; ++dt) {
            const int t = std::clamp(3 * i + dt, 0, region.t() - 1);
            const double v = region.at(c, t, h, w);
            if (v > best2) {
              best2 = v;
              arg2 = t;
            }
          }
          out.u1.at(c, i, h, w) = best1;
          out.u2.at(c, i, h, w) = best2;
          out.u_hat.at(c, i, h, w) = best1 + best2;
          out.argmax1[cell] = arg1;
          out.argmax2[cell] = arg2;
        }
      }
    }
  }
  return out;
}

ScaleWeights frame_weights(const Tensor4& u_hat, const FtaRegionParams& params,
                           FrameWeightTape* tape) {
  const int c_n = u_hat.c(), t_n = u_hat.t();
  if (params.fc1_weight.cols() != c_n)
    throw ShapeError("frame_weights: channel count mismatch");
  const int n = u_hat.h() * u_hat.w();
  Eigen::MatrixXd gap(c_n, t_n);
  for (int c = 0; c < c_n; ++c)
    for (int t = 0; t < t_n; ++t) {
      const double* src = u_hat.data() + u_hat.index(c, t, 0, 0);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += src[i];
      gap(c, t) = acc / n;
    }

  Eigen::MatrixXd z1 = params.fc1_weight * gap;
  z1.colwise() += params.fc1_bias;
  Eigen::MatrixXd z2 = params.fc2_weight * gap;
  z2.colwise() += params.fc2_bias;

  ScaleWeights sw;
  sw.w1.resize(c_n, t_n);
  sw.w2.resize(c_n, t_n);
  for (int c = 0; c < c_n; ++c)
    for (int t = 0; t < t_n; ++t) {
      const double w1 = 1.0 / (1.0 + std::exp(z2(c, t) - z1(c, t)));
      sw.w1(c, t) = w1;
      sw.w2(c, t) = 1.0 - w1;
    }
  if (tape) {
    tape->gap = std::move(gap);
    tape->weights = sw;
  }
  return sw;
}

FtaBlock::FtaBlock(const PartitionLevel& level, int channels)
    : level_(level), channels_(channels) {
  for (const auto& g : level.groups) k_ += static_cast<int>(g.size());
  regions.resize(level.groups.size());
  for (auto& r : regions) {
    r.fc1_weight = MatRM::Zero(channels, channels);
    r.fc2_weight = MatRM::Zero(channels, channels);
    r.fc1_bias = Eigen::VectorXd::Zero(channels);
    r.fc2_bias = Eigen::VectorXd::Zero(channels);
    r.fc1_weight_grad = MatRM::Zero(channels, channels);
    r.fc2_weight_grad = MatRM::Zero(channels, channels);
    r.fc1_bias_grad = Eigen::VectorXd::Zero(channels);
    r.fc2_bias_grad = Eigen::VectorXd::Zero(channels);
  }
}

void FtaBlock::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / channels_);
  for (auto& r : regions) {
    for (Eigen::Index i = 0; i < r.fc1_weight.rows(); ++i)
      for (Eigen::Index j = 0; j < r.fc1_weight.cols(); ++j)
        r.fc1_weight(i, j) = rng.normal(0.0, stddev);
    for (Eigen::Index i = 0; i < r.fc2_weight.rows(); ++i)
      for (Eigen::Index j = 0; j < r.fc2_weight.cols(); ++j)
        r.fc2_weight(i, j) = rng.normal(0.0, stddev);
    r.fc1_bias.setZero();
    r.fc2_bias.setZero();
  }
}

void FtaBlock::zero_grad() {
  for (auto& r : regions) {
    r.fc1_weight_grad.setZero();
    r.fc2_weight_grad.setZero();
    r.fc1_bias_grad.setZero();
    r.fc2_bias_grad.setZero();
  }
}

Tensor4 FtaBlock::forward(const Tensor4& x, FtaTape* tape) const {
  if (x.c() != channels_)
    throw ShapeError("FtaBlock: input has " + std::to_string(x.c()) +
                     " channels, expected " + std::to_string(channels_));
  std::vector<Tensor4> parts = split_regions(x, level_);
  if (tape) tape->regions.resize(parts.size());
  const int t_out = x.t() / 3;
  Tensor4 out(channels_, t_out, x.h(), x.w());
  const int band = x.h() / k_;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    MultiscalePoolOut pools = multiscale_pool(parts[j]);
    FrameWeightTape fw;
    const ScaleWeights sw = frame_weights(pools.u_hat, regions[j], tape ? &fw : nullptr);
    Tensor4 y(channels_, t_out, parts[j].h(), parts[j].w());
    for (int c = 0; c < channels_; ++c)
      for (int i = 0; i < t_out; ++i) {
        const double w1 = sw.w1(c, i), w2 = sw.w2(c, i);
        for (int h = 0; h < y.h(); ++h)
          for (int w = 0; w < y.w(); ++w)
            y.at(c, i, h, w) =
                w1 * pools.u1.at(c, i, h, w) + w2 * pools.u2.at(c, i, h, w);
      }
    const int row0 = (level_.groups[j].front() - 1) * band;
    paste_rows(out, y, row0);
    if (tape) {
      tape->regions[j].pools = std::move(pools);
      tape->regions[j].fw = std::move(fw);
      tape->regions[j].in_t = x.t();
    }
  }
  return out;
}

Tensor4 FtaBlock::backward(const FtaTape& tape, const Tensor4& dout) {
  const int band = dout.h() / k_;
  Tensor4 dx(channels_, tape.regions.front().in_t, dout.h(), dout.w());
  for (std::size_t j = 0; j < regions.size(); ++j) {
    const FtaRegionTape& rt = tape.regions[j];
    const int row0 = (level_.groups[j].front() - 1) * band;
    const int row1 = level_.groups[j].back() * band;
    const Tensor4 dy = slice_rows(dout, row0, row1);
    const Tensor4& u1 = rt.pools.u1;
    const Tensor4& u2 = rt.pools.u2;
    const int t_out = dy.t(), n = dy.h() * dy.w();

    // dY -> weights and pooled scales.
    Eigen::MatrixXd dw1(channels_, t_out), dw2(channels_, t_out);
    Tensor4 du1(channels_, t_out, dy.h(), dy.w());
    Tensor4 du2(channels_, t_out, dy.h(), dy.w());
    for (int c = 0; c < channels_; ++c)
      for (int i = 0; i < t_out; ++i) {
        const double w1 = rt.fw.weights.w1(c, i), w2 = rt.fw.weights.w2(c, i);
        double acc1 = 0.0, acc2 = 0.0;
        for (int h = 0; h < dy.h(); ++h)
          for (int w = 0; w < dy.w(); ++w) {
            const double g = dy.at(c, i, h, w);
            acc1 += g * u1.at(c, i, h, w);
            acc2 += g * u2.at(c, i, h, w);
            du1.at(c, i, h, w) = g * w1;
            du2.at(c, i, h, w) = g * w2;
          }
        dw1(c, i) = acc1;
        dw2(c, i) = acc2;
      }

    // Softmax over the two scales: dz1 = w1*w2*(dw1 - dw2), dz2 = -dz1.
    Eigen::MatrixXd dz1 = (rt.fw.weights.w1.array() * rt.fw.weights.w2.array() *
                           (dw1.array() - dw2.array()))
                              .matrix();
    FtaRegionParams& rp = regions[j];
    rp.fc1_weight_grad.noalias() += dz1 * rt.fw.gap.transpose();
    rp.fc2_weight_grad.noalias() -= dz1 * rt.fw.gap.transpose();
    rp.fc1_bias_grad.noalias() += dz1.rowwise().sum();
    rp.fc2_bias_grad.noalias() -= dz1.rowwise().sum();
    Eigen::MatrixXd dgap = rp.fc1_weight.transpose() * dz1 -
                           rp.fc2_weight.transpose() * dz1;

    // Spatial mean backward into u_hat, then u_hat = u1 + u2.
    Tensor4 du_hat(channels_, t_out, dy.h(), dy.w());
    for (int c = 0; c < channels_; ++c)
      for (int i = 0; i < t_out; ++i) {
        const double g = dgap(c, i) / n;
        for (int h = 0; h < dy.h(); ++h)
          for (int w = 0; w < dy.w(); ++w) du_hat.at(c, i, h, w) = g;
      }
    for (std::size_t i = 0; i < du1.size(); ++i) {
      du1.data()[i] += du_hat.data()[i];
      du2.data()[i] += du_hat.data()[i];
    }

    // Max-pool backward via stored argmax.
    Tensor4 dregion(channels_, rt.in_t, dy.h(), dy.w());
    std::size_t cell = 0;
    for (int c = 0; c < channels_; ++c)
      for (int i = 0; i < t_out; ++i)
        for (int h = 0; h < dy.h(); ++h)
          for (int w = 0; w < dy.w(); ++w, ++cell) {
            dregion.at(c, rt.pools.argmax1[cell], h, w) += du1.at(c, i, h, w);
            dregion.at(c, rt.pools.argmax2[cell], h, w) += du2.at(c, i, h, w);
          }
    add_rows(dx, dregion, row0);
  }
  return dx;
}

}  // namespace hstl
