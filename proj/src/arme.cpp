#include "hstl/arme.hpp"

#include <cmath>

#include "hstl/errors.hpp"

namespace hstl {

namespace {

int level_part_count(const PartitionLevel& level) {
  int k = 0;
  for (const auto& g : level.groups) k += static_cast<int>(g.size());
  return k;
}

}  // namespace

std::vector<Tensor4> split_regions(const Tensor4& x, const PartitionLevel& level) {
  const int k = level_part_count(level);
  if (k < 1) throw ConfigError("split_regions: level has no parts");
  if (x.h() % k != 0)
    throw ShapeError("split_regions: height " + std::to_string(x.h()) +
                     " not divisible by k=" + std::to_string(k));
  const int band = x.h() / k;
  std::vector<Tensor4> regions;
  regions.reserve(level.groups.size());
  for (const auto& g : level.groups) {
    const int row0 = (g.front() - 1) * band;
    const int row1 = g.back() * band;
    regions.push_back(slice_rows(x, row0, row1));
  }
  return regions;
}

ArmeLevel::ArmeLevel(const PartitionLevel& level, const RegionConvSpec& spec)
    : level_(level), spec_(spec), k_(level_part_count(level)) {
  if (spec.conv_layers_per_region < 1 || spec.conv_layers_per_region > 2)
    throw ConfigError("ArmeLevel: conv_layers_per_region must be 1 or 2");
  for (std::size_t j = 0; j < level.groups.size(); ++j) {
    std::vector<Conv3dLayer> stack;
    if (spec.conv_layers_per_region == 1) {
      stack.emplace_back(spec.in_channels, spec.out_channels, spec.kernel);
    } else {
      stack.emplace_back(spec.in_channels, spec.mid_channels, spec.kernel);
      stack.emplace_back(spec.mid_channels, spec.out_channels, spec.kernel);
    }
    convs_.push_back(std::move(stack));
  }
}

void ArmeLevel::init(Rng& rng) {
  for (auto& stack : convs_)
    for (auto& conv : stack) conv.init_he(rng);
}

void ArmeLevel::zero_grad() {
  for (auto& stack : convs_)
    for (auto& conv : stack) conv.zero_grad();
}

Tensor4 ArmeLevel::forward(const Tensor4& x, ArmeTape* tape) const {
  if (x.c() != spec_.in_channels)
    throw ShapeError("ArmeLevel: input has " + std::to_string(x.c()) +
                     " channels, spec expects " + std::to_string(spec_.in_channels));
  std::vector<Tensor4> regions = split_regions(x, level_);
  if (regions.size() != convs_.size())
    throw ShapeError("ArmeLevel: weight-set count " + std::to_string(convs_.size()) +
                     " != region count " + std::to_string(regions.size()));
  if (tape) tape->regions.resize(regions.size());

  Tensor4 out(spec_.out_channels, x.t(), x.h(), x.w());
  const int band = x.h() / k_;
  for (std::size_t j = 0; j < regions.size(); ++j) {
    Tensor4 cur = std::move(regions[j]);
    if (tape) tape->regions[j].input = cur;
    for (std::size_t ci = 0; ci < convs_[j].size(); ++ci) {
      Tensor4 pre = convs_[j][ci].forward(cur);
      if (tape) tape->regions[j].preact.push_back(pre);
      leaky_relu_inplace(pre, spec_.slope);
      if (tape) tape->regions[j].act.push_back(pre);
      cur = std::move(pre);
    }
    const int row0 = (level_.groups[j].front() - 1) * band;
    paste_rows(out, cur, row0);
  }
  return out;
}

Tensor4 ArmeLevel::backward(const ArmeTape& tape, const Tensor4& dout) {
  Tensor4 dx(spec_.in_channels, dout.t(), dout.h(), dout.w());
  const int band = dout.h() / k_;
  for (std::size_t j = 0; j < convs_.size(); ++j) {
    const int row0 = (level_.groups[j].front() - 1) * band;
    const int row1 = level_.groups[j].back() * band;
    Tensor4 grad = slice_rows(dout, row0, row1);
    for (int ci = static_cast<int>(convs_[j].size()) - 1; ci >= 0; --ci) {
      leaky_relu_backward_inplace(tape.regions[j].preact[ci], grad, spec_.slope);
      const Tensor4& input =
          ci == 0 ? tape.regions[j].input : tape.regions[j].act[ci - 1];
      grad = convs_[j][ci].backward(input, grad);
    }
    paste_rows(dx, grad, row0);
  }
  return dx;
}

double arme_backward_check(const RegionConvSpec& spec, const PartitionLevel& level,
                           int t_len, int rows_per_part, int width,
                           std::uint64_t seed, double fd_step) {
  const int k = level_part_count(level);
  const int h = k * rows_per_part;
  Rng rng(seed);
  ArmeLevel arme(level, spec);
  arme.init(rng);

  Tensor4 x(spec.in_channels, t_len, h, width);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Tensor4 proj(spec.out_channels, t_len, h, width);
  for (std::size_t i = 0; i < proj.size(); ++i) proj.data()[i] = rng.normal();

  auto loss = [&]() {
    const Tensor4 y = arme.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += proj.data()[i] * y.data()[i];
    return s;
  };

  // Analytic gradients.
  arme.zero_grad();
  ArmeTape tape;
  arme.forward(x, &tape);
  Tensor4 dx = arme.backward(tape, proj);

  auto rel_err = [](double a, double b) {
    const double denom = std::max(std::abs(a) + std::abs(b), 1e-6);
    return std::abs(a - b) / denom;
  };

  double worst = 0.0;
  auto fd_sweep = [&](double* ptr, std::size_t n, const double* analytic) {
    for (std::size_t i = 0; i < n; ++i) {
      const double saved = ptr[i];
      ptr[i] = saved + fd_step;
      const double up = loss();
      ptr[i] = saved - fd_step;
      const double down = loss();
      ptr[i] = saved;
      const double fd = (up - down) / (2.0 * fd_step);
      worst = std::max(worst, rel_err(fd, analytic[i]));
    }
  };

  for (auto& stack : arme.region_convs()) {
    for (auto& conv : stack) {
      fd_sweep(conv.weight.data(), static_cast<std::size_t>(conv.weight.size()),
               conv.weight_grad.data());
      fd_sweep(conv.bias.data(), static_cast<std::size_t>(conv.bias.size()),
               conv.bias_grad.data());
    }
  }
  fd_sweep(x.data(), x.size(), dx.data());
  return worst;
}

}  // namespace hstl
