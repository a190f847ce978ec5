#include "rta/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rta {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t a = splitmix64(state);
  state ^= stream + 0x9e3779b97f4a7c15ULL;
  return a ^ splitmix64(state);
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(seed, stream));
}

Eigen::VectorXd uniform_in_box(std::mt19937_64& rng, const IntervalVector& box) {
  if (!box.finite()) {
    throw std::invalid_argument("uniform_in_box: box has an infinite endpoint");
  }
  Eigen::VectorXd z(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    std::uniform_real_distribution<double> dist(box.lower()[i], box.upper()[i]);
    z[i] = dist(rng);
  }
  return z;
}

DisturbanceSignal DisturbanceSignal::piecewise_linear(std::uint64_t seed, const IntervalVector& W,
                                                      double horizon, double segment) {
  if (segment <= 0.0) {
    throw std::invalid_argument("DisturbanceSignal: segment must be positive");
  }
  if (!W.finite()) {
    throw std::invalid_argument("DisturbanceSignal: W must be finite");
  }
  DisturbanceSignal sig;
  sig.segment_ = segment;
  sig.horizon_ = horizon;
  const auto knot_count =
      static_cast<std::size_t>(std::ceil(std::max(horizon, 0.0) / segment - 1e-12)) + 2;
  auto rng = seeded_rng(seed);
  sig.knots_.reserve(knot_count);
  for (std::size_t k = 0; k < knot_count; ++k) {
    sig.knots_.push_back(uniform_in_box(rng, W));
  }
  return sig;
}

Eigen::VectorXd DisturbanceSignal::operator()(double t) const {
  const double tc = std::clamp(t, 0.0, horizon_);
  auto idx = static_cast<std::size_t>(std::floor(tc / segment_));
  idx = std::min(idx, knots_.size() - 2);
  const double lam = std::clamp(tc / segment_ - static_cast<double>(idx), 0.0, 1.0);
  return (1.0 - lam) * knots_[idx] + lam * knots_[idx + 1];
}

}  // namespace rta
