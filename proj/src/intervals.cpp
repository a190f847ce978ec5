#include "rta/intervals.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rta {

IntervalVector::IntervalVector(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw std::invalid_argument("IntervalVector: endpoint dimensions differ");
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] <= upper_[i])) {
      std::ostringstream msg;
      msg << "IntervalVector: lower > upper at coordinate " << i << " (" << lower_[i] << " > "
          << upper_[i] << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

IntervalVector IntervalVector::point(const Eigen::VectorXd& x) { return {x, x}; }

IntervalVector IntervalVector::centered(const Eigen::VectorXd& half_width) {
  return {-half_width, half_width};
}

IntervalVector IntervalVector::unbounded(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(dim, -inf), Eigen::VectorXd::Constant(dim, inf)};
}

bool IntervalVector::finite() const {
  return lower_.allFinite() && upper_.allFinite();
}

bool IntervalVector::contains(const Eigen::VectorXd& z) const {
  if (z.size() != lower_.size()) {
    throw std::invalid_argument("IntervalVector::contains: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < lower_[i] || z[i] > upper_[i]) return false;
  }
  return true;
}

bool IntervalVector::contains_box(const IntervalVector& other) const {
  if (other.dim() != dim()) {
    throw std::invalid_argument("IntervalVector::contains_box: dimension mismatch");
  }
  for (int i = 0; i < dim(); ++i) {
    if (other.lower_[i] < lower_[i] || other.upper_[i] > upper_[i]) return false;
  }
  return true;
}

IntervalVector IntervalVector::inflated(double eps) const {
  return {lower_.array() - eps, upper_.array() + eps};
}

std::vector<Eigen::VectorXd> corners(const IntervalVector& iv, int dim_cap) {
  if (!iv.finite()) {
    throw std::invalid_argument("corners: box has an infinite endpoint");
  }
  const int n = iv.dim();
  if (n > dim_cap) {
    std::ostringstream msg;
    msg << "corners: dimension " << n << " exceeds the enumeration cap " << dim_cap;
    throw std::invalid_argument(msg.str());
  }
  const std::size_t count = std::size_t{1} << n;
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) {
      z[i] = (mask >> i) & 1 ? iv.upper()[i] : iv.lower()[i];
    }
    out.push_back(std::move(z));
  }
  return out;
}

EmbeddingState::EmbeddingState(Eigen::VectorXd u, Eigen::VectorXd o)
    : under(std::move(u)), over(std::move(o)) {
  if (under.size() != over.size()) {
    throw std::invalid_argument("EmbeddingState: half dimensions differ");
  }
}

EmbeddingState EmbeddingState::from_stacked(const Eigen::VectorXd& a) {
  if (a.size() % 2 != 0) {
    throw std::invalid_argument("EmbeddingState::from_stacked: odd length");
  }
  const Eigen::Index n = a.size() / 2;
  return {a.head(n), a.tail(n)};
}

Eigen::VectorXd EmbeddingState::stacked() const {
  Eigen::VectorXd a(2 * under.size());
  a << under, over;
  return a;
}

bool ordered(const EmbeddingState& a) { return first_order_violation(a) < 0; }

int first_order_violation(const EmbeddingState& a) {
  for (Eigen::Index i = 0; i < a.under.size(); ++i) {
    if (!(a.under[i] <= a.over[i])) return static_cast<int>(i);
  }
  return -1;
}

OrderViolation::OrderViolation(int coordinate, double under, double over)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "order violation at coordinate " << coordinate << ": under " << under << " > over "
            << over;
        return msg.str();
      }()),
      coordinate_(coordinate) {}

IntervalVector rect_of(const EmbeddingState& a) {
  const int bad = first_order_violation(a);
  if (bad >= 0) {
    throw OrderViolation(bad, a.under[bad], a.over[bad]);
  }
  return {a.under, a.over};
}

}  // namespace rta
