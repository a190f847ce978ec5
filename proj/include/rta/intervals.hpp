#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace rta {

// Hyperrectangle [lower, upper] in R^n, possibly with infinite extent.
// Immutable after construction; lower_i <= upper_i is enforced.
class IntervalVector {
public:
  IntervalVector() = default;
  IntervalVector(Eigen::VectorXd lower, Eigen::VectorXd upper);

  // Degenerate box [x, x].
  static IntervalVector point(const Eigen::VectorXd& x);
  // Symmetric box [-half_width, half_width].
  static IntervalVector centered(const Eigen::VectorXd& half_width);
  // Extended box (-inf, +inf)^dim, used for unbounded statespaces.
  static IntervalVector unbounded(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  Eigen::VectorXd width() const { return upper_ - lower_; }
  Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }

  bool finite() const;

  // Closed-box membership, exact comparison (callers add slack explicitly).
  bool contains(const Eigen::VectorXd& z) const;
  // Set inclusion: other subset of this.
  bool contains_box(const IntervalVector& other) const;

  IntervalVector inflated(double eps) const;

private:
  Eigen::VectorXd lower_, upper_;
};

// Hard cap on the dimension before 2^n corner enumeration.
inline constexpr int kCornerDimCap = 16;

// The 2^n vertex list of a finite box, in binary-counting order: bit i of the
// enumeration index selects upper_i. Duplicates from degenerate coordinates
// are retained, so the result always has exactly 2^n entries.
std::vector<Eigen::VectorXd> corners(const IntervalVector& iv, int dim_cap = kCornerDimCap);

// A point a = (under, over) in the 2n-dimensional embedding statespace.
// under_i <= over_i is NOT enforced; query it with ordered().
struct EmbeddingState {
  Eigen::VectorXd under, over;

  EmbeddingState() = default;
  EmbeddingState(Eigen::VectorXd u, Eigen::VectorXd o);

  static EmbeddingState diagonal(const Eigen::VectorXd& x) { return {x, x}; }
  static EmbeddingState from_box(const IntervalVector& iv) { return {iv.lower(), iv.upper()}; }
  // Splits a stacked 2n-vector (under; over).
  static EmbeddingState from_stacked(const Eigen::VectorXd& a);

  Eigen::VectorXd stacked() const;
  int dim() const { return static_cast<int>(under.size()); }
};

bool ordered(const EmbeddingState& a);
// Index of the first coordinate with under_i > over_i, or -1 if ordered.
int first_order_violation(const EmbeddingState& a);

// Thrown by rect_of when ordered(a) fails; carries the offending coordinate.
// Callers treat this as numerical blow-up of an embedding trajectory.
class OrderViolation : public std::runtime_error {
public:
  OrderViolation(int coordinate, double under, double over);
  int coordinate() const { return coordinate_; }

private:
  int coordinate_;
};

// The box [under, over] of an ordered embedding state.
IntervalVector rect_of(const EmbeddingState& a);

}  // namespace rta
