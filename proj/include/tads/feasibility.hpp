#pragma once

// Exact satisfiability of conjunctions of strict and non-strict linear
// inequalities over R^n.  Doubles are converted to exact rationals before any
// decision is made, so answers carry no tolerance.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tads/affine.hpp"

namespace tads {

enum class Sense { GE, LT };  // w·x + b >= 0  |  w·x + b < 0

struct SignedHalfspace {
  Vector w;
  double b = 0.0;
  Sense sense = Sense::GE;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(w.size()); }
  double value(const Vector& x) const { return w.dot(x) + b; }
  bool holds(const Vector& x) const {
    const double v = value(x);
    return sense == Sense::GE ? v >= 0.0 : v < 0.0;
  }
  SignedHalfspace negated() const {
    return {w, b, sense == Sense::GE ? Sense::LT : Sense::GE};
  }
  // "a·x0 + b·x1 + c >= 0" (or "< 0").
  std::string to_string(int digits = 4) const;
};

inline SignedHalfspace ge(Vector w, double b) { return {std::move(w), b, Sense::GE}; }
inline SignedHalfspace lt(Vector w, double b) { return {std::move(w), b, Sense::LT}; }

// Ordered conjunction; empty means all of R^n.
class PathCondition {
 public:
  PathCondition() = default;
  explicit PathCondition(std::size_t dim) : dim_(dim) {}
  PathCondition(std::size_t dim, std::vector<SignedHalfspace> constraints);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<SignedHalfspace>& constraints() const noexcept { return constraints_; }
  std::size_t size() const noexcept { return constraints_.size(); }
  bool empty() const noexcept { return constraints_.empty(); }

  void push(SignedHalfspace h);
  void pop() { constraints_.pop_back(); }
  PathCondition with(SignedHalfspace h) const;
  PathCondition conjoin(const PathCondition& other) const;
  bool holds(const Vector& x) const;

 private:
  std::size_t dim_ = 0;
  std::vector<SignedHalfspace> constraints_;
};

// lo <= x_j <= hi for every coordinate.
PathCondition box(std::size_t dim, double lo, double hi);

bool is_feasible(const PathCondition& pc);
bool is_feasible(const PathCondition& pc, const SignedHalfspace& extra);
// pc ∧ ¬h infeasible.
bool implies(const PathCondition& pc, const SignedHalfspace& h);
// Nonempty interior: every constraint (non-strict ones included) strictly
// satisfiable at once.  Empty and infeasible conditions are handled too.
bool is_full_dimensional(const PathCondition& pc);

// A point satisfying every constraint, chosen to maximize the slack of the
// strict constraints (of all constraints when `interior` is set) in the L∞
// sense, capped at 1.  Returns nullopt when infeasible (or, with `interior`,
// when the interior is empty).
std::optional<Vector> sample_point(const PathCondition& pc, bool interior);

// Decision-procedure internals, exposed so the two engines can be checked
// against each other.
namespace feasibility {

enum class Engine { Auto, FourierMotzkin, Simplex };

// Dimension up to which Auto uses Fourier–Motzkin.
inline constexpr std::size_t kFourierMotzkinMaxDim = 4;

bool decide(const PathCondition& pc, Engine engine);

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t entries = 0;
};
CacheStats cache_stats();
void clear_cache();
void set_cache_enabled(bool enabled);

}  // namespace feasibility

}  // namespace tads
