#pragma once

// Affine functions R^n -> R^m held in canonical (W, b) form.

#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace tads {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultAtol = 1e-9;

class AffineFunction {
 public:
  AffineFunction() = default;
  // Throws DimensionError unless b.size() == W.rows() and every entry is finite.
  AffineFunction(Matrix W, Vector b);

  static AffineFunction identity(std::size_t n);
  static AffineFunction zero(std::size_t in_dim, std::size_t out_dim);
  // x |-> c for every x in R^in_dim.
  static AffineFunction constant(std::size_t in_dim, const Vector& c);
  static AffineFunction constant(std::size_t in_dim, double c);
  // Identity on R^k with entry (index, index) zeroed; index is 0-based.
  static AffineFunction defect(std::size_t k, std::size_t index);

  const Matrix& W() const noexcept { return W_; }
  const Vector& b() const noexcept { return b_; }
  std::size_t in_dim() const noexcept { return static_cast<std::size_t>(W_.cols()); }
  std::size_t out_dim() const noexcept { return static_cast<std::size_t>(W_.rows()); }

  Vector operator()(const Vector& x) const;
  Vector operator()(std::span<const double> x) const;

  // Constant functions: W is exactly zero.
  bool is_constant(double atol = 0.0) const;
  bool is_zero(double atol = 0.0) const;

  // "a*x0 + b*x1 + c" per output row, joined by '\n'; significant digits as given.
  std::string to_string(int digits = 4) const;

 private:
  Matrix W_;
  Vector b_;
};

// outer o inner, i.e. x |-> outer(inner(x)).  Phi(r,m) x Phi(n,r) -> Phi(n,m).
AffineFunction compose(const AffineFunction& outer, const AffineFunction& inner);

AffineFunction operator+(const AffineFunction& f, const AffineFunction& g);
AffineFunction operator-(const AffineFunction& f, const AffineFunction& g);
AffineFunction operator-(const AffineFunction& f);
AffineFunction operator*(double s, const AffineFunction& f);

// Max-abs entry difference of W and of b is <= atol.  Throws on type mismatch.
bool approx_equal(const AffineFunction& f, const AffineFunction& g,
                  double atol = kDefaultAtol);

// Exact entrywise equality (same type required, otherwise false).
bool operator==(const AffineFunction& f, const AffineFunction& g);

// %.{digits}g rendering, with "-0" folded to "0".
std::string format_scalar(double v, int digits = 4);

// "a·x0 + b·x1 + c" for one row of weights and a bias.
std::string format_linear(const Eigen::Ref<const Vector>& w, double bias,
                          int digits = 4);

// Row `row` of f as a function R^n -> R.
AffineFunction project(const AffineFunction& f, std::size_t row);

}  // namespace tads
