#include "tads/affine.hpp"

#include <cmath>
#include <cstdio>

#include "tads/error.hpp"

namespace tads {

AffineFunction::AffineFunction(Matrix W, Vector b) : W_(std::move(W)), b_(std::move(b)) {
  if (b_.size() != W_.rows()) {
    throw DimensionError(dims_message("affine bias length", W_.rows(), b_.size()));
  }
  if (!W_.allFinite() || !b_.allFinite()) {
    throw DomainError("affine function has non-finite coefficients");
  }
}

AffineFunction AffineFunction::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return {Matrix::Identity(k, k), Vector::Zero(k)};
}

AffineFunction AffineFunction::zero(std::size_t in_dim, std::size_t out_dim) {
  const auto n = static_cast<Eigen::Index>(in_dim);
  const auto m = static_cast<Eigen::Index>(out_dim);
  return {Matrix::Zero(m, n), Vector::Zero(m)};
}

AffineFunction AffineFunction::constant(std::size_t in_dim, const Vector& c) {
  return {Matrix::Zero(c.size(), static_cast<Eigen::Index>(in_dim)), c};
}

AffineFunction AffineFunction::constant(std::size_t in_dim, double c) {
  return constant(in_dim, Vector::Constant(1, c));
}

AffineFunction AffineFunction::defect(std::size_t k, std::size_t index) {
  if (index >= k) {
    throw DimensionError("defect matrix index " + std::to_string(index) +
                         " out of range for dimension " + std::to_string(k));
  }
  AffineFunction f = identity(k);
  f.W_(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 0.0;
  return f;
}

Vector AffineFunction::operator()(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != in_dim()) {
    throw DimensionError(dims_message("affine eval", in_dim(), x.size()));
  }
  return W_ * x + b_;
}

Vector AffineFunction::operator()(std::span<const double> x) const {
  Eigen::Map<const Vector> v(x.data(), static_cast<Eigen::Index>(x.size()));
  return (*this)(Vector(v));
}

bool AffineFunction::is_constant(double atol) const {
  return W_.size() == 0 || W_.cwiseAbs().maxCoeff() <= atol;
}

bool AffineFunction::is_zero(double atol) const {
  return is_constant(atol) && (b_.size() == 0 || b_.cwiseAbs().maxCoeff() <= atol);
}

std::string format_scalar(double v, int digits) {
  if (v == 0.0) v = 0.0;  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

std::string format_linear(const Eigen::Ref<const Vector>& w, double bias, int digits) {
  std::string out;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    out += format_scalar(w(j), digits) + "·x" + std::to_string(j) + " + ";
  }
  out += format_scalar(bias, digits);
  return out;
}

std::string AffineFunction::to_string(int digits) const {
  std::string out;
  for (Eigen::Index i = 0; i < W_.rows(); ++i) {
    if (i > 0) out += '\n';
    out += format_linear(W_.row(i).transpose(), b_(i), digits);
  }
  return out;
}

AffineFunction compose(const AffineFunction& outer, const AffineFunction& inner) {
  if (inner.out_dim() != outer.in_dim()) {
    throw DimensionError(
        "affine composition Phi(r,m) x Phi(n,r) -> Phi(n,m): outer has r=" +
        std::to_string(outer.in_dim()) + ", inner has r=" +
        std::to_string(inner.out_dim()));
  }
  return {outer.W() * inner.W(), outer.W() * inner.b() + outer.b()};
}

namespace {
void require_same_type(const AffineFunction& f, const AffineFunction& g, const char* op) {
  if (f.in_dim() != g.in_dim() || f.out_dim() != g.out_dim()) {
    throw DimensionError(std::string(op) + ": type (" + std::to_string(f.in_dim()) +
                         "," + std::to_string(f.out_dim()) + ") vs (" +
                         std::to_string(g.in_dim()) + "," + std::to_string(g.out_dim()) +
                         ")");
  }
}
}  // namespace

AffineFunction operator+(const AffineFunction& f, const AffineFunction& g) {
  require_same_type(f, g, "affine add");
  return {f.W() + g.W(), f.b() + g.b()};
}

AffineFunction operator-(const AffineFunction& f, const AffineFunction& g) {
  require_same_type(f, g, "affine sub");
  return {f.W() - g.W(), f.b() - g.b()};
}

AffineFunction operator-(const AffineFunction& f) { return -1.0 * f; }

AffineFunction operator*(double s, const AffineFunction& f) {
  return {s * f.W(), s * f.b()};
}

bool approx_equal(const AffineFunction& f, const AffineFunction& g, double atol) {
  require_same_type(f, g, "affine equality");
  const double dw = f.W().size() ? (f.W() - g.W()).cwiseAbs().maxCoeff() : 0.0;
  const double db = f.b().size() ? (f.b() - g.b()).cwiseAbs().maxCoeff() : 0.0;
  return dw <= atol && db <= atol;
}

bool operator==(const AffineFunction& f, const AffineFunction& g) {
  return f.in_dim() == g.in_dim() && f.out_dim() == g.out_dim() && f.W() == g.W() &&
         f.b() == g.b();
}

AffineFunction project(const AffineFunction& f, std::size_t row) {
  if (row >= f.out_dim()) {
    throw DimensionError("projection row " + std::to_string(row) +
                         " out of range for output dimension " +
                         std::to_string(f.out_dim()));
  }
  const auto r = static_cast<Eigen::Index>(row);
  return {f.W().row(r), f.b().segment(r, 1)};
}

}  // namespace tads
