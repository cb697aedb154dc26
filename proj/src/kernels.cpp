#include "tads/kernels.hpp"

#include <algorithm>
#include <random>

#include <omp.h>

#include "tads/error.hpp"

namespace tads::kernels {

namespace {
int requested_threads = 0;

int threads() { return requested_threads > 0 ? requested_threads : omp_get_max_threads(); }

void check_rows(std::size_t expected, const Matrix& points, const char* what) {
  if (static_cast<std::size_t>(points.rows()) != expected) {
    throw DimensionError(dims_message(what, expected, points.rows()));
  }
}
}  // namespace

void set_num_threads(int n) { requested_threads = std::max(0, n); }
int num_threads() { return threads(); }

Matrix sample_uniform(std::size_t dim, std::size_t count, double lo, double hi,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix X(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) X(r, c) = u(rng);
  }
  return X;
}

Matrix evaluate_batch_serial(const Tads& t, const Matrix& points) {
  check_rows(t.in_dim(), points, "batch TADS eval");
  Matrix out(static_cast<Eigen::Index>(t.out_dim()), points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) out.col(c) = evaluate(t, points.col(c));
  return out;
}

Matrix evaluate_batch(const Tads& t, const Matrix& points) {
  check_rows(t.in_dim(), points, "batch TADS eval");
  Matrix out(static_cast<Eigen::Index>(t.out_dim()), points.cols());
  const Eigen::Index n = points.cols();
#pragma omp parallel for schedule(static) num_threads(threads())
  for (Eigen::Index c = 0; c < n; ++c) out.col(c) = evaluate(t, points.col(c));
  return out;
}

Matrix evaluate_batch_serial(const Network& net, const Matrix& points) {
  check_rows(net.input_dim(), points, "batch network eval");
  Matrix out(static_cast<Eigen::Index>(net.output_dim()), points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) out.col(c) = evaluate(net, points.col(c));
  return out;
}

Matrix evaluate_batch(const Network& net, const Matrix& points) {
  check_rows(net.input_dim(), points, "batch network eval");
  Matrix out(static_cast<Eigen::Index>(net.output_dim()), points.cols());
  const Eigen::Index n = points.cols();
#pragma omp parallel for schedule(static) num_threads(threads())
  for (Eigen::Index c = 0; c < n; ++c) out.col(c) = evaluate(net, points.col(c));
  return out;
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_difference: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double Grid2D::coord0(std::size_t i) const {
  return steps < 2 ? lo0 : lo0 + (hi0 - lo0) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

double Grid2D::coord1(std::size_t j) const {
  return steps < 2 ? lo1 : lo1 + (hi1 - lo1) * static_cast<double>(j) / static_cast<double>(steps - 1);
}

Matrix Grid2D::points() const {
  Matrix P(2, static_cast<Eigen::Index>(steps * steps));
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t j = 0; j < steps; ++j) {
      const auto c = static_cast<Eigen::Index>(i * steps + j);
      P(0, c) = coord0(i);
      P(1, c) = coord1(j);
    }
  }
  return P;
}

namespace {
void check_grid_tads(const Tads& t, const Grid2D& grid) {
  if (t.in_dim() != 2) throw DimensionError(dims_message("grid input", 2, t.in_dim()));
  if (grid.steps == 0) throw DomainError("grid needs at least one step");
}
}  // namespace

Matrix grid_values_serial(const Tads& t, const Grid2D& grid) {
  check_grid_tads(t, grid);
  return evaluate_batch_serial(t, grid.points());
}

Matrix grid_values(const Tads& t, const Grid2D& grid) {
  check_grid_tads(t, grid);
  return evaluate_batch(t, grid.points());
}

namespace {
std::optional<Vector> one_sample(const Region& r) {
  if (auto p = sample_point(r.pc, true)) return p;
  return sample_point(r.pc, false);
}
}  // namespace

std::vector<std::optional<Vector>> region_samples_serial(const std::vector<Region>& regions) {
  std::vector<std::optional<Vector>> out(regions.size());
  for (std::size_t k = 0; k < regions.size(); ++k) out[k] = one_sample(regions[k]);
  return out;
}

std::vector<std::optional<Vector>> region_samples(const std::vector<Region>& regions) {
  std::vector<std::optional<Vector>> out(regions.size());
  const auto n = static_cast<std::ptrdiff_t>(regions.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads())
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = one_sample(regions[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace tads::kernels
