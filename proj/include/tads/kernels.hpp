#pragma once

// Data-parallel batch kernels.  Each OpenMP kernel has a serial reference
// with identical results, kept for testing and for the benchmark.
// Point sets are stored one point per column.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tads/network.hpp"
#include "tads/tads.hpp"

namespace tads::kernels {

// Uniform points in [lo, hi]^dim, deterministic in `seed`.
Matrix sample_uniform(std::size_t dim, std::size_t count, double lo, double hi,
                      std::uint64_t seed);

Matrix evaluate_batch(const Tads& t, const Matrix& points);
Matrix evaluate_batch_serial(const Tads& t, const Matrix& points);

Matrix evaluate_batch(const Network& net, const Matrix& points);
Matrix evaluate_batch_serial(const Network& net, const Matrix& points);

// max_ij |a_ij - b_ij|.
double max_abs_difference(const Matrix& a, const Matrix& b);

// Uniform 2-D grid: steps points per axis, x0-major (row order i0, then i1).
struct Grid2D {
  double lo0 = 0.0, hi0 = 1.0;
  double lo1 = 0.0, hi1 = 1.0;
  std::size_t steps = 2;
  double coord0(std::size_t i) const;
  double coord1(std::size_t j) const;
  Matrix points() const;  // 2 x steps^2
};

Matrix grid_values(const Tads& t, const Grid2D& grid);
Matrix grid_values_serial(const Tads& t, const Grid2D& grid);

// A witness point per region (interior when possible); nullopt when the
// region has become empty.  Regions are independent, so this fans out.
std::vector<std::optional<Vector>> region_samples(const std::vector<Region>& regions);
std::vector<std::optional<Vector>> region_samples_serial(const std::vector<Region>& regions);

// Thread count for the parallel kernels (0 restores the OpenMP default).
void set_num_threads(int n);
int num_threads();

}  // namespace tads::kernels
