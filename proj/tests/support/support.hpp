#pragma once

// Shared fixtures and random generators for the test suites.

#include <cstdint>
#include <random>
#include <string>

#include "tads/algebra.hpp"
#include "tads/network.hpp"
#include "tads/tads.hpp"

namespace tads::testing {

inline std::string data_path(const std::string& file) {
  return std::string(TADS_DATA_DIR) + "/" + file;
}

inline Network xor_baseline() { return load_network(data_path("n_star.json")); }
inline Network trained_a() { return load_network(data_path("xor_trained_a.json")); }
inline Network trained_b() { return load_network(data_path("xor_trained_b.json")); }

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix out(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

inline AffineFunction affine(std::initializer_list<std::initializer_list<double>> W,
                             std::initializer_list<double> b) {
  return {mat(W), vec(b)};
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  bool coin() { return integer(0, 1) == 1; }
  Matrix matrix(std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(-scale, scale);
    return m;
  }
  Vector vector(std::size_t n, double scale = 1.0) { return matrix(n, 1, scale).col(0); }
  AffineFunction affine(std::size_t in, std::size_t out, double scale = 1.0) {
    return {matrix(out, in, scale), vector(out, scale)};
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// Dense ReLU net: input -> widths... -> output, ReLU after every hidden layer.
inline Network random_network(Rng& rng, std::size_t input, std::vector<std::size_t> hidden,
                              std::size_t output) {
  std::vector<Step> steps;
  std::size_t dim = input;
  for (std::size_t w : hidden) {
    steps.emplace_back(rng.affine(dim, w));
    for (auto& s : full_relu(w)) steps.push_back(s);
    dim = w;
  }
  steps.emplace_back(rng.affine(dim, output));
  return {"random", input, std::move(steps)};
}

// Random decision tree over R^n with arbitrary (not necessarily continuous)
// leaves; a stress case for the algebra beyond network-shaped structures.
inline Tads random_tree(Rng& rng, std::size_t n, std::size_t m, int depth) {
  TadsBuilder b(n, m);
  std::function<NodeId(int)> grow = [&](int d) -> NodeId {
    if (d == 0 || rng.integer(0, 3) == 0) return b.leaf(rng.affine(n, m));
    const NodeId hi = grow(d - 1);
    const NodeId lo = grow(d - 1);
    return b.inner(ge(rng.vector(n), rng.uniform(-0.5, 0.5)), hi, lo);
  };
  const NodeId root = grow(depth);
  return std::move(b).finish(root);
}

// A random 2-D structure: either a small network's TADS or a random tree.
inline Tads random_tads_2d(Rng& rng, std::size_t m = 1) {
  if (rng.coin()) {
    return net_to_tads(random_network(rng, 2, {static_cast<std::size_t>(rng.integer(1, 3))}, m));
  }
  return random_tree(rng, 2, m, 3);
}

}  // namespace tads::testing
