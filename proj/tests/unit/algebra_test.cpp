#include "doctest.h"

#include "support.hpp"
#include "tads/algebra.hpp"
#include "tads/error.hpp"
#include "tads/kernels.hpp"

using namespace tads;
using tads::testing::affine;
using tads::testing::mat;
using tads::testing::Rng;
using tads::testing::vec;

namespace {
double max_diff(const Tads& a, const Tads& b, const Matrix& pts) {
  return kernels::max_abs_difference(kernels::evaluate_batch_serial(a, pts),
                                     kernels::evaluate_batch_serial(b, pts));
}

Tads scaled_relu(double s, std::size_t index) { return scale(s, atomic_tads(PartialRelu{2, index})); }

Vector partial_relu(Vector x, std::size_t i) {
  const auto ii = static_cast<Eigen::Index>(i);
  x(ii) = std::max(0.0, x(ii));
  return x;
}

const Matrix& points_1000() {
  static const Matrix pts = kernels::sample_uniform(2, 1000, -2.0, 2.0, 61);
  return pts;
}

// Random 2-D structure whose output dimension is 2 (feeds compose chains).
Tads random_tads_2to2(Rng& rng) {
  if (rng.coin()) return tads::testing::random_tree(rng, 2, 2, 3);
  return net_to_tads(tads::testing::random_network(rng, 2, {2}, 2));
}
}  // namespace

TEST_CASE("atomic structures") {
  const Tads r = atomic_tads(PartialRelu{2, 0});
  REQUIRE(r.size() == 3);
  const auto& in = r.inner(r.root());
  CHECK(in.pred.w == vec({1, 0}));
  CHECK(in.pred.b == 0.0);
  CHECK(r.leaf(in.hi).fn == AffineFunction::identity(2));
  CHECK(r.leaf(in.lo).fn.W() == mat({{0, 0}, {0, 1}}));

  const auto a1 = affine({{1, -1}, {-1, 1}}, {0, 0});
  const Tads leaf = atomic_tads(a1);
  REQUIRE(leaf.size() == 1);
  CHECK(leaf.leaf(leaf.root()).fn == a1);
  CHECK_THROWS_AS(atomic_tads(PartialRelu{2, 2}), DimensionError);
}

TEST_CASE("sum of two scaled partial ReLUs") {
  const Tads t = add(scaled_relu(2, 0), scaled_relu(3, 1));
  CHECK(path_count(t) == 4);
  const auto regions = enumerate_regions(t);
  REQUIRE(regions.size() == 4);
  // Leaf matrices derived entrywise: 2·(I or I_0) + 3·(I or I_1).
  struct Expect {
    Vector probe;
    Matrix W;
  };
  const std::vector<Expect> table{{vec({1, 1}), mat({{5, 0}, {0, 5}})},
                                  {vec({1, -1}), mat({{5, 0}, {0, 2}})},
                                  {vec({-1, 1}), mat({{3, 0}, {0, 5}})},
                                  {vec({-1, -1}), mat({{3, 0}, {0, 2}})}};
  for (const auto& e : table) {
    const auto& fn = t.leaf(leaf_for(t, e.probe)).fn;
    CHECK(fn.W() == e.W);
    CHECK(fn.b().isZero());
  }
  const Matrix& pts = points_1000();
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    const Vector x = pts.col(c);
    CHECK((evaluate(t, x) - (2 * partial_relu(x, 0) + 3 * partial_relu(x, 1))).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("identities of the lifted operators") {
  Rng rng(62);
  const Matrix& pts = points_1000();
  for (int k = 0; k < 20; ++k) {
    const Tads t = tads::testing::random_tads_2d(rng);
    CHECK(max_diff(add(t, constant_tads(2, 0.0)), t, pts) == 0.0);
    const Tads d = sub(t, t);
    for (const auto& r : enumerate_regions(d)) CHECK(r.fn.is_zero());
  }
  CHECK_THROWS_AS(add(constant_tads(2, 1), constant_tads(3, 1)), DimensionError);
}

TEST_CASE("composition of two scaled partial ReLUs") {
  const Tads t1 = scaled_relu(2, 0);
  const Tads t2 = scaled_relu(3, 1);
  const Tads c = compose(t1, t2);
  // The second test is pulled back through 2·I and 2·I_0: 2·x1 >= 0 rather
  // than the lifted x1 >= 0.
  const auto& root = c.inner(c.root());
  CHECK(root.pred.w == vec({1, 0}));
  for (NodeId child : {root.hi, root.lo}) {
    REQUIRE_FALSE(c.is_leaf(child));
    CHECK(c.inner(child).pred.w == vec({0, 2}));
  }
  const Tads lifted = add(t1, t2);
  CHECK(lifted.inner(lifted.inner(lifted.root()).hi).pred.w == vec({0, 1}));

  const Matrix& pts = points_1000();
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    const Vector x = pts.col(k);
    const Vector expect = 3 * partial_relu(2 * partial_relu(x, 0), 1);
    CHECK((evaluate(c, x) - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(compose(constant_tads(2, 1), t1), DimensionError);
}

TEST_CASE("identity is neutral and the atomic fold rebuilds the network") {
  Rng rng(63);
  const Matrix& pts = points_1000();
  for (int k = 0; k < 10; ++k) {
    const Tads t = random_tads_2to2(rng);
    CHECK(max_diff(compose(identity_tads(2), t), t, pts) <= 1e-12);
    CHECK(max_diff(compose(t, identity_tads(2)), t, pts) <= 1e-12);
  }
  const Network net = tads::testing::xor_baseline();
  Tads fold = identity_tads(2);
  for (const auto& s : net.steps()) fold = compose(fold, atomic_tads(s));
  CHECK(max_diff(fold, net_to_tads(net), pts) <= 1e-9);
}

TEST_CASE("leaf maps") {
  const Tads t = net_to_tads(tads::testing::trained_a());
  const Matrix& pts = points_1000();
  CHECK(max_diff(map_leaves(t, [](const AffineFunction& f) { return -f; }, 1), scale(-1, t), pts) == 0.0);
  const Tads zero = map_leaves(t, [](const AffineFunction& f) { return AffineFunction::zero(f.in_dim(), 1); }, 1);
  CHECK(max_diff(zero, constant_tads(2, 0), pts) == 0.0);

  Rng rng(64);
  const Tads two = tads::testing::random_tree(rng, 2, 2, 3);
  const Tads second = map_leaves(two, [](const AffineFunction& f) { return project(f, 1); }, 1);
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    CHECK(evaluate(second, pts.col(c))(0) == evaluate(two, pts.col(c))(1));
  }
}

TEST_CASE("equality lift encodes agreement as constants") {
  const Tads a = net_to_tads(tads::testing::xor_baseline());
  const Tads same = equal_lift(a, a);
  for (const auto& r : enumerate_regions(same)) CHECK(r.fn == AffineFunction::constant(2, 1.0));
  const Tads other = equal_lift(a, add(a, constant_tads(2, 1.0)));
  for (const auto& r : enumerate_regions(other)) CHECK(r.fn == AffineFunction::constant(2, 0.0));
  CHECK(same.out_dim() == 1);
}

TEST_CASE("property: lifted operators are pointwise") {
  Rng rng(65);
  const Matrix& pts = points_1000();
  for (int k = 0; k < 40; ++k) {
    const Tads t1 = tads::testing::random_tads_2d(rng);
    const Tads t2 = tads::testing::random_tads_2d(rng);
    const double s = rng.uniform(-3, 3);
    const Tads sum = add(t1, t2), diff = sub(t1, t2), scaled = scale(s, t1);
    const Tads raw_sum = add(t1, t2, {.prune_infeasible = false});
    CHECK(raw_sum.size() <= t1.size() * t2.size());
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      const Vector x = pts.col(c);
      const Vector a = evaluate(t1, x), b = evaluate(t2, x);
      CHECK((evaluate(sum, x) - (a + b)).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((evaluate(raw_sum, x) - (a + b)).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((evaluate(diff, x) - (a - b)).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((evaluate(scaled, x) - s * a).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("property: composition is function composition") {
  Rng rng(66);
  const Matrix& pts = points_1000();
  for (int k = 0; k < 40; ++k) {
    const Tads t1 = random_tads_2to2(rng);
    const Tads t2 = tads::testing::random_tads_2d(rng);
    const Tads c = compose(t1, t2);
    const Tads raw = compose(t1, t2, {.prune_infeasible = false});
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      const Vector x = pts.col(j);
      const Vector expect = evaluate(t2, evaluate(t1, x));
      CHECK((evaluate(c, x) - expect).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((evaluate(raw, x) - expect).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("property: monoid and vector-space laws") {
  Rng rng(67);
  const Matrix& pts = points_1000();
  for (int k = 0; k < 25; ++k) {
    const Tads a = random_tads_2to2(rng), b = random_tads_2to2(rng);
    const Tads c = tads::testing::random_tads_2d(rng);
    CHECK(max_diff(compose(compose(a, b), c), compose(a, compose(b, c)), pts) <= 1e-9);

    const Tads f = tads::testing::random_tads_2d(rng), g = tads::testing::random_tads_2d(rng),
               h = tads::testing::random_tads_2d(rng);
    const double s = rng.uniform(-2, 2), t = rng.uniform(-2, 2);
    CHECK(max_diff(add(f, g), add(g, f), pts) <= 1e-9);
    CHECK(max_diff(add(add(f, g), h), add(f, add(g, h)), pts) <= 1e-9);
    CHECK(max_diff(scale(s, add(f, g)), add(scale(s, f), scale(s, g)), pts) <= 1e-9);
    CHECK(max_diff(scale(s + t, f), add(scale(s, f), scale(t, f)), pts) <= 1e-9);
    CHECK(max_diff(scale(s, scale(t, f)), scale(s * t, f), pts) <= 1e-9);
    CHECK(max_diff(scale(1, f), f, pts) == 0.0);
    CHECK(max_diff(add(f, scale(-1, f)), constant_tads(2, 0), pts) <= 1e-9);
  }
}

TEST_CASE("property: construction is a monoid homomorphism") {
  Rng rng(68);
  const Matrix pts = kernels::sample_uniform(2, 1000, -1.5, 1.5, 69);
  for (int k = 0; k < 25; ++k) {
    const auto mid = static_cast<std::size_t>(rng.integer(1, 3));
    const Network A = tads::testing::random_network(rng, 2, {static_cast<std::size_t>(rng.integer(1, 3))}, mid);
    const Network B = tads::testing::random_network(rng, mid, {static_cast<std::size_t>(rng.integer(1, 3))}, 1);
    const Tads whole = net_to_tads(concat(A, B));
    const Tads parts = compose(net_to_tads(A), net_to_tads(B));
    CHECK(max_diff(whole, parts, pts) <= 1e-9);
    CHECK(max_diff(whole, layerwise_tads(concat(A, B)), pts) <= 1e-9);
  }
}

TEST_CASE("property: unpruned zip respects the product bound exactly") {
  Rng rng(70);
  for (int k = 0; k < 60; ++k) {
    const Tads t1 = tads::testing::random_tads_2d(rng);
    const Tads t2 = tads::testing::random_tads_2d(rng);
    CHECK(sub(t1, t2, {.prune_infeasible = false}).size() <= t1.size() * t2.size());
    CHECK(sub(t1, t2).size() <= t1.size() * t2.size());
  }
}
