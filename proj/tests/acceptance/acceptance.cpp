// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.  Tolerances and time limits are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "feasibility_oracle.hpp"
#include "support.hpp"
#include "tads/analysis.hpp"

using namespace tads;
using tads::testing::Rng;

namespace {

constexpr double kPointTol = 1e-9;
constexpr double kPreservationSeconds = 5.0;
constexpr double kBaselineSeconds = 1.0;
constexpr std::size_t kPreservationPoints = 10000;
constexpr std::size_t kRoutePoints = 1000;
constexpr std::size_t kLawPoints = 1000;
constexpr std::size_t kLawStructures = 20;
constexpr double kOffset = 0.1;
constexpr double kEpsilon = 0.3;
constexpr double kCenterLo = 0.2, kCenterHi = 0.8;
constexpr std::size_t kClassifierGrid = 101;
constexpr int kOracleInstances = 500;
constexpr int kOracleMaxRows = 6;
constexpr int kOracleCoef = 3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_diff(const Matrix& a, const Matrix& b) { return kernels::max_abs_difference(a, b); }

double max_diff(const Tads& a, const Tads& b, const Matrix& pts) {
  return max_diff(kernels::evaluate_batch(a, pts), kernels::evaluate_batch(b, pts));
}

std::vector<Network> fixtures() {
  return {tads::testing::xor_baseline(), tads::testing::trained_a(), tads::testing::trained_b()};
}

Tads random_2to2(Rng& rng) {
  if (rng.coin()) return tads::testing::random_tree(rng, 2, 2, 3);
  return net_to_tads(tads::testing::random_network(rng, 2, {2}, 2));
}

std::mutex size_mu;
std::size_t zips_seen = 0, zips_over = 0, worst_lhs = 0, worst_rhs = 0, worst_out = 0;

}  // namespace

int main() {
  set_size_observer([](const SizeRecord& r) {
    if (r.op != "zip") return;
    std::lock_guard lock(size_mu);
    ++zips_seen;
    if (r.result_nodes > r.lhs_nodes * r.rhs_nodes) {
      ++zips_over;
      worst_lhs = r.lhs_nodes;
      worst_rhs = r.rhs_nodes;
      worst_out = r.result_nodes;
    }
  });

  report(1, "pointwise semantic preservation", [] {
    feasibility::clear_cache();
    const auto t0 = Clock::now();
    const Matrix pts = kernels::sample_uniform(2, kPreservationPoints, 0.0, 1.0, 1001);
    double worst = 0.0;
    for (const auto& net : fixtures()) {
      const Tads t = net_to_tads(net);
      worst = std::max(worst, max_diff(kernels::evaluate_batch(t, pts), kernels::evaluate_batch(net, pts)));
    }
    const double secs = seconds_since(t0);
    return Outcome{worst <= kPointTol && secs < kPreservationSeconds,
                   fmt("max |tads - net| = %.3g (tol %.0e) over 3 x %zu points, %.2f s (limit %.0f s)", worst,
                       kPointTol, kPreservationPoints, secs, kPreservationSeconds)};
  });

  report(2, "xor baseline structure", [] {
    feasibility::clear_cache();
    const auto t0 = Clock::now();
    const Tads t = net_to_tads(tads::testing::xor_baseline());
    const auto regions = enumerate_regions(t);
    RegionOptions full;
    full.only_full_dim = true;
    const auto open = enumerate_regions(t, full);
    const double secs = seconds_since(t0);
    const AffineFunction x_minus_y(tads::testing::mat({{1, -1}}), tads::testing::vec({0}));
    const AffineFunction y_minus_x(tads::testing::mat({{-1, 1}}), tads::testing::vec({0}));
    bool fns = open.size() == 2;
    bool has_xy = false, has_yx = false;
    for (const auto& r : open) {
      has_xy |= r.fn == x_minus_y;
      has_yx |= r.fn == y_minus_x;
    }
    fns = fns && has_xy && has_yx;
    bool diagonal_zero = false;
    for (const auto& r : regions) {
      if (!is_full_dimensional(r.pc) && r.fn.is_zero() && r.pc.holds(tads::testing::vec({0.3, 0.3}))) {
        diagonal_zero = true;
      }
    }
    const bool ok = path_count(t) == 3 && regions.size() == 3 && fns && diagonal_zero && secs < kBaselineSeconds;
    return Outcome{ok, fmt("%zu paths, %zu feasible regions, %zu full-dimensional (x-y: %s, y-x: %s), "
                           "zero leaf on x=y: %s, %.3f s (limit %.0f s)",
                           path_count(t), regions.size(), open.size(), has_xy ? "yes" : "no",
                           has_yx ? "yes" : "no", diagonal_zero ? "yes" : "no", secs, kBaselineSeconds)};
  });

  report(3, "construction-route agreement", [] {
    const Matrix pts = kernels::sample_uniform(2, kRoutePoints, 0.0, 1.0, 1003);
    double worst = 0.0;
    for (const auto& net : fixtures()) worst = std::max(worst, max_diff(net_to_tads(net), layerwise_tads(net), pts));
    return Outcome{worst <= kPointTol, fmt("max |symbolic - layerwise| = %.3g (tol %.0e) over 3 x %zu points",
                                           worst, kPointTol, kRoutePoints)};
  });

  report(4, "algebra laws", [] {
    Rng rng(1004);
    const Matrix pts = kernels::sample_uniform(2, kLawPoints, -2.0, 2.0, 1005);
    double lifted = 0.0, comp = 0.0, monoid = 0.0, space = 0.0;
    for (std::size_t k = 0; k < kLawStructures; ++k) {
      const Tads f = tads::testing::random_tads_2d(rng), g = tads::testing::random_tads_2d(rng),
                 h = tads::testing::random_tads_2d(rng);
      const double s = rng.uniform(-2, 2), r = rng.uniform(-2, 2);
      const Matrix vf = kernels::evaluate_batch(f, pts), vg = kernels::evaluate_batch(g, pts);
      lifted = std::max({lifted, max_diff(kernels::evaluate_batch(add(f, g), pts), vf + vg),
                         max_diff(kernels::evaluate_batch(sub(f, g), pts), vf - vg),
                         max_diff(kernels::evaluate_batch(scale(s, f), pts), s * vf)});

      const Tads a = random_2to2(rng), b = random_2to2(rng);
      const Tads ab_f = compose(a, f);
      Matrix expect(1, pts.cols());
      for (Eigen::Index c = 0; c < pts.cols(); ++c) expect.col(c) = evaluate(f, evaluate(a, pts.col(c)));
      comp = std::max(comp, max_diff(kernels::evaluate_batch(ab_f, pts), expect));

      monoid = std::max({monoid, max_diff(compose(compose(a, b), f), compose(a, compose(b, f)), pts),
                         max_diff(compose(identity_tads(2), a), a, pts),
                         max_diff(compose(a, identity_tads(2)), a, pts)});

      space = std::max({space, max_diff(add(f, g), add(g, f), pts),
                        max_diff(add(add(f, g), h), add(f, add(g, h)), pts),
                        max_diff(add(f, constant_tads(2, 0.0)), f, pts),
                        max_diff(add(f, scale(-1, f)), constant_tads(2, 0.0), pts),
                        max_diff(scale(s, add(f, g)), add(scale(s, f), scale(s, g)), pts),
                        max_diff(scale(s + r, f), add(scale(s, f), scale(r, f)), pts),
                        max_diff(scale(s, scale(r, f)), scale(s * r, f), pts),
                        max_diff(scale(1.0, f), f, pts)});
    }
    const bool ok = lifted <= kPointTol && comp <= kPointTol && monoid <= kPointTol && space <= kPointTol;
    return Outcome{ok, fmt("max errors: lifted %.3g, compose %.3g, monoid %.3g, vector space %.3g "
                           "(tol %.0e; %zu structure sets x %zu points)",
                           lifted, comp, monoid, space, kPointTol, kLawStructures, kLawPoints)};
  });

  report(5, "self-difference collapse", [] {
    std::string sizes;
    bool ok = true;
    for (const auto& net : fixtures()) {
      const Tads t = net_to_tads(net);
      const Tads z = reduce(sub(t, t));
      const bool single = z.size() == 1 && z.leaf(z.root()).fn.is_zero();
      ok &= single;
      sizes += fmt("%s%s %zu -> %zu node%s", sizes.empty() ? "" : ", ", net.name().c_str(), t.size(), z.size(),
                   z.size() == 1 ? "" : "s");
    }
    return Outcome{ok, sizes};
  });

  report(6, "equivalence diagnostics", [] {
    const Tads t = net_to_tads(tads::testing::xor_baseline());
    const Tads shifted = add(t, constant_tads(2, kOffset));
    const auto rep = check_equivalence(t, shifted);
    double worst = 0.0;
    for (const auto& w : rep.witnesses) {
      const double d = evaluate(t, w.sample)(0) - evaluate(shifted, w.sample)(0);
      worst = std::max(worst, std::abs(std::abs(d) - kOffset));
    }
    const bool ok = !rep.equivalent && !rep.witnesses.empty() && worst <= kPointTol;
    return Outcome{ok, fmt("%s, %zu witnesses, max ||difference| - %.1f| = %.3g (tol %.0e)",
                           rep.equivalent ? "equivalent" : "not equivalent", rep.witnesses.size(), kOffset, worst,
                           kPointTol)};
  });

  report(7, "epsilon-similarity identity", [] {
    const Tads a = net_to_tads(tads::testing::trained_a());
    const Tads b = net_to_tads(tads::testing::trained_b());
    const auto rep = check_epsilon_similarity(a, b, kEpsilon, box(2, 0, 1));
    const Matrix pts = kernels::sample_uniform(2, kPreservationPoints, 0.0, 1.0, 1007);
    const Matrix va = kernels::evaluate_batch(a, pts), vb = kernels::evaluate_batch(b, pts);
    const Matrix vs = kernels::evaluate_batch(rep.sim, pts);
    double worst = 0.0;
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      worst = std::max(worst, std::abs(vs(0, c) - std::max(std::abs(va(0, c) - vb(0, c)) - kEpsilon, 0.0)));
    }
    std::size_t outside = 0;
    for (const auto& v : rep.violations) {
      const bool inside = v.sample(0) > kCenterLo && v.sample(0) < kCenterHi && v.sample(1) > kCenterLo &&
                          v.sample(1) < kCenterHi;
      outside += !inside;
    }
    const bool ok = worst <= kPointTol && outside == 0;
    return Outcome{ok, fmt("max identity error %.3g (tol %.0e) over %zu points; %zu violation regions in [0,1]^2 "
                           "at eps %.1f, %zu samples outside (%.1f,%.1f)^2",
                           worst, kPointTol, kPreservationPoints, rep.violations.size(), kEpsilon, outside, kCenterLo,
                           kCenterHi)};
  });

  report(8, "classifier reproduction", [] {
    const Tads c = make_threshold_classifier(net_to_tads(tads::testing::xor_baseline()), 0.5);
    const kernels::Grid2D grid{0, 1, 0, 1, kClassifierGrid};
    const Matrix pts = grid.points();
    const Matrix values = kernels::grid_values(c, grid);
    const auto ones = class_characterization(c, 1.0);
    const auto zeros = class_characterization(c, 0.0);
    std::size_t mismatches = 0, skipped = 0, multiply_covered = 0;
    for (std::size_t i = 0; i < grid.steps; ++i) {
      for (std::size_t j = 0; j < grid.steps; ++j) {
        const auto col = static_cast<Eigen::Index>(i * grid.steps + j);
        const Vector x = pts.col(col);
        std::size_t hits = 0;
        for (const auto& pc : ones) hits += pc.holds(x);
        for (const auto& pc : zeros) hits += pc.holds(x);
        multiply_covered += hits != 1;
        // Grid points on |x - y| = 0.5 are excluded.
        if (std::abs(static_cast<long>(i) - static_cast<long>(j)) * 2 == static_cast<long>(grid.steps - 1)) {
          ++skipped;
          continue;
        }
        const double expect = std::abs(x(0) - x(1)) >= 0.5 ? 1.0 : 0.0;
        mismatches += values(0, col) != expect;
      }
    }
    const bool ok = mismatches == 0 && multiply_covered == 0;
    return Outcome{ok, fmt("%zu mismatches vs |x-y| >= 0.5 on %zux%zu grid (%zu boundary points skipped); "
                           "class 1: %zu regions, class 0: %zu regions, %zu points not covered exactly once",
                           mismatches, grid.steps, grid.steps, skipped, ones.size(), zeros.size(),
                           multiply_covered)};
  });

  report(9, "feasibility engine vs oracle", [] {
    Rng rng(1009);
    int disagree = 0, feasible = 0;
    for (int k = 0; k < kOracleInstances; ++k) {
      const auto s = tads::testing::random_int_system(rng, 2, kOracleMaxRows, kOracleCoef);
      const bool expected = tads::testing::oracle_feasible(s.rational);
      feasible += expected;
      disagree += is_feasible(s.pc) != expected;
    }
    return Outcome{disagree == 0, fmt("%d disagreements on %d systems (%d feasible, %d infeasible)", disagree,
                                      kOracleInstances, feasible, kOracleInstances - feasible)};
  });

  report(10, "size bound", [] {
    std::lock_guard lock(size_mu);
    std::string detail = fmt("%zu zips observed, %zu above |lhs|*|rhs|", zips_seen, zips_over);
    if (zips_over) detail += fmt(" (e.g. %zu x %zu -> %zu)", worst_lhs, worst_rhs, worst_out);
    return Outcome{zips_over == 0 && zips_seen > 0, detail};
  });

  set_size_observer({});
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
