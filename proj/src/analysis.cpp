#include "tads/analysis.hpp"

#include <charconv>

#include "tads/error.hpp"

namespace tads {

namespace {

void require_same_type(const Tads& t1, const Tads& t2, const char* what) {
  if (t1.in_dim() != t2.in_dim() || t1.out_dim() != t2.out_dim()) {
    throw DimensionError(std::string(what) + ": type (" + std::to_string(t1.in_dim()) + "," +
                         std::to_string(t1.out_dim()) + ") vs (" + std::to_string(t2.in_dim()) +
                         "," + std::to_string(t2.out_dim()) + ")");
  }
}

void require_scalar(const Tads& t, const char* what) {
  if (t.out_dim() != 1) throw DimensionError(dims_message(what, 1, t.out_dim()));
}

}  // namespace

EquivalenceReport check_equivalence(const Tads& t1, const Tads& t2, double atol,
                                    const Domain& domain) {
  require_same_type(t1, t2, "equivalence");
  EquivalenceReport rep;
  rep.atol = atol;
  rep.diff = semantic_reduce(sub(t1, t2), atol);

  RegionOptions ro;
  ro.domain = domain;
  std::vector<Region> nonzero;
  for (auto& r : enumerate_regions(rep.diff, ro)) {
    if (!r.fn.is_zero(atol)) nonzero.push_back(std::move(r));
  }
  const auto samples = kernels::region_samples(nonzero);
  for (std::size_t k = 0; k < nonzero.size(); ++k) {
    // enumerate_regions only returns feasible regions, so a sample exists.
    rep.witnesses.push_back({std::move(nonzero[k].pc), std::move(nonzero[k].fn),
                             samples[k].value_or(Vector::Zero(static_cast<Eigen::Index>(t1.in_dim())))});
  }
  rep.equivalent = rep.witnesses.empty();
  return rep;
}

SimilarityReport check_epsilon_similarity(const Tads& t1, const Tads& t2, double epsilon,
                                          const Domain& domain) {
  require_same_type(t1, t2, "epsilon similarity");
  require_scalar(t1, "epsilon similarity output");
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");

  const Tads eps = constant_tads(t1.in_dim(), epsilon);
  // Exact merges only (atol 0): leaf arithmetic here must stay pointwise exact.
  const Tads d12 = semantic_reduce(sub(t1, t2), 0.0);
  const Tads d21 = semantic_reduce(sub(t2, t1), 0.0);
  const Tads over12 = semantic_reduce(relu(semantic_reduce(sub(d12, eps), 0.0)), 0.0);
  const Tads over21 = semantic_reduce(relu(semantic_reduce(sub(d21, eps), 0.0)), 0.0);

  SimilarityReport rep;
  rep.epsilon = epsilon;
  rep.sim = semantic_reduce(add(over12, over21), 0.0);

  RegionOptions ro;
  ro.only_full_dim = true;
  ro.domain = domain;
  std::vector<Region> bad;
  for (auto& r : enumerate_regions(rep.sim, ro)) {
    if (!r.fn.is_zero(kDefaultAtol)) bad.push_back(std::move(r));
  }
  const auto samples = kernels::region_samples(bad);
  for (std::size_t k = 0; k < bad.size(); ++k) {
    Vector x = samples[k].value_or(Vector::Zero(static_cast<Eigen::Index>(t1.in_dim())));
    const double excess = bad[k].fn(x)(0);
    rep.violations.push_back({std::move(bad[k].pc), std::move(x), excess, std::move(bad[k].fn)});
  }
  rep.similar = rep.violations.empty();
  return rep;
}

Tads indicator_tads(double theta) {
  TadsBuilder b(1, 1);
  const NodeId one = b.leaf(AffineFunction::constant(1, 1.0));
  const NodeId zero = b.leaf(AffineFunction::constant(1, 0.0));
  Vector w(1);
  w << 1.0;
  const NodeId root = b.inner(ge(std::move(w), -theta), one, zero);
  return std::move(b).finish(root);
}

Tads make_threshold_classifier(const Tads& t, double theta) {
  require_scalar(t, "threshold classifier output");
  return semantic_reduce(compose(t, indicator_tads(theta)), 0.0);
}

std::vector<PathCondition> class_characterization(const Tads& classifier, double class_value,
                                                  const Domain& domain, double atol) {
  RegionOptions ro;
  ro.domain = domain;
  std::vector<PathCondition> out;
  for (auto& r : enumerate_regions(classifier, ro)) {
    if (!r.fn.is_constant(atol)) {
      throw DomainError("class characterization: leaf " + std::to_string(r.leaf) +
                        " is not constant; input is not a classifier");
    }
    const Vector c = r.fn.b();
    if ((c.array() - class_value).abs().maxCoeff() <= atol) out.push_back(std::move(r.pc));
  }
  return out;
}

ClassifierComparison compare_classifiers(const Tads& c1, const Tads& c2) {
  require_same_type(c1, c2, "classifier comparison");
  return {semantic_reduce(equal_lift(c1, c2), 0.0), semantic_reduce(sub(c1, c2), 0.0)};
}

namespace {
void append_number(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v == 0.0 ? 0.0 : v);
  out.append(buf, res.ptr);
}
}  // namespace

std::string grid_csv(const Tads& t, const kernels::Grid2D& grid, bool parallel) {
  require_scalar(t, "grid output");
  const Matrix values = parallel ? kernels::grid_values(t, grid) : kernels::grid_values_serial(t, grid);
  const Matrix pts = grid.points();
  std::string out = "x0,x1,value\n";
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    append_number(out, pts(0, c));
    out += ',';
    append_number(out, pts(1, c));
    out += ',';
    append_number(out, values(0, c));
    out += '\n';
  }
  return out;
}

}  // namespace tads
