#pragma once

// Verification and explanation procedures built on the TADS algebra.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tads/algebra.hpp"
#include "tads/kernels.hpp"

namespace tads {

// Restricts region scans (witnesses, violations, characterizations) to a
// subset of the input space, e.g. box(2, 0, 1).  nullopt means all of R^n.
using Domain = std::optional<PathCondition>;

struct EquivalenceWitness {
  PathCondition region;
  AffineFunction difference;  // t1 - t2 on the region
  Vector sample;
};

struct EquivalenceReport {
  bool equivalent = true;
  double atol = kDefaultAtol;
  std::vector<EquivalenceWitness> witnesses;
  Tads diff;  // reduced t1 ⊖ t2
};

// Decided on t1 ⊖ t2: equivalent iff every feasible leaf is zero at atol.
// The difference is signed as t1 - t2, so positive parts mark where t1 is
// bigger.
EquivalenceReport check_equivalence(const Tads& t1, const Tads& t2, double atol = kDefaultAtol,
                                    const Domain& domain = std::nullopt);

struct SimilarityViolation {
  PathCondition region;
  Vector sample;
  double excess = 0.0;  // value of the similarity structure at `sample`
  AffineFunction excess_fn;
};

struct SimilarityReport {
  double epsilon = 0.0;
  bool similar = true;
  std::vector<SimilarityViolation> violations;
  Tads sim;  // ReLU(t1 ⊖ t2 ⊖ ε) ⊕ ReLU(t2 ⊖ t1 ⊖ ε), reduced
};

// Scalar-output structures only; epsilon >= 0.
SimilarityReport check_epsilon_similarity(const Tads& t1, const Tads& t2, double epsilon,
                                          const Domain& domain = std::nullopt);

// Theta(1,1): x >= theta -> 1, otherwise 0.
Tads indicator_tads(double theta);
// t ⋈ indicator(theta), reduced.  Scalar output required.
Tads make_threshold_classifier(const Tads& t, double theta);

// Feasible regions whose constant leaf equals class_value (at atol).  Throws
// DomainError when a feasible leaf is not constant.
std::vector<PathCondition> class_characterization(const Tads& classifier, double class_value,
                                                  const Domain& domain = std::nullopt,
                                                  double atol = kDefaultAtol);

struct ClassifierComparison {
  Tads agreement;    // c1 ⊜ c2
  Tads signed_diff;  // c1 ⊖ c2, leaves in {-1, 0, 1} for 0/1 classifiers
};
ClassifierComparison compare_classifiers(const Tads& c1, const Tads& c2);

// Rows "x0,x1,value" with header, x0-major.  Scalar output, 2-D input.
std::string grid_csv(const Tads& t, const kernels::Grid2D& grid, bool parallel = true);

}  // namespace tads
