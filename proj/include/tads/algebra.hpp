#pragma once

// Lifted pointwise operators, the composition monoid, and leaf maps.

#include <cstddef>
#include <functional>
#include <string>

#include "tads/tads.hpp"

namespace tads {

using LeafCombiner = std::function<AffineFunction(const AffineFunction&, const AffineFunction&)>;
using LeafMap = std::function<AffineFunction(const AffineFunction&)>;

struct AlgebraOptions {
  // Cut joint paths whose path condition is infeasible while building.
  bool prune_infeasible = true;
};

// Grafts t2 under every leaf of t1 and combines leaf pairs with `op`; the
// result type is (n, out_dim).  Both inputs must share in_dim.
Tads zip(const LeafCombiner& op, const Tads& t1, const Tads& t2, std::size_t out_dim,
         AlgebraOptions opts = {});

Tads add(const Tads& t1, const Tads& t2, AlgebraOptions opts = {});
Tads sub(const Tads& t1, const Tads& t2, AlgebraOptions opts = {});
// Single traversal; structure unchanged.
Tads scale(double s, const Tads& t);
// Theta(n,1): constant 1 where leaf functions are equal at atol, 0 otherwise.
Tads equal_lift(const Tads& t1, const Tads& t2, double atol = kDefaultAtol,
                AlgebraOptions opts = {});

// t1 : Theta(n,r), t2 : Theta(r,m)  ->  Theta(n,m), evaluating as t2 ∘ t1.
Tads compose(const Tads& t1, const Tads& t2, AlgebraOptions opts = {});

Tads map_leaves(const Tads& t, const LeafMap& h, std::size_t out_dim);

Tads atomic_tads(const Step& step);
Tads identity_tads(std::size_t n);
Tads constant_tads(std::size_t in_dim, double c);
// Layer-wise construction: atomic structures folded left to right with compose.
Tads layerwise_tads(const Network& net, AlgebraOptions opts = {});
// t ⋈ ReLU^m.
Tads relu(const Tads& t, AlgebraOptions opts = {});

// Size records for every zip/compose, for checking the product bound.
struct SizeRecord {
  std::string op;  // "zip" or "compose"
  std::size_t lhs_nodes = 0;
  std::size_t rhs_nodes = 0;
  std::size_t result_nodes = 0;
};
using SizeObserver = std::function<void(const SizeRecord&)>;
// Installs a process-wide observer (empty to remove).  Thread-safe.
void set_size_observer(SizeObserver obs);

}  // namespace tads
