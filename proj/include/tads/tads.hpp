#pragma once

// Typed Affine Decision Structures: rooted DAGs whose inner nodes test a
// linear predicate on the input and whose leaves carry affine functions of a
// common type (n, m).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tads/affine.hpp"
#include "tads/feasibility.hpp"
#include "tads/network.hpp"

namespace tads {

using NodeId = std::uint32_t;

struct LeafNode {
  AffineFunction fn;
};

// hi is taken when pred.w·x + pred.b >= 0, lo otherwise (strictly negative).
struct InnerNode {
  SignedHalfspace pred;  // always Sense::GE
  NodeId hi = 0;
  NodeId lo = 0;
};

using Node = std::variant<LeafNode, InnerNode>;

// Immutable, cheaply copyable.  Node ids are dense and every child id is
// smaller than its parent's, so the arena is topologically ordered.
class Tads {
 public:
  Tads() = default;

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }
  NodeId root() const noexcept { return root_; }
  std::size_t size() const noexcept { return nodes_ ? nodes_->size() : 0; }
  std::span<const Node> nodes() const noexcept {
    return nodes_ ? std::span<const Node>(*nodes_) : std::span<const Node>{};
  }
  const Node& node(NodeId id) const { return (*nodes_)[id]; }
  bool is_leaf(NodeId id) const { return std::holds_alternative<LeafNode>(node(id)); }
  const LeafNode& leaf(NodeId id) const { return std::get<LeafNode>(node(id)); }
  const InnerNode& inner(NodeId id) const { return std::get<InnerNode>(node(id)); }

  std::size_t leaf_count() const;
  std::size_t inner_count() const { return size() - leaf_count(); }

  // Single-leaf structure.
  static Tads from_leaf(AffineFunction fn);

 private:
  friend class TadsBuilder;
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  NodeId root_ = 0;
  std::shared_ptr<const std::vector<Node>> nodes_;
};

// Append-only arena with hash-consing: leaves are interned by exact equality,
// inner nodes by (scaled predicate, hi, lo), and inner nodes with hi == lo
// collapse to the child.
class TadsBuilder {
 public:
  TadsBuilder(std::size_t in_dim, std::size_t out_dim);

  NodeId leaf(AffineFunction fn);
  NodeId inner(SignedHalfspace pred, NodeId hi, NodeId lo);
  // Copies the sub-DAG of `t` rooted at `id` into this arena.
  NodeId import(const Tads& t, NodeId id);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }

  // Keeps only nodes reachable from `root`, renumbered children-first.
  Tads finish(NodeId root) &&;

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> interned_;
};

Vector evaluate(const Tads& t, const Vector& x);
NodeId leaf_for(const Tads& t, const Vector& x);

// Root-to-leaf paths, counted with multiplicity through shared nodes.
std::size_t path_count(const Tads& t);

// Structural equality of two arenas (same ids, same node contents).
bool structurally_equal(const Tads& a, const Tads& b);

// ---------------------------------------------------------------------------
// Symbolic execution

struct SymbolicConfig {
  std::span<const Step> remaining;
  AffineFunction alpha;  // inputs -> current layer
  PathCondition pc;
};

// Affine head: one successor (label True) with alpha replaced by head∘alpha.
// Partial-ReLU head: true successor (label One) conjoining alpha(x)_i >= 0,
// false successor (label Zero) conjoining alpha(x)_i < 0 and composing the
// defect matrix.  `branch` selects a single ReLU successor.
std::vector<std::pair<StepLabel, SymbolicConfig>> sym_step(
    const SymbolicConfig& c, std::optional<bool> branch = std::nullopt);

struct BuildOptions {
  bool prune_infeasible = true;
};

// Depth-first symbolic execution.  Affine steps emit no decision node.
Tads net_to_tads(const Network& net, BuildOptions opts = {});

// ---------------------------------------------------------------------------
// Reductions

// Merges leaves equal at atol and inner nodes with identical (predicate, hi,
// lo); collapses nodes whose branches coincide.
Tads semantic_reduce(const Tads& t, double atol = kDefaultAtol);

// Reroutes every node whose outcome is implied by its path condition on all
// feasible paths reaching it; repeats to a fixpoint.
Tads vacuity_reduce(const Tads& t);

inline Tads reduce(const Tads& t, double atol = kDefaultAtol) {
  return semantic_reduce(vacuity_reduce(t), atol);
}

// ---------------------------------------------------------------------------
// Regions

struct Region {
  PathCondition pc;
  NodeId leaf = 0;
  AffineFunction fn;
};

struct RegionOptions {
  bool only_full_dim = false;
  // Intersect every region with this condition (e.g. a box).
  std::optional<PathCondition> domain;
};

// Feasible root-to-leaf paths, in depth-first hi-before-lo order.
std::vector<Region> enumerate_regions(const Tads& t, const RegionOptions& opts = {});

// ---------------------------------------------------------------------------
// Serialization
//
// {"in_dim": n, "out_dim": m, "root": id,
//  "nodes": [{"id":0,"leaf":{"W":[[...]],"b":[...]}},
//            {"id":3,"pred":{"w":[...],"b":c},"hi":1,"lo":0}, ...]}

std::string tads_to_json(const Tads& t);
// Throws FormatError on malformed input, dangling ids, cycles, forward
// references, or nodes whose types disagree with in_dim/out_dim.
Tads tads_from_json(std::string_view text);
Tads load_tads(const std::string& path);
void save_text(const std::string& path, const std::string& text);

}  // namespace tads
