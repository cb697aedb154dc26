#include "tads/algebra.hpp"

#include <map>
#include <mutex>

#include "tads/error.hpp"

namespace tads {

namespace {

std::mutex observer_mu;
SizeObserver observer;

void notify(const char* op, const Tads& a, const Tads& b, const Tads& r) {
  std::lock_guard lock(observer_mu);
  if (observer) observer({op, a.size(), b.size(), r.size()});
}

std::string type_string(const Tads& t) {
  return "Theta(" + std::to_string(t.in_dim()) + "," + std::to_string(t.out_dim()) + ")";
}

// Recursion state shared by zip and compose: the builder and the path
// condition of the joint path currently being expanded.
class JointWalk {
 public:
  JointWalk(std::size_t in_dim, std::size_t out_dim, bool prune)
      : builder_(in_dim, out_dim), pc_(in_dim), prune_(prune) {}

  // Emits (pred, hi_fn(), lo_fn()) keeping only feasible sides when pruning.
  template <class Hi, class Lo>
  NodeId branch(const SignedHalfspace& pred, Hi&& hi_fn, Lo&& lo_fn) {
    bool hi_ok = true, lo_ok = true;
    if (prune_) {
      hi_ok = is_feasible(pc_, pred);
      lo_ok = !hi_ok || is_feasible(pc_, pred.negated());
    }
    if (!lo_ok) return under(pred, hi_fn);
    if (!hi_ok) return under(pred.negated(), lo_fn);
    const NodeId h = under(pred, hi_fn);
    const NodeId l = under(pred.negated(), lo_fn);
    return builder_.inner(pred, h, l);
  }

  TadsBuilder& builder() { return builder_; }

 private:
  template <class F>
  NodeId under(const SignedHalfspace& side, F&& f) {
    if (!prune_) return f();
    pc_.push(side);
    const NodeId id = f();
    pc_.pop();
    return id;
  }

  TadsBuilder builder_;
  PathCondition pc_;
  bool prune_;
};

}  // namespace

void set_size_observer(SizeObserver obs) {
  std::lock_guard lock(observer_mu);
  observer = std::move(obs);
}

Tads zip(const LeafCombiner& op, const Tads& t1, const Tads& t2, std::size_t out_dim,
         AlgebraOptions opts) {
  if (t1.in_dim() != t2.in_dim()) {
    throw DimensionError("lifted operator on " + type_string(t1) + " and " + type_string(t2) +
                         ": input dimensions differ");
  }
  JointWalk walk(t1.in_dim(), out_dim, opts.prune_infeasible);
  // Without pruning the result at (a, b) is path-independent and memoized,
  // which bounds the result by |t1|·|t2| nodes.
  std::map<std::pair<NodeId, NodeId>, NodeId> memo;
  std::function<NodeId(NodeId, NodeId)> go = [&](NodeId a, NodeId b) -> NodeId {
    if (!opts.prune_infeasible) {
      if (auto it = memo.find({a, b}); it != memo.end()) return it->second;
    }
    NodeId out;
    if (!t1.is_leaf(a)) {
      const auto& in = t1.inner(a);
      out = walk.branch(in.pred, [&] { return go(in.hi, b); }, [&] { return go(in.lo, b); });
    } else if (!t2.is_leaf(b)) {
      const auto& in = t2.inner(b);
      out = walk.branch(in.pred, [&] { return go(a, in.hi); }, [&] { return go(a, in.lo); });
    } else {
      out = walk.builder().leaf(op(t1.leaf(a).fn, t2.leaf(b).fn));
    }
    if (!opts.prune_infeasible) memo.emplace(std::make_pair(a, b), out);
    return out;
  };
  const NodeId root = go(t1.root(), t2.root());
  Tads result = std::move(walk.builder()).finish(root);
  notify("zip", t1, t2, result);
  return result;
}

namespace {
void require_same_type(const Tads& t1, const Tads& t2, const char* op) {
  if (t1.in_dim() != t2.in_dim() || t1.out_dim() != t2.out_dim()) {
    throw DimensionError(std::string(op) + " : Theta(n,m) x Theta(n,m) -> Theta(n,m), got " +
                         type_string(t1) + " and " + type_string(t2));
  }
}
}  // namespace

Tads add(const Tads& t1, const Tads& t2, AlgebraOptions opts) {
  require_same_type(t1, t2, "⊕");
  return zip([](const AffineFunction& f, const AffineFunction& g) { return f + g; }, t1, t2,
             t1.out_dim(), opts);
}

Tads sub(const Tads& t1, const Tads& t2, AlgebraOptions opts) {
  require_same_type(t1, t2, "⊖");
  return zip([](const AffineFunction& f, const AffineFunction& g) { return f - g; }, t1, t2,
             t1.out_dim(), opts);
}

Tads equal_lift(const Tads& t1, const Tads& t2, double atol, AlgebraOptions opts) {
  require_same_type(t1, t2, "⊜");
  const std::size_t n = t1.in_dim();
  return zip(
      [n, atol](const AffineFunction& f, const AffineFunction& g) {
        return AffineFunction::constant(n, approx_equal(f, g, atol) ? 1.0 : 0.0);
      },
      t1, t2, 1, opts);
}

Tads map_leaves(const Tads& t, const LeafMap& h, std::size_t out_dim) {
  TadsBuilder b(t.in_dim(), out_dim);
  std::vector<NodeId> remap(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (t.is_leaf(id)) {
      remap[i] = b.leaf(h(t.leaf(id).fn));
    } else {
      const auto& in = t.inner(id);
      remap[i] = b.inner(in.pred, remap[in.hi], remap[in.lo]);
    }
  }
  return std::move(b).finish(remap[t.root()]);
}

Tads scale(double s, const Tads& t) {
  return map_leaves(t, [s](const AffineFunction& f) { return s * f; }, t.out_dim());
}

Tads compose(const Tads& t1, const Tads& t2, AlgebraOptions opts) {
  if (t1.out_dim() != t2.in_dim()) {
    throw DimensionError("⋈ : Theta(n,r) x Theta(r,m) -> Theta(n,m), got " + type_string(t1) +
                         " and " + type_string(t2));
  }
  JointWalk walk(t1.in_dim(), t2.out_dim(), opts.prune_infeasible);
  std::map<std::pair<NodeId, NodeId>, NodeId> memo;  // (t1 leaf, t2 node), unpruned only

  // Second phase: walk t2 under the leaf function alpha of t1.
  std::function<NodeId(NodeId, NodeId)> under_leaf = [&](NodeId a, NodeId b) -> NodeId {
    if (!opts.prune_infeasible) {
      if (auto it = memo.find({a, b}); it != memo.end()) return it->second;
    }
    const AffineFunction& alpha = t1.leaf(a).fn;
    NodeId out;
    if (t2.is_leaf(b)) {
      out = walk.builder().leaf(tads::compose(t2.leaf(b).fn, alpha));
    } else {
      const auto& in = t2.inner(b);
      // p ∘ alpha: w·(Wx + c) + b0 >= 0 over the original inputs.
      const SignedHalfspace pulled =
          ge(alpha.W().transpose() * in.pred.w, in.pred.w.dot(alpha.b()) + in.pred.b);
      out = walk.branch(pulled, [&] { return under_leaf(a, in.hi); },
                        [&] { return under_leaf(a, in.lo); });
    }
    if (!opts.prune_infeasible) memo.emplace(std::make_pair(a, b), out);
    return out;
  };
  std::function<NodeId(NodeId)> go = [&](NodeId a) -> NodeId {
    if (t1.is_leaf(a)) return under_leaf(a, t2.root());
    const auto& in = t1.inner(a);
    return walk.branch(in.pred, [&] { return go(in.hi); }, [&] { return go(in.lo); });
  };
  const NodeId root = go(t1.root());
  Tads result = std::move(walk.builder()).finish(root);
  notify("compose", t1, t2, result);
  return result;
}

Tads identity_tads(std::size_t n) { return Tads::from_leaf(AffineFunction::identity(n)); }

Tads constant_tads(std::size_t in_dim, double c) {
  return Tads::from_leaf(AffineFunction::constant(in_dim, c));
}

Tads atomic_tads(const Step& step) {
  if (const auto* f = std::get_if<AffineFunction>(&step)) return Tads::from_leaf(*f);
  const auto& r = std::get<PartialRelu>(step);
  if (r.index >= r.dim) throw DimensionError("relu index out of range");
  TadsBuilder b(r.dim, r.dim);
  const NodeId hi = b.leaf(AffineFunction::identity(r.dim));
  const NodeId lo = b.leaf(AffineFunction::defect(r.dim, r.index));
  Vector e = Vector::Zero(static_cast<Eigen::Index>(r.dim));
  e(static_cast<Eigen::Index>(r.index)) = 1.0;
  const NodeId root = b.inner(ge(std::move(e), 0.0), hi, lo);
  return std::move(b).finish(root);
}

Tads layerwise_tads(const Network& net, AlgebraOptions opts) {
  Tads acc = identity_tads(net.input_dim());
  for (const auto& s : net.steps()) acc = compose(acc, atomic_tads(s), opts);
  return acc;
}

Tads relu(const Tads& t, AlgebraOptions opts) {
  Tads acc = t;
  for (const auto& s : full_relu(t.out_dim())) acc = compose(acc, atomic_tads(s), opts);
  return acc;
}

}  // namespace tads
