#include "tads/tads.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tads/error.hpp"

namespace tads {

using nlohmann::json;

std::size_t Tads::leaf_count() const {
  std::size_t n = 0;
  for (const auto& nd : nodes()) n += std::holds_alternative<LeafNode>(nd);
  return n;
}

Tads Tads::from_leaf(AffineFunction fn) {
  TadsBuilder b(fn.in_dim(), fn.out_dim());
  const NodeId id = b.leaf(std::move(fn));
  return std::move(b).finish(id);
}

// ---------------------------------------------------------------------------
// Builder

namespace {

void append_bytes(std::string& key, const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = data[i] == 0.0 ? 0.0 : data[i];  // -0 and +0 intern together
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof v);
    key.append(buf, sizeof buf);
  }
}

std::string leaf_key(const AffineFunction& f) {
  std::string key = "L";
  // Eigen storage is column-major; consistent either way.
  append_bytes(key, f.W().data(), static_cast<std::size_t>(f.W().size()));
  append_bytes(key, f.b().data(), static_cast<std::size_t>(f.b().size()));
  return key;
}

// Positive scaling by the largest absolute coefficient; orientation is kept.
std::string inner_key(const SignedHalfspace& p, NodeId hi, NodeId lo) {
  double s = std::abs(p.b);
  if (p.w.size()) s = std::max(s, p.w.cwiseAbs().maxCoeff());
  Vector w = p.w;
  double b = p.b;
  if (s > 0.0) {
    w /= s;
    b /= s;
  }
  std::string key = "I";
  append_bytes(key, w.data(), static_cast<std::size_t>(w.size()));
  append_bytes(key, &b, 1);
  key.append(reinterpret_cast<const char*>(&hi), sizeof hi);
  key.append(reinterpret_cast<const char*>(&lo), sizeof lo);
  return key;
}

}  // namespace

TadsBuilder::TadsBuilder(std::size_t in_dim, std::size_t out_dim)
    : in_dim_(in_dim), out_dim_(out_dim) {}

NodeId TadsBuilder::leaf(AffineFunction fn) {
  if (fn.in_dim() != in_dim_ || fn.out_dim() != out_dim_) {
    throw DimensionError("leaf of type (" + std::to_string(fn.in_dim()) + "," +
                         std::to_string(fn.out_dim()) + ") in a TADS of type (" +
                         std::to_string(in_dim_) + "," + std::to_string(out_dim_) + ")");
  }
  auto key = leaf_key(fn);
  if (auto it = interned_.find(key); it != interned_.end()) return it->second;
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.emplace_back(LeafNode{std::move(fn)});
  interned_.emplace(std::move(key), id);
  return id;
}

NodeId TadsBuilder::inner(SignedHalfspace pred, NodeId hi, NodeId lo) {
  if (pred.dim() != in_dim_) throw DimensionError(dims_message("predicate", in_dim_, pred.dim()));
  if (pred.sense != Sense::GE) pred = SignedHalfspace{pred.w, pred.b, Sense::GE};
  if (hi >= nodes_.size() || lo >= nodes_.size()) throw DomainError("inner node child id out of range");
  if (hi == lo) return hi;
  auto key = inner_key(pred, hi, lo);
  if (auto it = interned_.find(key); it != interned_.end()) return it->second;
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.emplace_back(InnerNode{std::move(pred), hi, lo});
  interned_.emplace(std::move(key), id);
  return id;
}

NodeId TadsBuilder::import(const Tads& t, NodeId id) {
  std::unordered_map<NodeId, NodeId> memo;
  std::function<NodeId(NodeId)> go = [&](NodeId n) -> NodeId {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    NodeId out;
    if (t.is_leaf(n)) {
      out = leaf(t.leaf(n).fn);
    } else {
      const auto& in = t.inner(n);
      const NodeId h = go(in.hi);
      const NodeId l = go(in.lo);
      out = inner(in.pred, h, l);
    }
    memo.emplace(n, out);
    return out;
  };
  return go(id);
}

Tads TadsBuilder::finish(NodeId root) && {
  if (root >= nodes_.size()) throw DomainError("TADS root id out of range");
  std::vector<NodeId> remap(nodes_.size(), NodeId(-1));
  auto out = std::make_shared<std::vector<Node>>();
  // Post-order, hi before lo; iterative so deep structures are fine.
  std::vector<std::pair<NodeId, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (remap[id] != NodeId(-1)) continue;
    if (auto* in = std::get_if<InnerNode>(&nodes_[id]); in && !expanded) {
      stack.emplace_back(id, true);
      stack.emplace_back(in->lo, false);
      stack.emplace_back(in->hi, false);
      continue;
    }
    Node n = std::move(nodes_[id]);
    if (auto* in = std::get_if<InnerNode>(&n)) {
      in->hi = remap[in->hi];
      in->lo = remap[in->lo];
    }
    remap[id] = static_cast<NodeId>(out->size());
    out->push_back(std::move(n));
  }
  Tads t;
  t.in_dim_ = in_dim_;
  t.out_dim_ = out_dim_;
  t.root_ = remap[root];
  t.nodes_ = std::move(out);
  nodes_.clear();
  interned_.clear();
  return t;
}

// ---------------------------------------------------------------------------
// Evaluation and inspection

NodeId leaf_for(const Tads& t, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != t.in_dim()) {
    throw DimensionError(dims_message("TADS eval", t.in_dim(), x.size()));
  }
  NodeId id = t.root();
  while (const auto* in = std::get_if<InnerNode>(&t.node(id))) {
    id = in->pred.value(x) >= 0.0 ? in->hi : in->lo;
  }
  return id;
}

Vector evaluate(const Tads& t, const Vector& x) { return t.leaf(leaf_for(t, x)).fn(x); }

std::size_t path_count(const Tads& t) {
  std::vector<std::size_t> count(t.size(), 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    count[i] = t.is_leaf(id) ? 1 : count[t.inner(id).hi] + count[t.inner(id).lo];
  }
  return t.size() ? count[t.root()] : 0;
}

bool structurally_equal(const Tads& a, const Tads& b) {
  if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim() || a.size() != b.size() ||
      a.root() != b.root()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (a.is_leaf(id) != b.is_leaf(id)) return false;
    if (a.is_leaf(id)) {
      if (!(a.leaf(id).fn == b.leaf(id).fn)) return false;
    } else {
      const auto& x = a.inner(id);
      const auto& y = b.inner(id);
      if (x.hi != y.hi || x.lo != y.lo || x.pred.b != y.pred.b || x.pred.w != y.pred.w) {
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Symbolic execution

std::vector<std::pair<StepLabel, SymbolicConfig>> sym_step(const SymbolicConfig& c,
                                                           std::optional<bool> branch) {
  if (c.remaining.empty()) throw DomainError("sym_step on a terminal configuration");
  std::vector<std::pair<StepLabel, SymbolicConfig>> out;
  const Step& head = c.remaining.front();
  const auto rest = c.remaining.subspan(1);
  if (const auto* f = std::get_if<AffineFunction>(&head)) {
    out.push_back({StepLabel::True, {rest, compose(*f, c.alpha), c.pc}});
    return out;
  }
  const auto& r = std::get<PartialRelu>(head);
  if (c.alpha.out_dim() != r.dim) throw DimensionError(dims_message("sym_step", r.dim, c.alpha.out_dim()));
  const auto i = static_cast<Eigen::Index>(r.index);
  const SignedHalfspace pred = ge(c.alpha.W().row(i).transpose(), c.alpha.b()(i));
  if (!branch || *branch) {
    out.push_back({StepLabel::One, {rest, c.alpha, c.pc.with(pred)}});
  }
  if (!branch || !*branch) {
    out.push_back({StepLabel::Zero,
                   {rest, compose(AffineFunction::defect(r.dim, r.index), c.alpha),
                    c.pc.with(pred.negated())}});
  }
  return out;
}

namespace {

class SymbolicBuilder {
 public:
  SymbolicBuilder(const Network& net, BuildOptions opts)
      : opts_(opts), builder_(net.input_dim(), net.output_dim()) {}

  NodeId run(const SymbolicConfig& c) {
    if (c.remaining.empty()) return builder_.leaf(c.alpha);
    if (std::holds_alternative<AffineFunction>(c.remaining.front())) {
      return run(sym_step(c).front().second);
    }
    auto succ = sym_step(c);
    auto& hi = succ[0].second;
    auto& lo = succ[1].second;
    const SignedHalfspace pred = hi.pc.constraints().back();
    if (opts_.prune_infeasible) {
      const bool hi_ok = is_feasible(hi.pc);
      const bool lo_ok = is_feasible(lo.pc);
      if (!lo_ok) return run(hi);
      if (!hi_ok) return run(lo);
    }
    const NodeId h = run(hi);
    const NodeId l = run(lo);
    return builder_.inner(pred, h, l);
  }

  Tads finish(NodeId root) && { return std::move(builder_).finish(root); }

 private:
  BuildOptions opts_;
  TadsBuilder builder_;
};

}  // namespace

Tads net_to_tads(const Network& net, BuildOptions opts) {
  SymbolicBuilder sb(net, opts);
  SymbolicConfig start{net.steps(), AffineFunction::identity(net.input_dim()),
                       PathCondition(net.input_dim())};
  const NodeId root = sb.run(start);
  return std::move(sb).finish(root);
}

// ---------------------------------------------------------------------------
// Reductions

namespace {

bool leaves_close(const AffineFunction& f, const AffineFunction& g, double atol) {
  const auto& A = f.W();
  const auto& B = g.W();
  for (Eigen::Index k = 0; k < A.size(); ++k) {
    if (std::abs(A.data()[k] - B.data()[k]) > atol) return false;
  }
  for (Eigen::Index k = 0; k < f.b().size(); ++k) {
    if (std::abs(f.b()(k) - g.b()(k)) > atol) return false;
  }
  return true;
}

}  // namespace

namespace {
// Projection onto fixed weights in [1, 2): leaves within atol entrywise have
// keys within atol * sum(weights), so close leaves are found by a range scan.
double leaf_key(const AffineFunction& f, double& weight_sum) {
  double key = 0.0;
  weight_sum = 0.0;
  std::size_t k = 0;
  auto add = [&](double v) {
    const double w = 1.0 + static_cast<double>((k++ * 2654435761u) % 1000u) / 1000.0;
    key += w * v;
    weight_sum += w;
  };
  for (Eigen::Index i = 0; i < f.W().size(); ++i) add(f.W().data()[i]);
  for (Eigen::Index i = 0; i < f.b().size(); ++i) add(f.b()(i));
  return key;
}
}  // namespace

Tads semantic_reduce(const Tads& t, double atol) {
  TadsBuilder b(t.in_dim(), t.out_dim());
  std::vector<NodeId> remap(t.size());
  std::multimap<double, std::pair<const AffineFunction*, NodeId>> representatives;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (t.is_leaf(id)) {
      const auto& fn = t.leaf(id).fn;
      double weights = 0.0;
      const double key = leaf_key(fn, weights);
      const double radius = atol * weights * (1.0 + 1e-12);
      std::optional<NodeId> match;
      for (auto it = representatives.lower_bound(key - radius);
           it != representatives.end() && it->first <= key + radius; ++it) {
        if (leaves_close(*it->second.first, fn, atol) && (!match || it->second.second < *match)) {
          match = it->second.second;
        }
      }
      if (match) {
        remap[i] = *match;
      } else {
        remap[i] = b.leaf(fn);
        representatives.emplace(key, std::make_pair(&fn, remap[i]));
      }
    } else {
      const auto& in = t.inner(id);
      remap[i] = b.inner(in.pred, remap[in.hi], remap[in.lo]);
    }
  }
  return std::move(b).finish(remap[t.root()]);
}

namespace {

enum class Outcome : std::uint8_t { Unseen, Hi, Lo, Both };

Outcome merge(Outcome a, Outcome b) {
  if (a == Outcome::Unseen) return b;
  if (b == Outcome::Unseen || a == b) return a;
  return Outcome::Both;
}

// One sweep over every feasible path; returns the rerouted structure and
// whether anything changed.
std::pair<Tads, bool> vacuity_sweep(const Tads& t) {
  std::vector<Outcome> outcome(t.size(), Outcome::Unseen);
  PathCondition pc(t.in_dim());
  std::function<void(NodeId)> visit = [&](NodeId id) {
    if (t.is_leaf(id)) return;
    const auto& in = t.inner(id);
    const bool hi_ok = is_feasible(pc, in.pred);
    const bool lo_ok = is_feasible(pc, in.pred.negated());
    const Outcome o = hi_ok && lo_ok ? Outcome::Both : hi_ok ? Outcome::Hi : Outcome::Lo;
    outcome[id] = merge(outcome[id], o);
    if (hi_ok) {
      pc.push(in.pred);
      visit(in.hi);
      pc.pop();
    }
    if (lo_ok) {
      pc.push(in.pred.negated());
      visit(in.lo);
      pc.pop();
    }
  };
  visit(t.root());

  bool changed = false;
  TadsBuilder b(t.in_dim(), t.out_dim());
  std::vector<NodeId> remap(t.size(), NodeId(-1));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (t.is_leaf(id)) {
      remap[i] = b.leaf(t.leaf(id).fn);
      continue;
    }
    const auto& in = t.inner(id);
    switch (outcome[i]) {
      case Outcome::Hi:
        remap[i] = remap[in.hi];
        changed = true;
        break;
      case Outcome::Lo:
        remap[i] = remap[in.lo];
        changed = true;
        break;
      default:
        // Unseen nodes are only reachable through rerouted edges.
        remap[i] = b.inner(in.pred, remap[in.hi], remap[in.lo]);
    }
  }
  return {std::move(b).finish(remap[t.root()]), changed};
}

}  // namespace

Tads vacuity_reduce(const Tads& t) {
  Tads cur = t;
  for (;;) {
    auto [next, changed] = vacuity_sweep(cur);
    if (!changed) return next;
    cur = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Regions

std::vector<Region> enumerate_regions(const Tads& t, const RegionOptions& opts) {
  std::vector<Region> out;
  PathCondition pc = opts.domain ? *opts.domain : PathCondition(t.in_dim());
  if (pc.dim() != t.in_dim()) throw DimensionError(dims_message("region domain", t.in_dim(), pc.dim()));
  if (!is_feasible(pc)) return out;
  std::function<void(NodeId)> visit = [&](NodeId id) {
    if (t.is_leaf(id)) {
      if (!opts.only_full_dim || is_full_dimensional(pc)) {
        out.push_back({pc, id, t.leaf(id).fn});
      }
      return;
    }
    const auto& in = t.inner(id);
    for (const auto& side : {in.pred, in.pred.negated()}) {
      pc.push(side);
      if (is_feasible(pc)) visit(side.sense == Sense::GE ? in.hi : in.lo);
      pc.pop();
    }
  };
  visit(t.root());
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json matrix_json(const Matrix& W) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < W.cols(); ++c) row.push_back(W(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector read_vector(const json& j, std::size_t expected, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array");
  if (j.size() != expected) throw FormatError(where + ": " + dims_message("length", expected, j.size()));
  Vector v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    if (!j[i].is_number()) throw FormatError(where + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix read_matrix(const json& j, std::size_t rows, std::size_t cols, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array of rows");
  if (j.size() != rows) throw FormatError(where + ": " + dims_message("row count (out_dim)", rows, j.size()));
  Matrix W(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    W.row(static_cast<Eigen::Index>(r)) =
        read_vector(j[r], cols, where + " row " + std::to_string(r)).transpose();
  }
  return W;
}

}  // namespace

std::string tads_to_json(const Tads& t) {
  json nodes = json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (t.is_leaf(id)) {
      const auto& f = t.leaf(id).fn;
      nodes.push_back({{"id", i}, {"leaf", {{"W", matrix_json(f.W())}, {"b", vector_json(f.b())}}}});
    } else {
      const auto& in = t.inner(id);
      nodes.push_back({{"id", i},
                       {"pred", {{"w", vector_json(in.pred.w)}, {"b", in.pred.b}}},
                       {"hi", in.hi},
                       {"lo", in.lo}});
    }
  }
  json doc = {{"in_dim", t.in_dim()}, {"out_dim", t.out_dim()}, {"root", t.root()},
              {"nodes", std::move(nodes)}};
  return doc.dump(1);
}

Tads tads_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("TADS JSON: ") + e.what());
  }
  for (const char* key : {"in_dim", "out_dim", "root"}) {
    if (!doc.is_object() || !doc.contains(key) || !doc[key].is_number_unsigned()) {
      throw FormatError(std::string("TADS JSON: missing or invalid \"") + key + "\"");
    }
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw FormatError("TADS JSON: missing or empty \"nodes\" array");
  }
  const auto n = doc["in_dim"].get<std::size_t>();
  const auto m = doc["out_dim"].get<std::size_t>();
  const auto& arr = doc["nodes"];
  const std::size_t count = arr.size();

  struct Raw {
    bool leaf = false;
    std::size_t hi = 0, lo = 0;
    const json* j = nullptr;
  };
  std::vector<Raw> raw(count);
  std::vector<bool> seen(count, false);
  for (const auto& e : arr) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_number_unsigned()) {
      throw FormatError("TADS JSON: node without a valid \"id\"");
    }
    const auto id = e["id"].get<std::size_t>();
    if (id >= count) throw FormatError("TADS JSON: node id " + std::to_string(id) + " is not dense (0.." + std::to_string(count - 1) + ")");
    if (seen[id]) throw FormatError("TADS JSON: duplicate node id " + std::to_string(id));
    seen[id] = true;
    Raw r;
    r.j = &e;
    if (e.contains("leaf")) {
      r.leaf = true;
    } else if (e.contains("pred") && e.contains("hi") && e.contains("lo")) {
      if (!e["hi"].is_number_unsigned() || !e["lo"].is_number_unsigned()) {
        throw FormatError("TADS JSON: node " + std::to_string(id) + ": invalid child id");
      }
      r.hi = e["hi"].get<std::size_t>();
      r.lo = e["lo"].get<std::size_t>();
      for (auto c : {r.hi, r.lo}) {
        if (c >= count) {
          throw FormatError("TADS JSON: node " + std::to_string(id) + ": dangling child id " + std::to_string(c));
        }
      }
    } else {
      throw FormatError("TADS JSON: node " + std::to_string(id) + " is neither a leaf nor an inner node");
    }
    raw[id] = r;
  }
  const auto root = doc["root"].get<std::size_t>();
  if (root >= count) throw FormatError("TADS JSON: dangling root id " + std::to_string(root));

  // Cycle check before the ordering rule, so a cycle is reported as such.
  std::vector<std::uint8_t> state(count, 0);  // 0 new, 1 on stack, 2 done
  for (std::size_t s = 0; s < count; ++s) {
    if (state[s]) continue;
    std::vector<std::pair<std::size_t, int>> stack{{s, 0}};
    state[s] = 1;
    while (!stack.empty()) {
      auto& [id, k] = stack.back();
      if (raw[id].leaf || k == 2) {
        state[id] = 2;
        stack.pop_back();
        continue;
      }
      const std::size_t c = k++ == 0 ? raw[id].hi : raw[id].lo;
      if (state[c] == 1) throw FormatError("TADS JSON: cycle detected through node " + std::to_string(c));
      if (state[c] == 0) {
        state[c] = 1;
        stack.emplace_back(c, 0);
      }
    }
  }

  TadsBuilder b(n, m);
  std::vector<NodeId> remap(count);
  for (std::size_t id = 0; id < count; ++id) {
    const auto& e = *raw[id].j;
    const auto where = "TADS JSON: node " + std::to_string(id);
    if (raw[id].leaf) {
      const auto& lf = e["leaf"];
      if (!lf.is_object() || !lf.contains("W") || !lf.contains("b")) throw FormatError(where + ": leaf needs \"W\" and \"b\"");
      try {
        Matrix W = read_matrix(lf["W"], m, n, where + " W");
        Vector bias = read_vector(lf["b"], m, where + " b (out_dim)");
        remap[id] = b.leaf(AffineFunction(std::move(W), std::move(bias)));
      } catch (const DomainError& err) {
        throw FormatError(where + ": " + err.what());
      }
      continue;
    }
    if (raw[id].hi >= id || raw[id].lo >= id) {
      throw FormatError(where + ": children must have smaller ids than their parent");
    }
    const auto& p = e["pred"];
    if (!p.is_object() || !p.contains("w") || !p.contains("b") || !p["b"].is_number()) {
      throw FormatError(where + ": predicate needs \"w\" and \"b\"");
    }
    SignedHalfspace pred = ge(read_vector(p["w"], n, where + " pred w"), p["b"].get<double>());
    if (!pred.w.allFinite() || !std::isfinite(pred.b)) throw FormatError(where + ": non-finite predicate");
    remap[id] = b.inner(std::move(pred), remap[raw[id].hi], remap[raw[id].lo]);
  }
  return std::move(b).finish(remap[root]);
}

Tads load_tads(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open TADS file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return tads_from_json(ss.str());
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << text << '\n';
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace tads
