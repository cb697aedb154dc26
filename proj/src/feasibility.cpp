#include "tads/feasibility.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include <gmpxx.h>

#include "tads/error.hpp"

namespace tads {

std::string SignedHalfspace::to_string(int digits) const {
  return format_linear(w, b, digits) + (sense == Sense::GE ? " >= 0" : " < 0");
}

PathCondition::PathCondition(std::size_t dim, std::vector<SignedHalfspace> constraints)
    : dim_(dim) {
  constraints_.reserve(constraints.size());
  for (auto& h : constraints) push(std::move(h));
}

void PathCondition::push(SignedHalfspace h) {
  if (h.dim() != dim_) throw DimensionError(dims_message("path condition constraint", dim_, h.dim()));
  constraints_.push_back(std::move(h));
}

PathCondition PathCondition::with(SignedHalfspace h) const {
  PathCondition out = *this;
  out.push(std::move(h));
  return out;
}

PathCondition PathCondition::conjoin(const PathCondition& other) const {
  if (other.dim() != dim_) throw DimensionError(dims_message("path condition conjunction", dim_, other.dim()));
  PathCondition out = *this;
  for (const auto& h : other.constraints()) out.push(h);
  return out;
}

bool PathCondition::holds(const Vector& x) const {
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const SignedHalfspace& h) { return h.holds(x); });
}

PathCondition box(std::size_t dim, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("box bounds must satisfy lo <= hi");
  PathCondition pc(dim);
  const auto n = static_cast<Eigen::Index>(dim);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e(j) = 1.0;
    pc.push(ge(e, -lo));   // x_j - lo >= 0
    pc.push(ge(-e, hi));   // hi - x_j >= 0
  }
  return pc;
}

namespace {

// a·x + b >= 0, or > 0 when strict.
struct Row {
  std::vector<mpq_class> a;
  mpq_class b;
  bool strict = false;

  bool is_constant() const {
    return std::all_of(a.begin(), a.end(), [](const mpq_class& v) { return sgn(v) == 0; });
  }
  bool constant_holds() const { return strict ? sgn(b) > 0 : sgn(b) >= 0; }
};

struct System {
  std::size_t dim = 0;
  std::vector<Row> rows;
  bool trivially_false = false;  // some constant row is violated
};

// Scale by a positive factor so the first nonzero coefficient is +-1.
void normalize(Row& r) {
  for (const auto& v : r.a) {
    if (sgn(v) != 0) {
      const mpq_class s = abs(v);
      for (auto& c : r.a) c /= s;
      r.b /= s;
      return;
    }
  }
}

Row to_row(const SignedHalfspace& h) {
  Row r;
  r.a.reserve(h.dim());
  const double sign = h.sense == Sense::GE ? 1.0 : -1.0;
  for (Eigen::Index j = 0; j < h.w.size(); ++j) r.a.emplace_back(sign * h.w(j));
  r.b = mpq_class(sign * h.b);
  r.strict = h.sense == Sense::LT;
  return r;
}

// Converts, drops satisfied constant rows, flags violated ones, normalizes.
System to_system(const PathCondition& pc, bool all_strict) {
  System sys;
  sys.dim = pc.dim();
  for (const auto& h : pc.constraints()) {
    if (!h.w.allFinite() || !std::isfinite(h.b)) throw DomainError("non-finite constraint coefficient");
    Row r = to_row(h);
    if (r.is_constant()) {
      if (!r.constant_holds()) sys.trivially_false = true;
      continue;
    }
    if (all_strict) r.strict = true;
    normalize(r);
    sys.rows.push_back(std::move(r));
  }
  return sys;
}

// Among rows with identical normalized direction keep the tightest one.
void remove_dominated(std::vector<Row>& rows) {
  std::map<std::vector<mpq_class>, std::size_t> best;
  std::vector<Row> kept;
  kept.reserve(rows.size());
  for (auto& r : rows) {
    auto it = best.find(r.a);
    if (it == best.end()) {
      best.emplace(r.a, kept.size());
      kept.push_back(std::move(r));
      continue;
    }
    Row& cur = kept[it->second];
    // a·x >= -b: smaller b is tighter; at equal b strict is tighter.
    if (r.b < cur.b || (r.b == cur.b && r.strict && !cur.strict)) cur = std::move(r);
  }
  rows = std::move(kept);
}

bool fourier_motzkin(System sys) {
  if (sys.trivially_false) return false;
  std::vector<Row> rows = std::move(sys.rows);
  std::vector<bool> eliminated(sys.dim, false);
  for (;;) {
    std::vector<Row> nonconst;
    nonconst.reserve(rows.size());
    for (auto& r : rows) {
      if (r.is_constant()) {
        if (!r.constant_holds()) return false;
      } else {
        nonconst.push_back(std::move(r));
      }
    }
    rows = std::move(nonconst);
    if (rows.empty()) return true;
    remove_dominated(rows);

    // Pick the variable whose elimination creates the fewest rows.
    std::size_t var = sys.dim;
    long best_growth = 0;
    for (std::size_t j = 0; j < sys.dim; ++j) {
      if (eliminated[j]) continue;
      long pos = 0, neg = 0;
      for (const auto& r : rows) {
        const int s = sgn(r.a[j]);
        pos += s > 0;
        neg += s < 0;
      }
      if (pos == 0 && neg == 0) continue;
      const long growth = pos * neg - pos - neg;
      if (var == sys.dim || growth < best_growth) {
        var = j;
        best_growth = growth;
      }
    }
    if (var == sys.dim) return true;  // unreachable: nonconstant rows mention some variable
    eliminated[var] = true;

    std::vector<Row> pos, neg, next;
    for (auto& r : rows) {
      const int s = sgn(r.a[var]);
      if (s == 0) {
        next.push_back(std::move(r));
        continue;
      }
      // Scale so the eliminated coefficient is exactly +-1.
      const mpq_class f = abs(r.a[var]);
      for (auto& c : r.a) c /= f;
      r.b /= f;
      (s > 0 ? pos : neg).push_back(std::move(r));
    }
    for (const auto& p : pos) {
      for (const auto& q : neg) {
        Row c;
        c.a.resize(sys.dim);
        for (std::size_t j = 0; j < sys.dim; ++j) c.a[j] = p.a[j] + q.a[j];
        c.a[var] = 0;
        c.b = p.b + q.b;
        c.strict = p.strict || q.strict;
        normalize(c);
        next.push_back(std::move(c));
      }
    }
    rows = std::move(next);
  }
}

// Dense two-phase tableau simplex over exact rationals with Bland's rule.
// maximize c·z  s.t.  A z <= d,  z >= 0.
class Simplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  Simplex(std::vector<std::vector<mpq_class>> A, std::vector<mpq_class> d,
          std::vector<mpq_class> c)
      : m_(A.size()), n_(c.size()), c_(std::move(c)) {
    std::size_t n_art = 0;
    for (const auto& v : d) n_art += sgn(v) < 0;
    cols_ = n_ + m_ + n_art;
    T_.assign(m_, std::vector<mpq_class>(cols_ + 1));
    basis_.resize(m_);
    std::size_t art = n_ + m_;
    for (std::size_t i = 0; i < m_; ++i) {
      const bool flip = sgn(d[i]) < 0;
      for (std::size_t j = 0; j < n_; ++j) T_[i][j] = flip ? -A[i][j] : A[i][j];
      T_[i][n_ + i] = flip ? -1 : 1;
      T_[i][cols_] = flip ? -d[i] : d[i];
      if (flip) {
        T_[i][art] = 1;
        basis_[i] = art++;
      } else {
        basis_[i] = n_ + i;
      }
    }
  }

  Status solve() {
    if (cols_ > n_ + m_) {
      std::vector<mpq_class> phase1(cols_);
      for (std::size_t j = n_ + m_; j < cols_; ++j) phase1[j] = -1;
      run(phase1);
      if (sgn(objective_value(phase1)) != 0) return Status::Infeasible;
      drive_out_artificials();
    }
    std::vector<mpq_class> phase2(cols_);
    for (std::size_t j = 0; j < n_; ++j) phase2[j] = c_[j];
    return run(phase2) ? Status::Optimal : Status::Unbounded;
  }

  std::vector<mpq_class> primal() const {
    std::vector<mpq_class> z(n_);
    for (std::size_t i = 0; i < T_.size(); ++i) {
      if (basis_[i] < n_) z[basis_[i]] = T_[i][cols_];
    }
    return z;
  }

 private:
  bool is_artificial(std::size_t j) const { return j >= n_ + m_; }

  mpq_class objective_value(const std::vector<mpq_class>& c) const {
    mpq_class v = 0;
    for (std::size_t i = 0; i < T_.size(); ++i) v += c[basis_[i]] * T_[i][cols_];
    return v;
  }

  void pivot(std::size_t r, std::size_t col) {
    const mpq_class p = T_[r][col];
    for (auto& v : T_[r]) v /= p;
    for (std::size_t i = 0; i < T_.size(); ++i) {
      if (i == r || sgn(T_[i][col]) == 0) continue;
      const mpq_class f = T_[i][col];
      for (std::size_t j = 0; j <= cols_; ++j) {
        if (sgn(T_[r][j]) != 0) T_[i][j] -= f * T_[r][j];
      }
    }
    basis_[r] = col;
  }

  // Returns false when unbounded.
  bool run(const std::vector<mpq_class>& c) {
    for (;;) {
      // reduced cost r_j = c_B·T_j - c_j; optimal when all >= 0.
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_ && enter == cols_; ++j) {
        if (artificial_retired_ && is_artificial(j)) continue;
        mpq_class rc = -c[j];
        for (std::size_t i = 0; i < T_.size(); ++i) {
          if (sgn(T_[i][j]) != 0) rc += c[basis_[i]] * T_[i][j];
        }
        if (sgn(rc) < 0) enter = j;
      }
      if (enter == cols_) return true;
      std::size_t leave = T_.size();
      mpq_class best;
      for (std::size_t i = 0; i < T_.size(); ++i) {
        if (sgn(T_[i][enter]) <= 0) continue;
        mpq_class ratio = T_[i][cols_] / T_[i][enter];
        if (leave == T_.size() || ratio < best ||
            (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (leave == T_.size()) return false;
      pivot(leave, enter);
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < T_.size();) {
      if (!is_artificial(basis_[i])) {
        ++i;
        continue;
      }
      std::size_t col = cols_;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (sgn(T_[i][j]) != 0) {
          col = j;
          break;
        }
      }
      if (col == cols_) {
        // redundant row
        T_.erase(T_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      pivot(i, col);
      ++i;
    }
    artificial_retired_ = true;
  }

  std::size_t m_, n_, cols_ = 0;
  std::vector<mpq_class> c_;
  std::vector<std::vector<mpq_class>> T_;
  std::vector<std::size_t> basis_;
  bool artificial_retired_ = false;
};

struct SlackResult {
  bool closure_feasible = false;
  mpq_class slack;  // optimum of t (0 when no row is weighted)
  std::vector<mpq_class> point;
};

// max t  s.t.  a_i·x + b_i >= w_i t,  0 <= t <= 1, where w_i = ||a_i||_1 for
// strict rows and 0 otherwise.
SlackResult max_slack(const System& sys) {
  const std::size_t n = sys.dim;
  std::vector<std::vector<mpq_class>> A;
  std::vector<mpq_class> d;
  A.reserve(sys.rows.size() + 1);
  for (const auto& r : sys.rows) {
    std::vector<mpq_class> row(2 * n + 1);
    mpq_class norm = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = -r.a[j];
      row[n + j] = r.a[j];
      norm += abs(r.a[j]);
    }
    if (r.strict) row[2 * n] = norm;
    A.push_back(std::move(row));
    d.push_back(r.b);
  }
  std::vector<mpq_class> cap(2 * n + 1);
  cap[2 * n] = 1;
  A.push_back(std::move(cap));
  d.emplace_back(1);
  std::vector<mpq_class> obj(2 * n + 1);
  obj[2 * n] = 1;

  Simplex lp(std::move(A), std::move(d), std::move(obj));
  SlackResult res;
  if (lp.solve() != Simplex::Status::Optimal) return res;
  const auto z = lp.primal();
  res.closure_feasible = true;
  res.slack = z[2 * n];
  res.point.resize(n);
  for (std::size_t j = 0; j < n; ++j) res.point[j] = z[j] - z[n + j];
  return res;
}

bool simplex_decide(const System& sys) {
  if (sys.trivially_false) return false;
  if (sys.rows.empty()) return true;
  const auto res = max_slack(sys);
  if (!res.closure_feasible) return false;
  const bool any_strict =
      std::any_of(sys.rows.begin(), sys.rows.end(), [](const Row& r) { return r.strict; });
  return !any_strict || sgn(res.slack) > 0;
}

bool decide_system(const System& sys, feasibility::Engine engine) {
  using feasibility::Engine;
  if (engine == Engine::Auto) {
    engine = sys.dim <= feasibility::kFourierMotzkinMaxDim ? Engine::FourierMotzkin
                                                           : Engine::Simplex;
  }
  return engine == Engine::FourierMotzkin ? fourier_motzkin(sys) : simplex_decide(sys);
}

std::string cache_key(const System& sys) {
  if (sys.trivially_false) return "F";
  std::vector<std::string> parts;
  parts.reserve(sys.rows.size());
  for (const auto& r : sys.rows) {
    std::string s = r.strict ? ">" : "=";
    for (const auto& v : r.a) s += v.get_str() + ',';
    s += r.b.get_str();
    parts.push_back(std::move(s));
  }
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  std::string key = std::to_string(sys.dim);
  for (const auto& p : parts) key += ';' + p;
  return key;
}

class Cache {
 public:
  std::optional<bool> find(const std::string& key) {
    std::shared_lock lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) {
      misses_.fetch_add(1, std::memory_order_relaxed);
      return std::nullopt;
    }
    hits_.fetch_add(1, std::memory_order_relaxed);
    return it->second;
  }
  void insert(std::string key, bool value) {
    std::unique_lock lock(mu_);
    map_.emplace(std::move(key), value);
  }
  feasibility::CacheStats stats() {
    std::shared_lock lock(mu_);
    return {hits_.load(), misses_.load(), map_.size()};
  }
  void clear() {
    std::unique_lock lock(mu_);
    map_.clear();
    hits_ = 0;
    misses_ = 0;
  }
  std::atomic<bool> enabled{true};

 private:
  std::shared_mutex mu_;
  std::unordered_map<std::string, bool> map_;
  std::atomic<std::size_t> hits_{0}, misses_{0};
};

Cache& cache() {
  static Cache c;
  return c;
}

bool decide_cached(const System& sys) {
  auto& c = cache();
  if (!c.enabled.load(std::memory_order_relaxed)) {
    return decide_system(sys, feasibility::Engine::Auto);
  }
  auto key = cache_key(sys);
  if (auto hit = c.find(key)) return *hit;
  const bool value = decide_system(sys, feasibility::Engine::Auto);
  c.insert(std::move(key), value);
  return value;
}

}  // namespace

bool is_feasible(const PathCondition& pc) { return decide_cached(to_system(pc, false)); }

bool is_feasible(const PathCondition& pc, const SignedHalfspace& extra) {
  return is_feasible(pc.with(extra));
}

bool implies(const PathCondition& pc, const SignedHalfspace& h) {
  return !is_feasible(pc.with(h.negated()));
}

bool is_full_dimensional(const PathCondition& pc) {
  return decide_cached(to_system(pc, true));
}

std::optional<Vector> sample_point(const PathCondition& pc, bool interior) {
  const System sys = to_system(pc, interior);
  if (sys.trivially_false) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(pc.dim());
  if (sys.rows.empty()) return Vector::Zero(n);
  const auto res = max_slack(sys);
  if (!res.closure_feasible) return std::nullopt;
  const bool any_strict =
      std::any_of(sys.rows.begin(), sys.rows.end(), [](const Row& r) { return r.strict; });
  if (any_strict && sgn(res.slack) <= 0) return std::nullopt;
  Vector x(n);
  for (Eigen::Index j = 0; j < n; ++j) x(j) = res.point[static_cast<std::size_t>(j)].get_d();
  return x;
}

namespace feasibility {

bool decide(const PathCondition& pc, Engine engine) {
  return decide_system(to_system(pc, false), engine);
}

CacheStats cache_stats() { return cache().stats(); }
void clear_cache() { cache().clear(); }
void set_cache_enabled(bool enabled) { cache().enabled = enabled; }

}  // namespace feasibility

}  // namespace tads
