#include "saqd/qudit_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace saqd {

namespace {

void check_d(int d) {
  if (d < 2) throw AlgebraError("local dimension must be at least 2");
}

void check_compatible(const PauliOp& a, const PauliOp& b) {
  if (a.n() != b.n() || a.d() != b.d())
    throw AlgebraError("operator size or dimension mismatch");
}

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

PauliOp::PauliOp(int n, int d) : n_(n), d_(d) {
  check_d(d);
  if (n < 0) throw AlgebraError("negative qudit count");
}

PauliOp::PauliOp(int n, int d, std::vector<PauliEntry> entries)
    : PauliOp(n, d) {
  std::map<int, std::pair<int, int>> acc;
  for (const auto& e : entries) {
    if (e.q < 0 || e.q >= n) throw AlgebraError("qudit index out of range");
    auto& s = acc[e.q];
    s.first = mod(static_cast<long long>(s.first) + e.x, d);
    s.second = mod(static_cast<long long>(s.second) + e.z, d);
  }
  for (const auto& [q, xz] : acc)
    if (xz.first != 0 || xz.second != 0)
      entries_.push_back({q, xz.first, xz.second});
}

PauliOp PauliOp::from_dense(int d, const std::vector<int>& x,
                            const std::vector<int>& z) {
  if (x.size() != z.size()) throw AlgebraError("x/z length mismatch");
  PauliOp op(static_cast<int>(x.size()), d);
  for (int q = 0; q < op.n_; ++q) {
    int xe = mod(x[q], d), ze = mod(z[q], d);
    if (xe || ze) op.entries_.push_back({q, xe, ze});
  }
  return op;
}

PauliOp PauliOp::x_type(int n, int d,
                        const std::vector<std::pair<int, int>>& terms) {
  std::vector<PauliEntry> e;
  e.reserve(terms.size());
  for (auto [q, k] : terms) e.push_back({q, k, 0});
  return PauliOp(n, d, std::move(e));
}

PauliOp PauliOp::z_type(int n, int d,
                        const std::vector<std::pair<int, int>>& terms) {
  std::vector<PauliEntry> e;
  e.reserve(terms.size());
  for (auto [q, k] : terms) e.push_back({q, 0, k});
  return PauliOp(n, d, std::move(e));
}

int PauliOp::x(int q) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), q,
      [](const PauliEntry& e, int v) { return e.q < v; });
  return (it != entries_.end() && it->q == q) ? it->x : 0;
}

int PauliOp::z(int q) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), q,
      [](const PauliEntry& e, int v) { return e.q < v; });
  return (it != entries_.end() && it->q == q) ? it->z : 0;
}

std::vector<int> PauliOp::dense_x() const {
  std::vector<int> v(n_, 0);
  for (const auto& e : entries_) v[e.q] = e.x;
  return v;
}

std::vector<int> PauliOp::dense_z() const {
  std::vector<int> v(n_, 0);
  for (const auto& e : entries_) v[e.q] = e.z;
  return v;
}

bool PauliOp::is_x_type() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const PauliEntry& e) { return e.z == 0; });
}

bool PauliOp::is_z_type() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const PauliEntry& e) { return e.x == 0; });
}

PauliOp PauliOp::widened(int n) const {
  if (n < n_) throw AlgebraError("cannot shrink an operator");
  PauliOp op = *this;
  op.n_ = n;
  return op;
}

std::string PauliOp::to_string() const {
  std::ostringstream os;
  if (entries_.empty()) return "I";
  bool first = true;
  for (const auto& e : entries_) {
    if (!first) os << ' ';
    first = false;
    if (e.x) os << "X" << e.q << '^' << e.x;
    if (e.x && e.z) os << '.';
    if (e.z) os << "Z" << e.q << '^' << e.z;
  }
  return os.str();
}

int symplectic_product(const PauliOp& a, const PauliOp& b) {
  check_compatible(a, b);
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  long long s = 0;
  std::size_t i = 0, j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].q < eb[j].q) {
      ++i;
    } else if (eb[j].q < ea[i].q) {
      ++j;
    } else {
      s += static_cast<long long>(ea[i].x) * eb[j].z -
           static_cast<long long>(ea[i].z) * eb[j].x;
      ++i;
      ++j;
    }
  }
  return mod(s, a.d());
}

PauliOp multiply(const PauliOp& a, const PauliOp& b) {
  check_compatible(a, b);
  std::vector<PauliEntry> out;
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  out.reserve(ea.size() + eb.size());
  const int d = a.d();
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && ea[i].q < eb[j].q)) {
      out.push_back(ea[i++]);
    } else if (i == ea.size() || eb[j].q < ea[i].q) {
      out.push_back(eb[j++]);
    } else {
      int x = (ea[i].x + eb[j].x) % d, z = (ea[i].z + eb[j].z) % d;
      if (x || z) out.push_back({ea[i].q, x, z});
      ++i;
      ++j;
    }
  }
  return PauliOp(a.n(), d, std::move(out));
}

PauliOp inverse(const PauliOp& a) { return power(a, -1); }

PauliOp power(const PauliOp& a, long long k) {
  const int d = a.d();
  int kk = mod(k, d);
  std::vector<PauliEntry> out;
  for (const auto& e : a.entries()) {
    int x = mod(static_cast<long long>(e.x) * kk, d);
    int z = mod(static_cast<long long>(e.z) * kk, d);
    if (x || z) out.push_back({e.q, x, z});
  }
  return PauliOp(a.n(), d, std::move(out));
}

std::vector<std::pair<int, int>> factorize(int d) {
  check_d(d);
  std::vector<std::pair<int, int>> f;
  for (int p = 2; p * p <= d; ++p) {
    int a = 0;
    while (d % p == 0) {
      d /= p;
      ++a;
    }
    if (a) f.push_back({p, a});
  }
  if (d > 1) f.push_back({d, 1});
  return f;
}

// ---------------------------------------------------------------------------
// ChainModule

ChainModule::ChainModule(int p, int a, int m)
    : p_(p), a_(a), q_(ipow(p, a)), m_(m), pivot_row_(m, -1) {}

int ChainModule::valuation(int x) const {
  if (x == 0) return a_;
  int v = 0;
  while (x % p_ == 0) {
    x /= p_;
    ++v;
  }
  return v;
}

int ChainModule::unit_inverse(int u) const {
  // q_ is small; a linear scan is cheap and exact.
  u = mod(u, q_);
  for (int t = 1; t < q_; ++t)
    if (static_cast<long long>(u) * t % q_ == 1) return t;
  throw AlgebraError("element is not a unit");
}

bool ChainModule::reduce(std::vector<int>& w, int& lead, bool insert_mode,
                         std::vector<std::vector<int>>* work) {
  int c = lead;
  while (true) {
    while (c < m_ && w[c] == 0) ++c;
    if (c == m_) return true;
    const int vw = valuation(w[c]);
    const int ri = pivot_row_[c];
    if (ri < 0) {
      if (!insert_mode) return false;
      lead = c;
      return false;
    }
    Row& r = rows_[ri];
    if (vw >= r.val) {
      const long long f = w[c] / ipow(p_, r.val);
      for (int j = c; j < r.hi; ++j)
        if (r.v[j]) w[j] = mod(w[j] - f * r.v[j], q_);
      ++c;
      continue;
    }
    if (!insert_mode) return false;
    // The incoming vector has a smaller valuation here: it takes over the
    // pivot and the old row is pushed back through the reduction.
    const int u = w[c] / ipow(p_, vw);
    const int inv = unit_inverse(u);
    for (int j = c; j < m_; ++j)
      if (w[j]) w[j] = static_cast<int>(static_cast<long long>(w[j]) * inv % q_);
    std::swap(w, r.v);
    r.val = vw;
    r.hi = m_;
    while (r.hi > c && r.v[r.hi - 1] == 0) --r.hi;
    if (vw > 0) {
      std::vector<int> ann(m_, 0);
      const int s = ipow(p_, a_ - vw);
      for (int j = c; j < r.hi; ++j) ann[j] = mod(1LL * r.v[j] * s, q_);
      work->push_back(std::move(ann));
    }
  }
}

void ChainModule::insert(std::vector<int> v) {
  if (static_cast<int>(v.size()) != m_)
    throw AlgebraError("vector length mismatch");
  for (auto& x : v) x = mod(x, q_);
  std::vector<std::vector<int>> work;
  work.push_back(std::move(v));
  while (!work.empty()) {
    std::vector<int> w = std::move(work.back());
    work.pop_back();
    int lead = 0;
    if (reduce(w, lead, true, &work)) continue;
    const int c = lead;
    const int vw = valuation(w[c]);
    const int inv = unit_inverse(w[c] / ipow(p_, vw));
    for (int j = c; j < m_; ++j)
      if (w[j]) w[j] = static_cast<int>(static_cast<long long>(w[j]) * inv % q_);
    Row r{std::move(w), c, vw, m_};
    while (r.hi > c && r.v[r.hi - 1] == 0) --r.hi;
    if (vw > 0) {
      std::vector<int> ann(m_, 0);
      const int s = ipow(p_, a_ - vw);
      for (int j = c; j < r.hi; ++j) ann[j] = mod(1LL * r.v[j] * s, q_);
      work.push_back(std::move(ann));
    }
    pivot_row_[c] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(r));
  }
}

bool ChainModule::contains(std::vector<int> v) const {
  if (static_cast<int>(v.size()) != m_)
    throw AlgebraError("vector length mismatch");
  for (auto& x : v) x = mod(x, q_);
  int lead = 0;
  return const_cast<ChainModule*>(this)->reduce(v, lead, false, nullptr);
}

int ChainModule::log_order() const {
  int s = 0;
  for (const auto& r : rows_) s += a_ - r.val;
  return s;
}

std::vector<std::vector<int>> ChainModule::rows() const {
  std::vector<std::vector<int>> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.v);
  return out;
}

// ---------------------------------------------------------------------------
// GroupBasis

namespace {

std::vector<int> lift(const PauliOp& op, int q) {
  std::vector<int> v(2 * op.n(), 0);
  for (const auto& e : op.entries()) {
    v[e.q] = e.x % q;
    v[op.n() + e.q] = e.z % q;
  }
  return v;
}

}  // namespace

double GroupBasis::log2_order() const {
  double s = 0;
  for (auto f : factors_) s += std::log2(static_cast<double>(f));
  return s;
}

long long GroupBasis::order() const {
  if (log2_order() > 62.0) throw AlgebraError("group order overflows");
  long long o = 1;
  for (auto f : factors_) o *= f;
  return o;
}

GroupBasis group_structure(const std::vector<PauliOp>& gens, int d) {
  check_d(d);
  if (gens.empty()) throw AlgebraError("empty generator list");
  GroupBasis g;
  g.gens_ = gens;
  g.d_ = d;
  g.n_ = gens.front().n();
  for (const auto& op : gens)
    if (op.n() != g.n_ || op.d() != d)
      throw AlgebraError("inconsistent generators");

  std::vector<std::vector<int>> exps_by_prime;
  for (auto [p, a] : factorize(d)) {
    const int q = ipow(p, a);
    ChainModule mod_p(p, a, 2 * g.n_);
    for (const auto& op : gens) mod_p.insert(lift(op, q));
    // Number of cyclic factors of exponent > j is log|p^j G| - log|p^{j+1} G|.
    std::vector<int> log_pj(a + 1, 0);
    log_pj[0] = mod_p.log_order();
    auto base_rows = mod_p.rows();
    int scale = 1;
    for (int j = 1; j <= a; ++j) {
      scale *= p;
      if (j == a) break;
      ChainModule sub(p, a, 2 * g.n_);
      for (const auto& r : base_rows) {
        std::vector<int> s(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) s[i] = r[i] * scale % q;
        sub.insert(std::move(s));
      }
      log_pj[j] = sub.log_order();
    }
    std::vector<int> exps;  // cyclic exponents, descending
    for (int j = a - 1; j >= 0; --j) {
      const int count_gt_j = log_pj[j] - log_pj[j + 1];
      const int already = static_cast<int>(exps.size());
      for (int t = already; t < count_gt_j; ++t) exps.push_back(j + 1);
    }
    g.mu_by_prime_.push_back({p, static_cast<int>(exps.size())});
    g.mu_ = std::max(g.mu_, static_cast<int>(exps.size()));
    exps_by_prime.push_back(exps);
    g.modules_.push_back(std::move(mod_p));
  }
  // Combine prime parts into invariant factors.
  auto primes = factorize(d);
  for (int i = 0; i < g.mu_; ++i) {
    long long f = 1;
    for (std::size_t k = 0; k < primes.size(); ++k)
      if (i < static_cast<int>(exps_by_prime[k].size()))
        f *= ipow(primes[k].first, exps_by_prime[k][i]);
    g.factors_.push_back(f);
  }
  std::sort(g.factors_.begin(), g.factors_.end());
  return g;
}

bool is_member(const PauliOp& op, const GroupBasis& basis) {
  if (op.n() != basis.n_ || op.d() != basis.d_)
    throw AlgebraError("operator size or dimension mismatch");
  for (const auto& m : basis.modules_) {
    const int q = ipow(m.p(), m.a());
    if (!m.contains(lift(op, q))) return false;
  }
  return true;
}

int count_logical_qudits(const GroupBasis& gauge, const GroupBasis& stab,
                         int n) {
  if (gauge.d() != stab.d()) throw AlgebraError("dimension mismatch");
  // Centrality: every stabilizer generator commutes with every gauge
  // generator.
  std::vector<int> dx(n, 0), dz(n, 0);
  const int d = gauge.d();
  for (const auto& s : stab.gens()) {
    for (const auto& e : s.entries()) {
      dx[e.q] = e.x;
      dz[e.q] = e.z;
    }
    for (const auto& g : gauge.gens()) {
      long long acc = 0;
      for (const auto& e : g.entries())
        acc += 1LL * dx[e.q] * e.z - 1LL * dz[e.q] * e.x;
      if (mod(acc, d) != 0)
        throw AlgebraError("stabilizer generator is not central: " +
                           s.to_string());
    }
    for (const auto& e : s.entries()) dx[e.q] = dz[e.q] = 0;
  }
  int k = -1;
  for (std::size_t i = 0; i < gauge.mu_by_prime().size(); ++i) {
    const int mg = gauge.mu_by_prime()[i].second;
    const int ms = stab.mu_by_prime()[i].second;
    if ((mg + ms) % 2 != 0)
      throw AlgebraError("gauge and stabilizer ranks have odd sum");
    const int kp = n - (mg + ms) / 2;
    if (k >= 0 && kp != k)
      throw AlgebraError("logical count differs between prime factors");
    k = kp;
  }
  if (k < 0) throw AlgebraError("negative logical count");
  return k;
}

}  // namespace saqd
