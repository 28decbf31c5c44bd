// Phase-free generalized Pauli operators over Z_d and finite abelian group
// linear algebra (orders, minimal generator counts, membership).
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace saqd {

class AlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int mod(long long a, int d) {
  long long r = a % d;
  return static_cast<int>(r < 0 ? r + d : r);
}

// One nonzero tensor factor X^x Z^z on qudit q.
struct PauliEntry {
  int q;
  int x;
  int z;
  bool operator==(const PauliEntry&) const = default;
};

// X^x Z^z on n qudits of dimension d, stored sparsely (sorted by qudit,
// only nonidentity factors). Exponents are canonical in [0, d).
class PauliOp {
 public:
  PauliOp() = default;
  PauliOp(int n, int d);
  PauliOp(int n, int d, std::vector<PauliEntry> entries);

  static PauliOp identity(int n, int d) { return PauliOp(n, d); }
  static PauliOp from_dense(int d, const std::vector<int>& x,
                            const std::vector<int>& z);
  // Single-type constructors from (qudit, exponent) pairs; repeated qudits add.
  static PauliOp x_type(int n, int d,
                        const std::vector<std::pair<int, int>>& terms);
  static PauliOp z_type(int n, int d,
                        const std::vector<std::pair<int, int>>& terms);

  int n() const { return n_; }
  int d() const { return d_; }
  const std::vector<PauliEntry>& entries() const { return entries_; }

  int x(int q) const;
  int z(int q) const;
  std::vector<int> dense_x() const;
  std::vector<int> dense_z() const;

  int weight() const { return static_cast<int>(entries_.size()); }
  bool is_identity() const { return entries_.empty(); }
  bool is_x_type() const;
  bool is_z_type() const;

  // Same operator viewed on a larger register (new qudits act trivially).
  PauliOp widened(int n) const;

  bool operator==(const PauliOp& o) const {
    return n_ == o.n_ && d_ == o.d_ && entries_ == o.entries_;
  }

  std::string to_string() const;

 private:
  int n_ = 0;
  int d_ = 2;
  std::vector<PauliEntry> entries_;
};

int symplectic_product(const PauliOp& a, const PauliOp& b);
PauliOp multiply(const PauliOp& a, const PauliOp& b);
PauliOp inverse(const PauliOp& a);
PauliOp power(const PauliOp& a, long long k);

// Prime-power factorization of d as (p, a) pairs.
std::vector<std::pair<int, int>> factorize(int d);

// Submodule of (Z_{p^a})^m kept in a strong echelon form: every row has a
// distinct pivot column holding p^v, and p^(a-v) times each row is itself
// reduced into the basis, so greedy reduction decides membership and the
// group order is the product of the pivot orders.
class ChainModule {
 public:
  ChainModule(int p, int a, int m);

  void insert(std::vector<int> v);
  bool contains(std::vector<int> v) const;

  int p() const { return p_; }
  int a() const { return a_; }
  // log_p of the module order.
  int log_order() const;
  int rank_rows() const { return static_cast<int>(rows_.size()); }
  // The stored rows (each generated element of the module).
  std::vector<std::vector<int>> rows() const;

 private:
  struct Row {
    std::vector<int> v;
    int pivot;
    int val;  // p-adic valuation of the pivot entry
    int hi;   // one past the last nonzero entry
  };
  int valuation(int x) const;
  int unit_inverse(int u) const;
  bool reduce(std::vector<int>& v, int& lead, bool insert_mode,
              std::vector<std::vector<int>>* work);

  int p_, a_, q_, m_;
  std::vector<Row> rows_;
  std::vector<int> pivot_row_;  // column -> row index or -1
};

// Structure of the abelian group generated by a list of Pauli operators.
class GroupBasis {
 public:
  GroupBasis() = default;
  const std::vector<PauliOp>& gens() const { return gens_; }
  int d() const { return d_; }
  int n() const { return n_; }
  // Number of nontrivial invariant factors.
  int mu() const { return mu_; }
  // Invariant factors d_1 | d_2 | ... (all > 1).
  const std::vector<long long>& invariant_factors() const { return factors_; }
  // log_2 of the order (exact as a sum of log2 of cyclic orders).
  double log2_order() const;
  // Order as an integer; throws if it overflows 63 bits.
  long long order() const;
  // Per-prime minimal generator counts.
  const std::vector<std::pair<int, int>>& mu_by_prime() const {
    return mu_by_prime_;
  }

  friend GroupBasis group_structure(const std::vector<PauliOp>& gens, int d);
  friend bool is_member(const PauliOp& op, const GroupBasis& basis);

 private:
  std::vector<PauliOp> gens_;
  int d_ = 2;
  int n_ = 0;
  int mu_ = 0;
  std::vector<long long> factors_;
  std::vector<std::pair<int, int>> mu_by_prime_;
  std::vector<ChainModule> modules_;
};

GroupBasis group_structure(const std::vector<PauliOp>& gens, int d);
bool is_member(const PauliOp& op, const GroupBasis& basis);

// k = n - (mu(G) + mu(S)) / 2, evaluated per prime dividing d (they agree
// for every code built here). Throws if some stabilizer fails to commute with
// some gauge generator.
int count_logical_qudits(const GroupBasis& gauge, const GroupBasis& stab,
                         int n);

}  // namespace saqd
