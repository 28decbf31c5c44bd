// Maximum-weight matching on a general graph (Edmonds' blossom algorithm
// with dual variables, O(V^3) on a dense weight table).
#pragma once

#include <vector>

namespace saqd {

class WeightedMatching {
 public:
  explicit WeightedMatching(int n);

  // Weight must be positive; a zero weight means "no edge".
  void set_weight(int u, int v, long long w);
  // Returns mate[v] (or -1) for a matching of maximum total weight.
  std::vector<int> solve();

 private:
  struct Edge {
    int u, v;
    long long w;
  };
  long long e_delta(const Edge& e) const;
  void update_slack(int u, int x);
  void set_slack(int x);
  void q_push(int x);
  void set_st(int x, int b);
  int get_pr(int b, int xr);
  void set_match(int u, int v);
  void augment(int u, int v);
  int get_lca(int u, int v);
  void add_blossom(int u, int lca, int v);
  void expand_blossom(int b);
  bool on_found_edge(const Edge& e);
  bool matching();
  Edge& g(int u, int v) { return g_[u * stride_ + v]; }
  const Edge& g(int u, int v) const { return g_[u * stride_ + v]; }

  int n_;
  int n_x_ = 0;
  int stride_;
  int stamp_ = 0;
  std::vector<Edge> g_;
  std::vector<long long> lab_;
  std::vector<int> match_, slack_, st_, pa_, s_, vis_;
  std::vector<int> flo_from_;  // (2n+1) x (n+1)
  std::vector<std::vector<int>> flo_;
  std::vector<int> queue_;
  std::size_t head_ = 0;
};

}  // namespace saqd
