#include "saqd/blossom.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace saqd {

// Vertices are numbered 1..n internally; blossoms take ids n+1..2n.
WeightedMatching::WeightedMatching(int n)
    : n_(n),
      stride_(2 * n + 1),
      g_(static_cast<std::size_t>(stride_) * stride_),
      lab_(stride_, 0),
      match_(stride_, 0),
      slack_(stride_, 0),
      st_(stride_, 0),
      pa_(stride_, 0),
      s_(stride_, 0),
      vis_(stride_, 0),
      flo_from_(static_cast<std::size_t>(stride_) * (n + 1), 0),
      flo_(stride_) {
  for (int u = 1; u <= n_; ++u)
    for (int v = 1; v <= n_; ++v) g(u, v) = {u, v, 0};
}

void WeightedMatching::set_weight(int u, int v, long long w) {
  if (u == v || u < 0 || v < 0 || u >= n_ || v >= n_ || w < 0)
    throw std::invalid_argument("bad matching edge");
  g(u + 1, v + 1).w = w;
  g(v + 1, u + 1).w = w;
}

long long WeightedMatching::e_delta(const Edge& e) const {
  return lab_[e.u] + lab_[e.v] - g(e.u, e.v).w * 2;
}

void WeightedMatching::update_slack(int u, int x) {
  if (!slack_[x] || e_delta(g(u, x)) < e_delta(g(slack_[x], x))) slack_[x] = u;
}

void WeightedMatching::set_slack(int x) {
  slack_[x] = 0;
  for (int u = 1; u <= n_; ++u)
    if (g(u, x).w > 0 && st_[u] != x && s_[st_[u]] == 0) update_slack(u, x);
}

void WeightedMatching::q_push(int x) {
  if (x <= n_) {
    queue_.push_back(x);
  } else {
    for (int y : flo_[x]) q_push(y);
  }
}

void WeightedMatching::set_st(int x, int b) {
  st_[x] = b;
  if (x > n_)
    for (int y : flo_[x]) set_st(y, b);
}

int WeightedMatching::get_pr(int b, int xr) {
  auto& f = flo_[b];
  const int pr = static_cast<int>(std::find(f.begin(), f.end(), xr) - f.begin());
  if (pr % 2 == 1) {
    std::reverse(f.begin() + 1, f.end());
    return static_cast<int>(f.size()) - pr;
  }
  return pr;
}

void WeightedMatching::set_match(int u, int v) {
  match_[u] = g(u, v).v;
  if (u <= n_) return;
  const Edge e = g(u, v);
  const int xr = flo_from_[u * (n_ + 1) + e.u];
  const int pr = get_pr(u, xr);
  for (int i = 0; i < pr; ++i) set_match(flo_[u][i], flo_[u][i ^ 1]);
  set_match(xr, v);
  std::rotate(flo_[u].begin(), flo_[u].begin() + pr, flo_[u].end());
}

void WeightedMatching::augment(int u, int v) {
  for (;;) {
    const int xnv = st_[match_[u]];
    set_match(u, v);
    if (!xnv) return;
    set_match(xnv, st_[pa_[xnv]]);
    u = st_[pa_[xnv]];
    v = xnv;
  }
}

int WeightedMatching::get_lca(int u, int v) {
  for (++stamp_; u || v; std::swap(u, v)) {
    if (u == 0) continue;
    if (vis_[u] == stamp_) return u;
    vis_[u] = stamp_;
    u = st_[match_[u]];
    if (u) u = st_[pa_[u]];
  }
  return 0;
}

void WeightedMatching::add_blossom(int u, int lca, int v) {
  int b = n_ + 1;
  while (b <= n_x_ && st_[b]) ++b;
  if (b > n_x_) ++n_x_;
  lab_[b] = 0;
  s_[b] = 0;
  match_[b] = match_[lca];
  auto& f = flo_[b];
  f.clear();
  f.push_back(lca);
  for (int x = u, y; x != lca; x = st_[pa_[y]]) {
    f.push_back(x);
    f.push_back(y = st_[match_[x]]);
    q_push(y);
  }
  std::reverse(f.begin() + 1, f.end());
  for (int x = v, y; x != lca; x = st_[pa_[y]]) {
    f.push_back(x);
    f.push_back(y = st_[match_[x]]);
    q_push(y);
  }
  set_st(b, b);
  for (int x = 1; x <= n_x_; ++x) {
    g(b, x).w = 0;
    g(x, b).w = 0;
  }
  for (int x = 1; x <= n_; ++x) flo_from_[b * (n_ + 1) + x] = 0;
  for (int xs : f) {
    for (int x = 1; x <= n_x_; ++x)
      if (g(b, x).w == 0 || e_delta(g(xs, x)) < e_delta(g(b, x))) {
        g(b, x) = g(xs, x);
        g(x, b) = g(x, xs);
      }
    for (int x = 1; x <= n_; ++x)
      if (flo_from_[xs * (n_ + 1) + x]) flo_from_[b * (n_ + 1) + x] = xs;
  }
  set_slack(b);
}

void WeightedMatching::expand_blossom(int b) {
  for (int x : flo_[b]) set_st(x, x);
  const int xr = flo_from_[b * (n_ + 1) + g(b, pa_[b]).u];
  const int pr = get_pr(b, xr);
  for (int i = 0; i < pr; i += 2) {
    const int xs = flo_[b][i], xns = flo_[b][i + 1];
    pa_[xs] = g(xns, xs).u;
    s_[xs] = 1;
    s_[xns] = 0;
    slack_[xs] = 0;
    set_slack(xns);
    q_push(xns);
  }
  s_[xr] = 1;
  pa_[xr] = pa_[b];
  for (std::size_t i = pr + 1; i < flo_[b].size(); ++i) {
    const int xs = flo_[b][i];
    s_[xs] = -1;
    set_slack(xs);
  }
  st_[b] = 0;
}

bool WeightedMatching::on_found_edge(const Edge& e) {
  const int u = st_[e.u], v = st_[e.v];
  if (s_[v] == -1) {
    pa_[v] = e.u;
    s_[v] = 1;
    const int nu = st_[match_[v]];
    slack_[v] = slack_[nu] = 0;
    s_[nu] = 0;
    q_push(nu);
  } else if (s_[v] == 0) {
    const int lca = get_lca(u, v);
    if (!lca) {
      augment(u, v);
      augment(v, u);
      return true;
    }
    add_blossom(u, lca, v);
  }
  return false;
}

bool WeightedMatching::matching() {
  std::fill(s_.begin() + 1, s_.begin() + n_x_ + 1, -1);
  std::fill(slack_.begin() + 1, slack_.begin() + n_x_ + 1, 0);
  queue_.clear();
  head_ = 0;
  for (int x = 1; x <= n_x_; ++x)
    if (st_[x] == x && !match_[x]) {
      pa_[x] = 0;
      s_[x] = 0;
      q_push(x);
    }
  if (queue_.empty()) return false;
  for (;;) {
    while (head_ < queue_.size()) {
      const int u = queue_[head_++];
      if (s_[st_[u]] == 1) continue;
      for (int v = 1; v <= n_; ++v)
        if (g(u, v).w > 0 && st_[u] != st_[v]) {
          if (e_delta(g(u, v)) == 0) {
            if (on_found_edge(g(u, v))) return true;
          } else {
            update_slack(u, st_[v]);
          }
        }
    }
    long long d = std::numeric_limits<long long>::max();
    for (int b = n_ + 1; b <= n_x_; ++b)
      if (st_[b] == b && s_[b] == 1) d = std::min(d, lab_[b] / 2);
    for (int x = 1; x <= n_x_; ++x)
      if (st_[x] == x && slack_[x]) {
        if (s_[x] == -1)
          d = std::min(d, e_delta(g(slack_[x], x)));
        else if (s_[x] == 0)
          d = std::min(d, e_delta(g(slack_[x], x)) / 2);
      }
    for (int u = 1; u <= n_; ++u) {
      if (s_[st_[u]] == 0) {
        if (lab_[u] <= d) return false;
        lab_[u] -= d;
      } else if (s_[st_[u]] == 1) {
        lab_[u] += d;
      }
    }
    for (int b = n_ + 1; b <= n_x_; ++b)
      if (st_[b] == b) {
        if (s_[st_[b]] == 0)
          lab_[b] += d * 2;
        else if (s_[st_[b]] == 1)
          lab_[b] -= d * 2;
      }
    queue_.clear();
    head_ = 0;
    for (int x = 1; x <= n_x_; ++x)
      if (st_[x] == x && slack_[x] && st_[slack_[x]] != x &&
          e_delta(g(slack_[x], x)) == 0)
        if (on_found_edge(g(slack_[x], x))) return true;
    for (int b = n_ + 1; b <= n_x_; ++b)
      if (st_[b] == b && s_[b] == 1 && lab_[b] == 0) expand_blossom(b);
  }
}

std::vector<int> WeightedMatching::solve() {
  std::fill(match_.begin(), match_.end(), 0);
  n_x_ = n_;
  for (int u = 0; u <= n_; ++u) {
    st_[u] = u;
    flo_[u].clear();
  }
  long long w_max = 0;
  for (int u = 1; u <= n_; ++u)
    for (int v = 1; v <= n_; ++v) {
      flo_from_[u * (n_ + 1) + v] = u == v ? u : 0;
      w_max = std::max(w_max, g(u, v).w);
    }
  for (int u = 1; u <= n_; ++u) lab_[u] = w_max;
  while (matching()) {
  }
  std::vector<int> mate(n_, -1);
  for (int u = 1; u <= n_; ++u)
    if (match_[u]) mate[u - 1] = match_[u] - 1;
  return mate;
}

}  // namespace saqd
