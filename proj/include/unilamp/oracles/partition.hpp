#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/hadamard.hpp"

namespace unilamp {

/// Set partition π of [k], stored as a restricted-growth string (1-based labels).
class Partition {
 public:
  static Partition from_rgs(std::vector<int> rgs) {
    require(!rgs.empty(), ErrorKind::invalid_input, "Partition: empty restricted-growth string");
    require(rgs[0] == 1, ErrorKind::invalid_input, "Partition: rgs must start with 1");
    int top = 1;
    for (std::size_t i = 1; i < rgs.size(); ++i) {
      require(rgs[i] >= 1 && rgs[i] <= top + 1, ErrorKind::invalid_input,
              "Partition: rgs entry " + std::to_string(i + 1) + " breaks restricted growth");
      top = std::max(top, rgs[i]);
    }
    Partition p;
    p.rgs_ = std::move(rgs);
    p.size_ = top;
    return p;
  }

  static Partition singletons(std::size_t k) {
    std::vector<int> rgs(k);
    for (std::size_t i = 0; i < k; ++i) rgs[i] = static_cast<int>(i) + 1;
    return from_rgs(std::move(rgs));
  }

  /// Builds π from blocks of 1-based elements; block order is normalised.
  static Partition from_blocks(std::size_t k, const std::vector<std::vector<std::size_t>>& blocks) {
    std::vector<int> owner(k, 0);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (std::size_t e : blocks[b]) {
        require(e >= 1 && e <= k, ErrorKind::invalid_input, "Partition: element out of range");
        require(owner[e - 1] == 0, ErrorKind::invalid_input, "Partition: blocks overlap");
        owner[e - 1] = static_cast<int>(b) + 1;
      }
    std::vector<int> relabel(blocks.size() + 1, 0);
    std::vector<int> rgs(k);
    int next = 0;
    for (std::size_t i = 0; i < k; ++i) {
      require(owner[i] != 0, ErrorKind::invalid_input, "Partition: blocks do not cover [k]");
      if (relabel[static_cast<std::size_t>(owner[i])] == 0) relabel[static_cast<std::size_t>(owner[i])] = ++next;
      rgs[i] = relabel[static_cast<std::size_t>(owner[i])];
    }
    return from_rgs(std::move(rgs));
  }

  std::size_t k() const noexcept { return rgs_.size(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(size_); }
  const std::vector<int>& rgs() const noexcept { return rgs_; }

  /// π(s): 0-based block index of the 1-based element s.
  std::size_t block_of(std::size_t s) const { return static_cast<std::size_t>(rgs_.at(s - 1) - 1); }

  std::vector<std::vector<std::size_t>> blocks() const {
    std::vector<std::vector<std::size_t>> out(size());
    for (std::size_t i = 0; i < rgs_.size(); ++i) out[static_cast<std::size_t>(rgs_[i] - 1)].push_back(i + 1);
    return out;
  }

  bool operator==(const Partition& other) const { return rgs_ == other.rgs_; }

 private:
  Partition() = default;
  std::vector<int> rgs_;
  int size_ = 0;
};

inline constexpr std::size_t max_partition_k = 8;

/// All set partitions of [k] in lexicographic rgs order.
inline std::vector<Partition> enumerate_partitions(std::size_t k) {
  require(k >= 1, ErrorKind::invalid_input, "enumerate_partitions: k must be >= 1");
  require(k <= max_partition_k, ErrorKind::size_limit,
          "enumerate_partitions: k=" + std::to_string(k) + " exceeds " + std::to_string(max_partition_k));
  std::vector<Partition> out;
  std::vector<int> rgs(k, 1);
  std::vector<int> prefix_max(k, 1);
  while (true) {
    out.push_back(Partition::from_rgs(rgs));
    std::size_t i = k - 1;
    while (i > 0 && rgs[i] > prefix_max[i - 1]) --i;
    if (i == 0) break;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < k; ++j) {
      rgs[j] = 1;
      prefix_max[j] = prefix_max[i];
    }
  }
  return out;
}

/// Undirected graph on [k] with non-negative integer edge weights.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t k) : w_(Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))) {
    require(k >= 1, ErrorKind::invalid_input, "WeightedGraph: k must be >= 1");
  }

  static WeightedGraph from_matrix(const Eigen::MatrixXi& w) {
    require(w.rows() == w.cols() && w.rows() >= 1, ErrorKind::invalid_input, "WeightedGraph: matrix must be square");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      require(w(i, i) == 0, ErrorKind::invalid_input, "WeightedGraph: diagonal must be zero");
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        require(w(i, j) >= 0, ErrorKind::invalid_input, "WeightedGraph: weights must be non-negative");
        require(w(i, j) == w(j, i), ErrorKind::invalid_input, "WeightedGraph: matrix must be symmetric");
      }
    }
    WeightedGraph g(static_cast<std::size_t>(w.rows()));
    g.w_ = w;
    return g;
  }

  /// Path 1 − 2 − ⋯ − k with unit weights.
  static WeightedGraph line(std::size_t k) {
    WeightedGraph g(k);
    for (std::size_t i = 1; i < k; ++i) g.set(i, i + 1, 1);
    return g;
  }

  /// Sets w_ij = w_ji (1-based, i ≠ j).
  void set(std::size_t i, std::size_t j, int weight) {
    require(i >= 1 && j >= 1 && i <= k() && j <= k() && i != j, ErrorKind::invalid_input, "WeightedGraph::set: bad edge");
    require(weight >= 0, ErrorKind::invalid_input, "WeightedGraph::set: negative weight");
    w_(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = weight;
    w_(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(i - 1)) = weight;
  }

  std::size_t k() const noexcept { return static_cast<std::size_t>(w_.rows()); }
  int operator()(std::size_t i, std::size_t j) const {
    return w_(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  }
  const Eigen::MatrixXi& matrix() const noexcept { return w_; }

  /// d_i(w) = Σ_j w_ij.
  int degree(std::size_t i) const { return w_.row(static_cast<Eigen::Index>(i - 1)).sum(); }
  /// ‖w‖ = Σ_{i<j} w_ij.
  int norm() const { return w_.sum() / 2; }

 private:
  Eigen::MatrixXi w_;
};

/// W_st(w, π): total weight between blocks s and t (s = t counts intra-block edges).
inline Eigen::MatrixXi wst(const WeightedGraph& w, const Partition& pi) {
  require(w.k() == pi.k(), ErrorKind::invalid_dimension, "wst: graph and partition disagree on k");
  const auto r = static_cast<Eigen::Index>(pi.size());
  Eigen::MatrixXi out = Eigen::MatrixXi::Zero(r, r);
  for (std::size_t i = 1; i <= w.k(); ++i)
    for (std::size_t j = i + 1; j <= w.k(); ++j) {
      const int weight = w(i, j);
      if (weight == 0) continue;
      const auto s = static_cast<Eigen::Index>(pi.block_of(i));
      const auto t = static_cast<Eigen::Index>(pi.block_of(j));
      out(s, t) += weight;
      if (s != t) out(t, s) += weight;
    }
  return out;
}

inline bool is_disassortative(const WeightedGraph& w, const Partition& pi) {
  const auto big_w = wst(w, pi);
  for (Eigen::Index s = 0; s < big_w.rows(); ++s)
    if (big_w(s, s) != 0) return false;
  return true;
}

/// A labelling a ∈ Cset(π): constant exactly on the blocks of π (1-based values in [1..m]).
class Labelling {
 public:
  Labelling(const Partition& pi, std::vector<std::size_t> a, std::size_t m) : a_(std::move(a)) {
    require(a_.size() == pi.k(), ErrorKind::invalid_dimension, "Labelling: length must equal k");
    for (std::size_t s = 0; s < a_.size(); ++s) {
      require(a_[s] >= 1 && a_[s] <= m, ErrorKind::out_of_range, "Labelling: value outside [1..m]");
      for (std::size_t t = 0; t < a_.size(); ++t)
        require((a_[s] == a_[t]) == (pi.block_of(s + 1) == pi.block_of(t + 1)), ErrorKind::invalid_input,
                "Labelling: not constant exactly on the blocks of the partition");
    }
    block_values_.assign(pi.size(), 0);
    for (std::size_t s = 0; s < a_.size(); ++s) block_values_[pi.block_of(s + 1)] = a_[s];
  }

  /// a with a_s = values[π(s)]; values must be distinct.
  static Labelling from_block_values(const Partition& pi, const std::vector<std::size_t>& values, std::size_t m) {
    require(values.size() == pi.size(), ErrorKind::invalid_dimension, "Labelling: one value per block required");
    std::vector<std::size_t> a(pi.k());
    for (std::size_t s = 1; s <= pi.k(); ++s) a[s - 1] = values[pi.block_of(s)];
    return Labelling(pi, std::move(a), m);
  }

  const std::vector<std::size_t>& values() const noexcept { return a_; }
  /// a_{V_s} for each block s.
  const std::vector<std::size_t>& block_values() const noexcept { return block_values_; }

 private:
  std::vector<std::size_t> a_;
  std::vector<std::size_t> block_values_;
};

/// True iff no two distinct weighted block pairs (s<t) share a_{V_s} ⊕ a_{V_t}.
inline bool is_conflict_free(const std::vector<std::size_t>& block_values, const Eigen::MatrixXi& big_w, std::size_t m) {
  std::vector<std::size_t> seen;
  seen.reserve(static_cast<std::size_t>(big_w.size()));
  for (Eigen::Index s = 0; s < big_w.rows(); ++s)
    for (Eigen::Index t = s + 1; t < big_w.cols(); ++t) {
      if (big_w(s, t) < 1) continue;
      const std::size_t x = xor_index(block_values[static_cast<std::size_t>(s)], block_values[static_cast<std::size_t>(t)], m);
      if (std::find(seen.begin(), seen.end(), x) != seen.end()) return false;
      seen.push_back(x);
    }
  return true;
}

inline bool is_conflict_free(const Labelling& a, const WeightedGraph& w, const Partition& pi, std::size_t m) {
  require(is_power_of_two(m), ErrorKind::invalid_dimension, "is_conflict_free: m must be a power of two");
  require(is_disassortative(w, pi), ErrorKind::invalid_input, "is_conflict_free: (w, pi) must be disassortative");
  return is_conflict_free(a.block_values(), wst(w, pi), m);
}

struct ConflictFreeCount {
  std::uint64_t conflict_free = 0;  // |L_CF|
  std::uint64_t cset = 0;           // |Cset(π)| = m(m−1)⋯(m−|π|+1)
  std::uint64_t bound = 0;          // |π|⁴ m^{|π|−1}
  bool within_bound = false;        // |Cset| − |L_CF| ≤ bound
};

inline constexpr std::size_t max_count_m = 64;
inline constexpr std::size_t max_count_blocks = 5;

/// Exhaustive count of conflict-free labellings over Cset(π).
inline ConflictFreeCount count_conflict_free(const WeightedGraph& w, const Partition& pi, std::size_t m) {
  require(m <= max_count_m && pi.size() <= max_count_blocks, ErrorKind::size_limit,
          "count_conflict_free: exhaustive count needs m <= 64 and |pi| <= 5");
  require(is_power_of_two(m), ErrorKind::invalid_dimension, "count_conflict_free: m must be a power of two");
  require(is_disassortative(w, pi), ErrorKind::invalid_input, "count_conflict_free: (w, pi) must be disassortative");
  const auto big_w = wst(w, pi);
  const std::size_t r = pi.size();
  ConflictFreeCount out;
  if (r > m) return out;
  std::vector<std::size_t> values(r, 0);
  std::vector<char> used(m + 1, 0);
  // Depth-first over injective assignments of block values.
  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == r) {
      ++out.cset;
      if (is_conflict_free(values, big_w, m)) ++out.conflict_free;
      return;
    }
    for (std::size_t v = 1; v <= m; ++v) {
      if (used[v]) continue;
      used[v] = 1;
      values[depth] = v;
      self(self, depth + 1);
      used[v] = 0;
    }
  };
  recurse(recurse, 0);
  std::uint64_t bound = static_cast<std::uint64_t>(r * r * r * r);
  for (std::size_t i = 1; i < r; ++i) bound *= m;
  out.bound = bound;
  out.within_bound = out.cset - out.conflict_free <= out.bound;
  return out;
}

}  // namespace unilamp
