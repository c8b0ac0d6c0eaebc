#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spr/signal.hpp"

namespace spr {

// Asymptotic probability that a seeding right node is a singleton.
double singleton_prob() noexcept;
// (1 - 1/k)^(k-1); exact for k planted non-zeros at edge probability 1/k.
double singleton_prob(std::size_t k);

double doubleton_prob() noexcept;
double doubleton_prob(std::size_t k);

// Probability that a stage right node is a resolvable multiton when a fraction
// f_prev of non-zeros is still unresolved: e^{-1} - e^{-1/f_prev}.
// Throws std::domain_error unless 0 < f_prev <= 1 (f_prev = 1 gives 0).
double multiton_prob(double f_prev);

// Unique root in (0,1) of beta + exp(-beta r) = 1. Throws std::domain_error for r <= 1.
double solve_beta(double r);

// Mean degree of the implied doubleton graph over recovered magnitudes.
double implied_graph_degree(double c) noexcept;

// ceil(log2(log2(k))), clamped at 0.
unsigned default_stage_count(std::size_t k) noexcept;

struct EnsembleConfig {
  std::size_t n = 0;
  std::size_t k = 0;
  double c = 0.0;
  unsigned stages = 0;
  std::uint64_t seed = 0;

  static EnsembleConfig with_default_stages(std::size_t n, std::size_t k, double c,
                                            std::uint64_t seed) {
    return {n, k, c, default_stage_count(k), seed};
  }
};

// Throws ConfigError when an invariant of the config fails, including the
// giant-component condition implied_graph_degree(c) > 1.
void validate(const EnsembleConfig& cfg);

// Phase p: 0 = seeding, 1..L = geometric-decay stages, L+1 = cleanup.
struct StageSchedule {
  double f_seeding = 0.0;          // expected unresolved fraction after seeding
  std::vector<double> f_stages;    // after each geometric-decay stage
  std::vector<std::size_t> right_counts;
  std::vector<double> edge_probs;

  std::size_t phase_count() const noexcept { return right_counts.size(); }
  std::size_t stage_count() const noexcept { return f_stages.size(); }
  std::size_t cleanup_phase() const noexcept { return right_counts.size() - 1; }
  std::size_t total_right_nodes() const noexcept;
  // Five intensity measurements per right node.
  std::size_t measurement_count() const noexcept { return 5 * total_right_nodes(); }
};

StageSchedule build_schedule(const EnsembleConfig& cfg);

// Immutable bipartite graph. Rows are right nodes, each a sorted list of distinct
// one-based left indices. The transpose (left -> right nodes) is kept alongside.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  // Throws std::invalid_argument if a row is unsorted, has duplicates, or leaves [1, n_left].
  BipartiteGraph(std::size_t n_left, const std::vector<std::vector<Index>>& rows);

  std::size_t n_left() const noexcept { return n_left_; }
  std::size_t n_right() const noexcept { return row_offsets_.empty() ? 0 : row_offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return row_indices_.size(); }

  std::span<const Index> row(std::size_t i) const noexcept {
    return {row_indices_.data() + row_offsets_[i], row_indices_.data() + row_offsets_[i + 1]};
  }
  // Right nodes adjacent to left node j (one-based), ascending.
  std::span<const std::uint32_t> column(Index j) const noexcept {
    return {col_indices_.data() + col_offsets_[j - 1], col_indices_.data() + col_offsets_[j]};
  }
  bool has_edge(std::size_t i, Index j) const noexcept;

 private:
  friend BipartiteGraph build_graph(std::size_t, std::size_t, double, std::mt19937_64&);
  void build_transpose();

  std::size_t n_left_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<Index> row_indices_;
  std::vector<std::size_t> col_offsets_;
  std::vector<std::uint32_t> col_indices_;
};

// Each (right, left) pair is kept independently with probability edge_prob.
// Uses geometric gap sampling, so the cost is proportional to the edge count.
BipartiteGraph build_graph(std::size_t n_left, std::size_t n_right, double edge_prob,
                           std::mt19937_64& rng);

// Deterministic per-phase generator: seed + phase index.
std::mt19937_64 phase_rng(std::uint64_t seed, std::size_t phase);

}  // namespace spr
