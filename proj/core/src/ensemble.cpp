#include "spr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spr/random.hpp"

namespace spr {
namespace {

// Guards ceil() against products like 4.1 * 1000 = 4100.0000000000005.
std::size_t ceil_count(double x) {
  if (!(x > 0.0)) return 0;
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}

}  // namespace

double singleton_prob() noexcept { return std::exp(-1.0); }

double singleton_prob(std::size_t k) {
  if (k == 0) throw std::domain_error("singleton_prob: k must be positive");
  if (k == 1) return 1.0;
  const double kd = static_cast<double>(k);
  return std::exp((kd - 1.0) * std::log1p(-1.0 / kd));
}

double doubleton_prob() noexcept { return 0.5 * std::exp(-1.0); }

double doubleton_prob(std::size_t k) { return 0.5 * singleton_prob(k); }

double multiton_prob(double f_prev) {
  if (!(f_prev > 0.0 && f_prev <= 1.0)) {
    throw std::domain_error("multiton_prob: unresolved fraction must lie in (0, 1]");
  }
  return std::exp(-1.0) - std::exp(-1.0 / f_prev);
}

double solve_beta(double r) {
  if (!(r > 1.0) || !std::isfinite(r)) {
    throw std::domain_error("solve_beta: r must exceed 1 for a positive root");
  }
  // g has a trivial root at 0 and is negative just above it; expm1 keeps that
  // sign visible for tiny beta.
  auto g = [r](double beta) { return beta + std::expm1(-beta * r); };
  double lo = std::numeric_limits<double>::min();
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  const double beta = 0.5 * (lo + hi);
  if (std::abs(g(beta)) > 1e-12) {
    throw std::logic_error("solve_beta: residual above 1e-12");
  }
  return beta;
}

double implied_graph_degree(double c) noexcept {
  return 2.0 * (1.0 - std::exp(-c * singleton_prob())) * c * doubleton_prob();
}

unsigned default_stage_count(std::size_t k) noexcept {
  if (k <= 2) return 0;
  const double v = std::ceil(std::log2(std::log2(static_cast<double>(k))));
  return v > 0.0 ? static_cast<unsigned>(v) : 0u;
}

void validate(const EnsembleConfig& cfg) {
  if (cfg.n == 0) throw ConfigError("n must be positive");
  if (cfg.n >= std::numeric_limits<Index>::max()) throw ConfigError("n exceeds the index range");
  if (cfg.k < 1 || cfg.k > cfg.n) throw ConfigError("k must satisfy 1 <= k <= n");
  if (!(cfg.c > 0.0) || !std::isfinite(cfg.c)) throw ConfigError("c must be positive and finite");
  if (!(implied_graph_degree(cfg.c) > 1.0)) {
    throw ConfigError("c = " + std::to_string(cfg.c) +
                      " is below the giant-component threshold (2(1-e^{-c P_S}) c P_D <= 1)");
  }
}

std::size_t StageSchedule::total_right_nodes() const noexcept {
  return std::accumulate(right_counts.begin(), right_counts.end(), std::size_t{0});
}

StageSchedule build_schedule(const EnsembleConfig& cfg) {
  validate(cfg);
  const double k = static_cast<double>(cfg.k);
  const double recovered = 1.0 - std::exp(-cfg.c * singleton_prob());
  const double beta = solve_beta(implied_graph_degree(cfg.c));

  StageSchedule s;
  s.f_seeding = 1.0 - beta * recovered;

  s.right_counts.push_back(ceil_count(cfg.c * k));
  s.edge_probs.push_back(1.0 / k);

  double f = s.f_seeding;
  for (unsigned l = 1; l <= cfg.stages; ++l) {
    s.right_counts.push_back(ceil_count(cfg.c * f * k));
    s.edge_probs.push_back(std::min(1.0, 1.0 / (f * k)));
    f *= std::exp(-cfg.c * multiton_prob(f));
    s.f_stages.push_back(f);
  }

  // log k is clamped to 1 for k <= e^2.
  const double log_k = std::max(1.0, std::log(k));
  const double reduced = k / log_k;
  s.right_counts.push_back(ceil_count(cfg.c * reduced * std::log(reduced)));
  s.edge_probs.push_back(std::min(1.0, log_k / k));
  return s;
}

BipartiteGraph::BipartiteGraph(std::size_t n_left, const std::vector<std::vector<Index>>& rows)
    : n_left_(n_left) {
  row_offsets_.reserve(rows.size() + 1);
  row_offsets_.push_back(0);
  for (const auto& r : rows) {
    for (std::size_t t = 0; t < r.size(); ++t) {
      if (r[t] < 1 || r[t] > n_left) throw std::invalid_argument("left index out of range");
      if (t > 0 && r[t] <= r[t - 1]) throw std::invalid_argument("row not sorted/distinct");
    }
    row_indices_.insert(row_indices_.end(), r.begin(), r.end());
    row_offsets_.push_back(row_indices_.size());
  }
  build_transpose();
}

bool BipartiteGraph::has_edge(std::size_t i, Index j) const noexcept {
  const auto r = row(i);
  return std::binary_search(r.begin(), r.end(), j);
}

void BipartiteGraph::build_transpose() {
  col_offsets_.assign(n_left_ + 1, 0);
  for (Index j : row_indices_) ++col_offsets_[j];
  std::partial_sum(col_offsets_.begin(), col_offsets_.end(), col_offsets_.begin());
  col_indices_.resize(row_indices_.size());
  std::vector<std::size_t> cursor(col_offsets_.begin(), col_offsets_.end() - 1);
  for (std::size_t i = 0; i + 1 < row_offsets_.size(); ++i) {
    for (std::size_t e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e) {
      col_indices_[cursor[row_indices_[e] - 1]++] = static_cast<std::uint32_t>(i);
    }
  }
}

BipartiteGraph build_graph(std::size_t n_left, std::size_t n_right, double edge_prob,
                           std::mt19937_64& rng) {
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw std::domain_error("build_graph: edge_prob must lie in [0, 1]");
  }
  BipartiteGraph g;
  g.n_left_ = n_left;
  g.row_offsets_.reserve(n_right + 1);
  g.row_offsets_.push_back(0);
  g.row_indices_.reserve(static_cast<std::size_t>(
      1.1 * static_cast<double>(n_right) * static_cast<double>(n_left) * edge_prob + 16));

  const double log_q = std::log1p(-edge_prob);
  const double n = static_cast<double>(n_left);
  for (std::size_t i = 0; i < n_right; ++i) {
    if (edge_prob >= 1.0) {
      for (std::size_t j = 1; j <= n_left; ++j) g.row_indices_.push_back(static_cast<Index>(j));
    } else if (edge_prob > 0.0) {
      double pos = 0.0;  // zero-based candidate position
      for (;;) {
        const double u = to_unit_double(rng());
        pos += std::floor(std::log1p(-u) / log_q);
        if (pos >= n) break;
        g.row_indices_.push_back(static_cast<Index>(pos) + 1);
        pos += 1.0;
      }
    }
    g.row_offsets_.push_back(g.row_indices_.size());
  }
  g.build_transpose();
  return g;
}

std::mt19937_64 phase_rng(std::uint64_t seed, std::size_t phase) {
  return std::mt19937_64(derive_seed(seed + phase, 0x6A09E667ULL));
}

}  // namespace spr
