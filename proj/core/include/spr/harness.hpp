#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spr/ensemble.hpp"
#include "spr/signal.hpp"

namespace spr {

// Support uniform without replacement, moduli uniform on [m_min, m_max],
// phases uniform on [0, 2 pi). Throws std::invalid_argument for k = 0 or k > n.
SparseSignal gen_signal(std::size_t n, std::size_t k, std::mt19937_64& rng, double m_min = 1.0,
                        double m_max = 10.0);

struct TrialOptions {
  double m_min = 1.0;
  double m_max = 10.0;
  bool check_oracle = true;
  double tolerance = 1e-6;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  double c = 0.0;
  unsigned stages = 0;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  bool success = false;
  std::int64_t decode_ns = 0;
  std::size_t n_singletons = 0;
  std::size_t n_doubletons = 0;
  std::size_t giant_size = 0;
  std::vector<std::size_t> stage_resolved;
  std::size_t cleanup_sweeps = 0;
  std::optional<double> residual;  // only with check_oracle

  // Not part of the CSV schema.
  bool matches_truth = false;  // equal_up_to_global_phase(xhat, x, tolerance)
  std::string failure;
};

// Builds ensemble + signal from trial_seed (cfg.seed is ignored), encodes, decodes
// and verifies. Only the decode call is timed.
TrialRecord run_trial(const EnsembleConfig& cfg, std::uint64_t trial_seed, const TrialOptions& opts = {});

struct ExperimentPlan {
  std::size_t n = 0;
  std::vector<std::size_t> ks;
  std::vector<double> cs;
  std::optional<unsigned> stages;  // nullopt: default_stage_count(k)
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  TrialOptions trial;
  unsigned jobs = 1;
};

struct CellSummary {
  std::size_t n = 0;
  std::size_t k = 0;
  double c = 0.0;
  unsigned stages = 0;
  std::size_t trials = 0;
  double success_rate = 0.0;
  double mean_m_over_k = 0.0;
  double median_decode_ns = 0.0;
};

std::string csv_header();
std::string to_csv_row(const TrialRecord& r);
CellSummary summarize(const std::vector<TrialRecord>& records);
std::string to_summary_line(const CellSummary& s);

// Seed of trial t in grid cell `cell`.
std::uint64_t trial_seed(std::uint64_t master, std::size_t cell, std::size_t trial) noexcept;

// Validates every cell first (throws ConfigError before any output), then writes
// the header, one row per trial in trial order, and a '#'-prefixed summary line per cell.
void run_experiment(const ExperimentPlan& plan, std::ostream& out);

}  // namespace spr
