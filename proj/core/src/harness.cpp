#include "spr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "spr/decoder.hpp"
#include "spr/measure.hpp"
#include "spr/oracle.hpp"
#include "spr/random.hpp"

namespace spr {
namespace {

// Unbiased integer in [0, bound).
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r < limit) return r % bound;
  }
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

EnsembleConfig cell_config(const ExperimentPlan& plan, std::size_t k, double c) {
  EnsembleConfig cfg{plan.n, k, c, plan.stages.value_or(default_stage_count(k)), plan.seed};
  return cfg;
}

}  // namespace

SparseSignal gen_signal(std::size_t n, std::size_t k, std::mt19937_64& rng, double m_min, double m_max) {
  if (k == 0) throw std::invalid_argument("gen_signal: k must be at least 1");
  if (k > n) throw std::invalid_argument("gen_signal: k exceeds n");
  if (!(m_min > 0.0) || !(m_max >= m_min)) throw std::invalid_argument("gen_signal: need 0 < m_min <= m_max");

  // Floyd's sampling: k distinct indices from [1, n] in O(k).
  std::unordered_set<Index> chosen;
  chosen.reserve(2 * k);
  std::vector<Index> support;
  support.reserve(k);
  for (std::size_t top = n - k + 1; top <= n; ++top) {
    const Index t = static_cast<Index>(uniform_below(rng, top) + 1);
    const Index pick = chosen.insert(t).second ? t : static_cast<Index>(top);
    if (pick != t) chosen.insert(pick);
    support.push_back(pick);
  }
  std::sort(support.begin(), support.end());

  std::vector<SignalEntry> entries;
  entries.reserve(k);
  for (Index j : support) {
    const double mod = m_min + (m_max - m_min) * to_unit_double(rng());
    const double ph = 2.0 * std::numbers::pi * to_unit_double(rng());
    entries.push_back({j, std::polar(mod, ph)});
  }
  return SparseSignal(n, std::move(entries));
}

TrialRecord run_trial(const EnsembleConfig& cfg, std::uint64_t seed, const TrialOptions& opts) {
  EnsembleConfig trial_cfg = cfg;
  trial_cfg.seed = derive_seed(seed, 0);
  const MeasurementEnsemble ens(trial_cfg);

  std::mt19937_64 rng(derive_seed(seed, 1));
  const SparseSignal x = gen_signal(cfg.n, cfg.k, rng, opts.m_min, opts.m_max);
  const IntensityBundle bundle = encode(ens, x);

  const auto t0 = std::chrono::steady_clock::now();
  const RecoveryResult result = decode(ens, bundle, cfg.k);
  const auto t1 = std::chrono::steady_clock::now();

  TrialRecord r;
  r.n = cfg.n;
  r.k = cfg.k;
  r.c = cfg.c;
  r.stages = cfg.stages;
  r.seed = seed;
  r.m = ens.measurement_count();
  r.success = result.success;
  r.decode_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  r.n_singletons = result.stats.singletons;
  r.n_doubletons = result.stats.doubletons;
  r.giant_size = result.stats.giant_size;
  r.stage_resolved = result.stats.stage_resolved;
  r.cleanup_sweeps = result.stats.cleanup_sweeps;
  r.matches_truth = equal_up_to_global_phase(result.estimate, x, opts.tolerance);
  if (opts.check_oracle) r.residual = oracle::max_residual(ens, result.estimate, bundle);
  r.failure = result.failure;
  return r;
}

std::string csv_header() {
  return "trial,n,k,c,L,seed,m,success,decode_ns,n_singletons,n_doubletons,giant_size,"
         "stage_resolved,cleanup_sweeps,residual";
}

std::string to_csv_row(const TrialRecord& r) {
  std::string stages;
  for (std::size_t t = 0; t < r.stage_resolved.size(); ++t) {
    if (t) stages += ';';
    stages += std::to_string(r.stage_resolved[t]);
  }
  std::string row;
  row += std::to_string(r.trial) + ',' + std::to_string(r.n) + ',' + std::to_string(r.k) + ',';
  row += format_double("%g", r.c) + ',' + std::to_string(r.stages) + ',' + std::to_string(r.seed) + ',';
  row += std::to_string(r.m) + ',' + (r.success ? "1" : "0") + ',' + std::to_string(r.decode_ns) + ',';
  row += std::to_string(r.n_singletons) + ',' + std::to_string(r.n_doubletons) + ',' +
         std::to_string(r.giant_size) + ',';
  row += stages + ',' + std::to_string(r.cleanup_sweeps) + ',';
  if (r.residual) row += format_double("%.3e", *r.residual);
  return row;
}

CellSummary summarize(const std::vector<TrialRecord>& records) {
  CellSummary s;
  if (records.empty()) return s;
  s.n = records.front().n;
  s.k = records.front().k;
  s.c = records.front().c;
  s.stages = records.front().stages;
  s.trials = records.size();
  std::vector<double> times;
  double ratio = 0.0;
  std::size_t ok = 0;
  for (const auto& r : records) {
    ok += r.success ? 1 : 0;
    ratio += static_cast<double>(r.m) / static_cast<double>(r.k);
    times.push_back(static_cast<double>(r.decode_ns));
  }
  s.success_rate = static_cast<double>(ok) / static_cast<double>(records.size());
  s.mean_m_over_k = ratio / static_cast<double>(records.size());
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  s.median_decode_ns = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
  return s;
}

std::string to_summary_line(const CellSummary& s) {
  return "# summary,n=" + std::to_string(s.n) + ",k=" + std::to_string(s.k) + ",c=" + format_double("%g", s.c) +
         ",L=" + std::to_string(s.stages) + ",trials=" + std::to_string(s.trials) +
         ",success_rate=" + format_double("%.4f", s.success_rate) +
         ",mean_m_over_k=" + format_double("%.4f", s.mean_m_over_k) +
         ",median_decode_ns=" + format_double("%.0f", s.median_decode_ns);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t cell, std::size_t trial) noexcept {
  return derive_seed(master, (static_cast<std::uint64_t>(cell) << 32) | trial);
}

void run_experiment(const ExperimentPlan& plan, std::ostream& out) {
  for (std::size_t k : plan.ks) {
    for (double c : plan.cs) validate(cell_config(plan, k, c));
  }

  out << csv_header() << '\n';
  std::size_t cell = 0;
  for (std::size_t k : plan.ks) {
    for (double c : plan.cs) {
      const EnsembleConfig cfg = cell_config(plan, k, c);
      std::vector<TrialRecord> records(plan.trials);
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t t = next++; t < plan.trials; t = next++) {
          records[t] = run_trial(cfg, trial_seed(plan.seed, cell, t), plan.trial);
          records[t].trial = t;
        }
      };
      const unsigned jobs = std::max(1u, std::min<unsigned>(plan.jobs, static_cast<unsigned>(plan.trials)));
      if (jobs == 1) {
        worker();
      } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
      }
      for (const auto& r : records) out << to_csv_row(r) << '\n';
      out << to_summary_line(summarize(records)) << '\n';
      ++cell;
    }
  }
  out.flush();
}

}  // namespace spr
