#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "spr/ensemble.hpp"

using namespace spr;

namespace {

struct Golden {
  double r = 0, beta = 0;
  std::vector<double> f, probs;
  std::vector<std::size_t> counts;
};

Golden load_golden() {
  std::ifstream in(std::string(SPR_TEST_DATA_DIR) + "/schedule_k1000_c20_L3.txt");
  REQUIRE(in.good());
  Golden g;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "r") ss >> g.r;
    if (key == "beta") ss >> g.beta;
    for (double v; key == "f" && ss >> v;) g.f.push_back(v);
    for (double v; key == "edge_probs" && ss >> v;) g.probs.push_back(v);
    for (std::size_t v; key == "right_counts" && ss >> v;) g.counts.push_back(v);
  }
  return g;
}

// Plain bisection on beta + e^{-beta r} - 1, independent of solve_beta's bracketing.
double bisect_beta(double r) {
  double lo = 1e-6, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid + std::exp(-mid * r) - 1.0 < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("singleton and doubleton probabilities") {
  CHECK(singleton_prob() == doctest::Approx(0.367879441171).epsilon(1e-12));
  CHECK(singleton_prob(1) == 1.0);
  CHECK(singleton_prob(1000) == doctest::Approx(0.3680634882592229).epsilon(1e-12));
  CHECK(doubleton_prob() == doctest::Approx(0.183939720586).epsilon(1e-12));
  CHECK(doubleton_prob(2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(doubleton_prob(100000000) == doctest::Approx(doubleton_prob()).epsilon(1e-7));
  CHECK_THROWS_AS(singleton_prob(0), std::domain_error);
}

TEST_CASE("multiton probability") {
  CHECK(multiton_prob(1.0) == 0.0);
  CHECK(multiton_prob(0.5) == doctest::Approx(0.23254415793482963).epsilon(1e-12));
  CHECK(multiton_prob(1e-3) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(multiton_prob(0.0), std::domain_error);
  CHECK_THROWS_AS(multiton_prob(1.5), std::domain_error);
  CHECK_THROWS_AS(multiton_prob(-0.1), std::domain_error);
}

TEST_CASE("solve_beta") {
  CHECK(solve_beta(2.0) == doctest::Approx(0.79681213002002).epsilon(1e-10));
  CHECK(solve_beta(10.0) == doctest::Approx(0.9999545794446533).epsilon(1e-10));
  CHECK(solve_beta(1.0001) < 1e-3);
  CHECK(solve_beta(1.0001) > 0.0);
  CHECK_THROWS_AS(solve_beta(1.0), std::domain_error);
  CHECK_THROWS_AS(solve_beta(0.5), std::domain_error);

  SUBCASE("fixed-point residual and agreement with plain bisection") {
    for (double r = 1.05; r < 40.0; r *= 1.17) {
      const double beta = solve_beta(r);
      CHECK(std::abs(beta + std::exp(-beta * r) - 1.0) <= 1e-12);
      CHECK(beta == doctest::Approx(bisect_beta(r)).epsilon(1e-9));
    }
  }
}

TEST_CASE("default stage count") {
  CHECK(default_stage_count(1) == 0);
  CHECK(default_stage_count(2) == 0);
  CHECK(default_stage_count(4) == 1);
  CHECK(default_stage_count(16) == 2);
  CHECK(default_stage_count(512) == 4);   // log2 9 = 3.17
  CHECK(default_stage_count(65536) == 4);
  CHECK(default_stage_count(65537) == 5);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(validate({100, 0, 5.0, 1, 0}), ConfigError);
  CHECK_THROWS_AS(validate({100, 101, 5.0, 1, 0}), ConfigError);
  CHECK_THROWS_AS(validate({100, 10, 0.0, 1, 0}), ConfigError);
  // Threshold sits near c = 3.69.
  CHECK_THROWS_AS(validate({100, 10, 3.6, 1, 0}), ConfigError);
  CHECK_NOTHROW(validate({100, 10, 3.8, 1, 0}));
  CHECK_THROWS_AS(build_schedule({1000, 10, 2.0, 2, 0}), ConfigError);
}

TEST_CASE("schedule matches the independently computed golden file") {
  const Golden g = load_golden();
  const StageSchedule s = build_schedule({100000, 1000, 20.0, 3, 1});
  CHECK(implied_graph_degree(20.0) == doctest::Approx(g.r).epsilon(1e-12));
  REQUIRE(g.f.size() == 4);
  CHECK(s.f_seeding == doctest::Approx(g.f[0]).epsilon(1e-9));
  REQUIRE(s.f_stages.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) CHECK(s.f_stages[l] == doctest::Approx(g.f[l + 1]).epsilon(1e-9));
  CHECK(s.right_counts == g.counts);
  REQUIRE(s.edge_probs.size() == g.probs.size());
  for (std::size_t p = 0; p < g.probs.size(); ++p) CHECK(s.edge_probs[p] == doctest::Approx(g.probs[p]).epsilon(1e-9));
  CHECK(s.phase_count() == 5);
  CHECK(s.cleanup_phase() == 4);
  CHECK(s.measurement_count() == 5 * (20000 + 26 + 1 + 1 + 14405));
}

TEST_CASE("schedule invariants across configs") {
  for (double c : {3.8, 5.0, 6.0, 9.0, 20.0}) {
    for (std::size_t k : {1u, 2u, 7u, 64u, 1000u, 20000u}) {
      CAPTURE(c);
      CAPTURE(k);
      const auto cfg = EnsembleConfig::with_default_stages(2 * k + 10, k, c, 3);
      const StageSchedule s = build_schedule(cfg);
      CHECK(s.right_counts.front() == static_cast<std::size_t>(std::ceil(c * static_cast<double>(k) - 1e-9)));
      CHECK(s.f_seeding > 0.0);
      CHECK(s.f_seeding < 1.0);
      double prev = s.f_seeding;
      for (double f : s.f_stages) {
        CHECK(f < prev);
        // The ratio is exactly the recursion factor.
        CHECK(f / prev == doctest::Approx(std::exp(-c * multiton_prob(prev))).epsilon(1e-13));
        prev = f;
      }
      for (double p : s.edge_probs) {
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
      }
    }
  }
}

TEST_CASE("measurement count is linear in k") {
  for (double c : {4.0, 5.0, 8.0}) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t k : {100u, 1000u, 10000u}) {
      const auto s = build_schedule(EnsembleConfig::with_default_stages(16 * k, k, c, 0));
      const double ratio = static_cast<double>(s.measurement_count()) / static_cast<double>(k);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    // One constant C(c) bounds m/k for every k.
    CHECK(hi / lo < 1.2);
    CHECK(hi < 5.0 * (2.0 + 6.0) * c);
  }
}

TEST_CASE("build_graph boundary densities") {
  std::mt19937_64 rng(1);
  const auto full = build_graph(3, 2, 1.0, rng);
  REQUIRE(full.n_right() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto row = full.row(i);
    CHECK(std::vector<Index>(row.begin(), row.end()) == std::vector<Index>{1, 2, 3});
  }
  CHECK(full.column(2).size() == 2);

  const auto empty = build_graph(50, 4, 0.0, rng);
  CHECK(empty.edge_count() == 0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(empty.row(i).empty());

  CHECK_THROWS_AS(build_graph(5, 5, 1.5, rng), std::domain_error);
}

TEST_CASE("build_graph mean degree and structure") {
  std::mt19937_64 rng(2024);
  const auto g = build_graph(10000, 1000, 1e-3, rng);
  const double mean = static_cast<double>(g.edge_count()) / 1000.0;
  CHECK(mean >= 9.0);
  CHECK(mean <= 11.0);
  std::size_t via_columns = 0;
  for (Index j = 1; j <= 10000; ++j) {
    for (std::uint32_t i : g.column(j)) CHECK(g.has_edge(i, j));
    via_columns += g.column(j).size();
  }
  CHECK(via_columns == g.edge_count());
  for (std::size_t i = 0; i < g.n_right(); ++i) {
    const auto row = g.row(i);
    for (std::size_t t = 1; t < row.size(); ++t) CHECK(row[t - 1] < row[t]);
    if (!row.empty()) {
      CHECK(row.front() >= 1);
      CHECK(row.back() <= 10000);
    }
  }
}

TEST_CASE("build_graph per-edge inclusion is unbiased across positions") {
  // Geometric skipping must not favour the start or the end of a row.
  std::mt19937_64 rng(5);
  const auto g = build_graph(100, 20000, 0.05, rng);
  for (Index j : {1u, 50u, 100u}) {
    const double freq = static_cast<double>(g.column(j).size()) / 20000.0;
    CHECK(freq == doctest::Approx(0.05).epsilon(0.15));  // sd ~ 0.0015
  }
}

TEST_CASE("build_graph is reproducible from the seed") {
  auto a = phase_rng(99, 2), b = phase_rng(99, 2), c = phase_rng(99, 3);
  const auto ga = build_graph(5000, 300, 0.01, a);
  const auto gb = build_graph(5000, 300, 0.01, b);
  const auto gc = build_graph(5000, 300, 0.01, c);
  REQUIRE(ga.edge_count() == gb.edge_count());
  bool same_as_c = ga.edge_count() == gc.edge_count();
  for (std::size_t i = 0; i < ga.n_right(); ++i) {
    const auto ra = ga.row(i), rb = gb.row(i);
    CHECK(std::equal(ra.begin(), ra.end(), rb.begin(), rb.end()));
    if (same_as_c) {
      const auto rc = gc.row(i);
      same_as_c = std::equal(ra.begin(), ra.end(), rc.begin(), rc.end());
    }
  }
  CHECK_FALSE(same_as_c);
}

TEST_CASE("planted singleton fraction tracks (1 - 1/k)^(k-1)") {
  constexpr std::size_t k = 1000, n = 20000;
  std::mt19937_64 rng(17);
  const auto g = build_graph(n, 20 * k, 1.0 / k, rng);
  // Planted support: every 20th index.
  std::vector<char> support(n + 1, 0);
  for (std::size_t t = 0; t < k; ++t) support[1 + 20 * t] = 1;
  std::size_t singles = 0;
  for (std::size_t i = 0; i < g.n_right(); ++i) {
    std::size_t hits = 0;
    for (Index j : g.row(i)) hits += support[j];
    singles += hits == 1;
  }
  const double frac = static_cast<double>(singles) / static_cast<double>(g.n_right());
  CHECK(std::abs(frac - singleton_prob(k)) <= 0.01);
}

TEST_CASE("BipartiteGraph rejects malformed rows") {
  CHECK_THROWS_AS(BipartiteGraph(5, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(BipartiteGraph(5, {{3, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(BipartiteGraph(5, {{0}}), std::invalid_argument);
  CHECK_THROWS_AS(BipartiteGraph(5, {{6}}), std::invalid_argument);
  const BipartiteGraph g(5, {{1, 3}, {}, {3, 5}});
  CHECK(g.n_right() == 3);
  CHECK(g.column(3).size() == 2);
  CHECK(g.column(2).empty());
}
