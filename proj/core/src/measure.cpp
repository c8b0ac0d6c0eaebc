#include "spr/measure.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace spr {

Complex entry(int q, Index j, std::size_t n, double phi) {
  if (j < 1 || j > n) throw std::out_of_range("entry: left index " + std::to_string(j) + " out of range");
  const double a = unit_angle(j, n);
  switch (q) {
    case 1:
      return {std::cos(a), 0.0};
    case 2:
      return {0.0, std::sin(a)};
    case 3:
      return std::polar(1.0, a);
    case 4:
      return {1.0, 0.0};
    case 5:
      return std::polar(1.0, phi);
    default:
      throw std::out_of_range("entry: row family must be in [1, 5]");
  }
}

MeasurementEnsemble::MeasurementEnsemble(const EnsembleConfig& cfg)
    : cfg_(cfg), schedule_(build_schedule(cfg)), phases_(cfg.seed) {
  graphs_.reserve(schedule_.phase_count());
  for (std::size_t p = 0; p < schedule_.phase_count(); ++p) {
    auto rng = phase_rng(cfg.seed, p);
    graphs_.push_back(build_graph(cfg.n, schedule_.right_counts[p], schedule_.edge_probs[p], rng));
  }
}

std::size_t IntensityBundle::measurement_count() const noexcept {
  std::size_t m = 0;
  for (const auto& p : phases) m += kRowsPerNode * p.size();
  return m;
}

namespace {

struct RowSums {
  std::array<Complex, kRowsPerNode> v{};

  void add(Complex x, Index j, std::size_t n, double phi) {
    const double a = unit_angle(j, n);
    const double c = std::cos(a), s = std::sin(a);
    v[0] += x * c;
    v[1] += x * Complex(0.0, s);
    v[2] += x * Complex(c, s);
    v[3] += x;
    v[4] += x * std::polar(1.0, phi);
  }
  Intensities magnitudes() const {
    Intensities b{};
    for (std::size_t q = 0; q < kRowsPerNode; ++q) b[q] = std::abs(v[q]);
    return b;
  }
};

}  // namespace

IntensityBundle encode(const MeasurementEnsemble& ens, const SparseSignal& x) {
  if (x.n() != ens.n()) {
    throw std::invalid_argument("encode: signal length " + std::to_string(x.n()) +
                                " does not match ensemble length " + std::to_string(ens.n()));
  }
  const std::size_t n = ens.n();
  IntensityBundle out;
  out.phases.reserve(ens.phase_count());
  std::vector<RowSums> sums;
  for (std::size_t p = 0; p < ens.phase_count(); ++p) {
    const auto& g = ens.graph(p);
    sums.assign(g.n_right(), RowSums{});
    for (const auto& e : x.entries()) {
      for (std::uint32_t i : g.column(e.index)) sums[i].add(e.value, e.index, n, ens.phi(p, i, e.index));
    }
    auto& rows = out.phases.emplace_back(g.n_right());
    std::transform(sums.begin(), sums.end(), rows.begin(), [](const RowSums& s) { return s.magnitudes(); });
  }
  return out;
}

Intensities encode_node(std::span<const Index> row, const SparseSignal& x, const PhaseLookup& phi) {
  RowSums s;
  for (Index j : row) {
    if (auto v = x.value_at(j)) s.add(*v, j, x.n(), phi(j));
  }
  return s.magnitudes();
}

}  // namespace spr
