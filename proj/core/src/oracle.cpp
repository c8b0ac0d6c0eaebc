#include "spr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spr::oracle {
namespace {

// Zero, one or two intersection points of two circles.
std::vector<Complex> intersect(Complex c1, double r1, Complex c2, double r2) {
  const Complex axis = c2 - c1;
  const double d = std::abs(axis);
  const double span = std::max({r1, r2, 1.0});
  if (d <= 1e-14 * span) return {};
  const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  double h2 = r1 * r1 - a * a;
  if (h2 < 0.0) {
    if (h2 < -1e-9 * span * span) return {};
    h2 = 0.0;
  }
  const Complex unit = axis / d;
  const Complex foot = c1 + a * unit;
  const Complex off = Complex(0.0, std::sqrt(h2)) * unit;
  if (h2 == 0.0) return {foot};
  return {foot + off, foot - off};
}

}  // namespace

std::vector<Recovery> exhaustive_cancel_out(const Intensities& b, std::span<const Index> neighbors,
                                            const ResolvedLookup& resolved, std::size_t n,
                                            const PhaseLookup& phi, double tol) {
  // Partial inner products of the five rows over resolved neighbours.
  Complex partial[kRowsPerNode] = {};
  std::vector<Index> unknown;
  for (Index j : neighbors) {
    if (auto x = resolved(j)) {
      for (int q = 1; q <= 5; ++q) partial[q - 1] += entry(q, j, n, q == 5 ? phi(j) : 0.0) * *x;
    } else {
      unknown.push_back(j);
    }
  }

  std::vector<Recovery> out;
  for (Index j : unknown) {
    Complex row[kRowsPerNode];
    for (int q = 1; q <= 5; ++q) row[q - 1] = entry(q, j, n, q == 5 ? phi(j) : 0.0);

    // |partial_q + row_q x| = b_q  <=>  |x + partial_q / row_q| = b_q / |row_q|.
    const int pick = std::abs(row[0]) >= std::abs(row[1]) ? 0 : 1;
    const auto points = intersect(-partial[3], b[3], -partial[pick] / row[pick], b[pick] / std::abs(row[pick]));
    for (const Complex& x : points) {
      if (std::abs(x) == 0.0) continue;
      bool ok = true;
      for (std::size_t q = 0; q < kRowsPerNode && ok; ++q) {
        ok = std::abs(std::abs(partial[q] + row[q] * x) - b[q]) <= tol * std::max(1.0, b[q]);
      }
      if (!ok) continue;
      const bool dup = std::any_of(out.begin(), out.end(), [&](const Recovery& r) {
        return r.index == j && std::abs(r.value - x) <= tol * std::max(1.0, std::abs(x));
      });
      if (!dup) out.push_back({j, x});
    }
  }
  return out;
}

double max_residual(const MeasurementEnsemble& ens, const SparseSignal& xhat, const IntensityBundle& bundle) {
  const auto again = encode(ens, xhat);
  if (again.phases.size() != bundle.phases.size()) throw std::invalid_argument("bundle shape mismatch");
  double worst = 0.0;
  for (std::size_t p = 0; p < bundle.phases.size(); ++p) {
    if (again.phases[p].size() != bundle.phases[p].size()) throw std::invalid_argument("bundle shape mismatch");
    for (std::size_t i = 0; i < bundle.phases[p].size(); ++i) {
      for (std::size_t q = 0; q < kRowsPerNode; ++q) {
        const double ref = bundle.phases[p][i][q];
        worst = std::max(worst, std::abs(again.phases[p][i][q] - ref) / std::max(1.0, ref));
      }
    }
  }
  return worst;
}

bool consistency_check(const MeasurementEnsemble& ens, const SparseSignal& xhat, const IntensityBundle& bundle,
                       double tol) {
  return max_residual(ens, xhat, bundle) <= tol;
}

double coupon_expected_distinct(std::size_t V, std::size_t M) {
  if (V == 0) throw std::domain_error("coupon_expected_distinct: V must be positive");
  if (M == 0) return 0.0;
  const double v = static_cast<double>(V);
  return -v * std::expm1(static_cast<double>(M) * std::log1p(-1.0 / v));
}

double coupon_tail_bound(std::size_t V, double eta) {
  if (V < 2 || !(eta > 0.0)) throw std::domain_error("coupon_tail_bound: need V >= 2 and eta > 0");
  return std::pow(static_cast<double>(V), 1.0 - eta);
}

}  // namespace spr::oracle
