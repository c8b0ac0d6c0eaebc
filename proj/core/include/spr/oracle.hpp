#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spr/decoder.hpp"
#include "spr/measure.hpp"

namespace spr::oracle {

// Reference for cancel_out. For every unresolved neighbour j it intersects the
// circle |E + x| = b4 with |A + x cos| = b1 (or |B + i x sin| = b2 when the sine
// entry is larger) and keeps points consistent with all five measurements.
std::vector<Recovery> exhaustive_cancel_out(const Intensities& b, std::span<const Index> neighbors,
                                            const ResolvedLookup& resolved, std::size_t n,
                                            const PhaseLookup& phi, double tol = 1e-6);

// Largest |b_hat - b| / max(1, b) over all m intensities after re-encoding xhat.
double max_residual(const MeasurementEnsemble& ens, const SparseSignal& xhat, const IntensityBundle& bundle);

bool consistency_check(const MeasurementEnsemble& ens, const SparseSignal& xhat,
                       const IntensityBundle& bundle, double tol = 1e-6);

// V (1 - (1 - 1/V)^M): expected distinct coupons after M draws with replacement.
double coupon_expected_distinct(std::size_t V, std::size_t M);

// V^{1 - eta}: bound on Pr[collection needs more than eta V log V draws].
double coupon_tail_bound(std::size_t V, double eta);

}  // namespace spr::oracle
