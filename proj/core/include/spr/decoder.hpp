#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "spr/measure.hpp"
#include "spr/signal.hpp"

namespace spr {

struct Tolerances {
  double integer = 1e-6;      // distance of a location estimate from an integer
  double verify = 1e-8;       // relative, scaled by max(1, b)
  double cosine = 1e-6;       // |cos| overshoot tolerated before clamping
  double phase = 1e-6;        // cycle consistency in the implied graph (radians)
  double degenerate = 1e-12;  // relative size of a vanishing quadratic
};

// ---- seeding primitives -----------------------------------------------------

struct SingletonCandidate {
  Index index;
  double magnitude;
};

// Location from atan2(b2, b1) / (pi / 2n). The candidate is tentative.
std::optional<SingletonCandidate> try_singleton(const Intensities& b, std::size_t n,
                                                const Tolerances& tol = {});

// A true singleton has b5 = |x_j| exactly.
bool verify_singleton(const SingletonCandidate& candidate, double b5, const Tolerances& tol = {});

// Unsigned relative phase in [0, pi] from the law of cosines on b4.
// Returns nothing when the cosine overshoots [-1, 1] by more than tol.cosine.
std::optional<double> doubleton_relative_phase(double mag_u, double mag_v, double b4,
                                               const Tolerances& tol = {});

// Picks the sign of theta (= theta_v - theta_u) whose prediction matches b5.
std::optional<double> resolve_doubleton_sign(Index u, Index v, double mag_u, double mag_v,
                                             double theta, double phi_u, double phi_v, double b5,
                                             const Tolerances& tol = {});

struct PhaseEdge {
  Index u;
  Index v;
  double delta;  // theta_v - theta_u
};

struct GiantComponent {
  std::vector<Index> members;  // ascending
  std::unordered_map<Index, double> phases;
  std::size_t inconsistent_edges = 0;

  bool consistent() const noexcept { return inconsistent_edges == 0; }
};

// Largest connected component of the implied graph. The BFS root gets phase 0 and
// every tree edge propagates parent + delta; non-tree edges inside the component
// are checked against the assignment.
GiantComponent giant_component(std::span<const Index> nodes, std::span<const PhaseEdge> edges,
                               const Tolerances& tol = {});

// ---- cancelling out ---------------------------------------------------------

// Running sums of resolved contributions inside one right node.
struct ResolvedSums {
  Complex cosine{};  // A
  Complex sine{};    // B
  Complex ones{};    // sum of x
  Complex random{};  // D
  std::size_t count = 0;

  void add(Complex x, Index j, std::size_t n, double phi);
  Complex unit_phase() const noexcept { return cosine + sine; }  // C = A + B
};

struct Recovery {
  Index index;
  Complex value;
};

enum class CancelOutcome {
  kResolved,
  kNoResolvedNeighbor,
  kExhausted,   // measurements already explained by resolved neighbours
  kDegenerate,  // vanishing quadratic, b2 = 0, or BM - A = 0
  kRejected,    // no candidate (or more than one) survived verification
};

struct CancelOutAttempt {
  CancelOutcome outcome = CancelOutcome::kRejected;
  std::optional<Recovery> recovery;
};

using Admissible = std::function<bool(Index)>;

// Solves for the single unresolved neighbour given the resolved sums. `admissible`
// filters candidate locations (must be an unresolved member of the right node).
CancelOutAttempt cancel_out(const Intensities& b, const ResolvedSums& sums, std::size_t n,
                            const Admissible& admissible, const PhaseLookup& phi,
                            const Tolerances& tol = {});

using ResolvedLookup = std::function<std::optional<Complex>(Index)>;

// Convenience form: sums are built from `neighbors` (the right node's adjacency list)
// and the currently resolved values.
std::optional<Recovery> cancel_out(const Intensities& b, std::span<const Index> neighbors,
                                   const ResolvedLookup& resolved, std::size_t n,
                                   const PhaseLookup& phi, const Tolerances& tol = {});

// ---- full decoder -----------------------------------------------------------

struct DecodeStats {
  std::size_t singletons = 0;  // verified singleton right nodes
  std::size_t magnitudes = 0;  // distinct magnitudes recovered in seeding
  std::size_t doubletons = 0;  // verified resolvable doubletons (edges of H)
  std::size_t giant_size = 0;
  std::vector<std::size_t> stage_resolved;
  std::size_t cleanup_resolved = 0;
  std::size_t cleanup_sweeps = 0;
  std::size_t cancel_attempts = 0;
  std::size_t cancel_failures = 0;
  std::size_t degenerate = 0;
  std::int64_t decode_ns = 0;
};

struct NeighborList {
  std::array<Index, 2> items{};
  std::uint8_t size = 0;  // saturates at 3: the node is no longer a doubleton candidate
};

struct DecoderState {
  std::unordered_map<Index, double> magnitudes;
  std::unordered_map<Index, double> phases;
  std::unordered_map<Index, Complex> resolved;
  std::vector<Index> resolution_order;
  std::vector<NeighborList> neighbor_lists;
  std::vector<std::size_t> doubleton_list;
  std::vector<PhaseEdge> h_edges;
  DecodeStats stats;
  std::string failure;
  Tolerances tol;

  bool failed() const noexcept { return !failure.empty(); }
};

void run_seeding(const MeasurementEnsemble& ens, const IntensityBundle& bundle, DecoderState& state);

// One sweep over geometric-decay stage `stage` (1-based).
void run_stage(const MeasurementEnsemble& ens, const IntensityBundle& bundle, std::size_t stage,
               std::size_t k, DecoderState& state);

// Sweeps cleanup right nodes until no progress or k components are resolved.
void run_cleanup(const MeasurementEnsemble& ens, const IntensityBundle& bundle, std::size_t k,
                 DecoderState& state);

struct RecoveryResult {
  SparseSignal estimate;
  bool success = false;
  DecodeStats stats;
  std::string failure;
};

// Never throws on under-resolution; success means k components were mutually resolved.
RecoveryResult decode(const MeasurementEnsemble& ens, const IntensityBundle& bundle, std::size_t k,
                      const Tolerances& tol = {});

// Same support and max_j |xhat_j - x_j e^{-i Theta*}| <= tol with
// Theta* = arg(sum conj(xhat_j) x_j).
bool equal_up_to_global_phase(const SparseSignal& xhat, const SparseSignal& x, double tol);

}  // namespace spr
