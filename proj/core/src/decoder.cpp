#include "spr/decoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace spr {
namespace {

constexpr Complex kI{0.0, 1.0};

bool matches(double predicted, double measured, const Tolerances& tol) {
  return std::abs(predicted - measured) <= tol.verify * std::max(1.0, measured);
}

bool close_values(Complex a, Complex b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

// Predicted intensities of a node holding exactly x_u = mag_u and x_v = mag_v e^{i delta}.
bool doubleton_consistent(const Intensities& b, std::size_t n, Index u, Index v, double mag_u,
                          double mag_v, double delta, double phi_u, double phi_v, const Tolerances& tol) {
  const Complex xu{mag_u, 0.0};
  const Complex xv = std::polar(mag_v, delta);
  const double au = unit_angle(u, n), av = unit_angle(v, n);
  const double pred[kRowsPerNode] = {
      std::abs(xu * std::cos(au) + xv * std::cos(av)),
      std::abs(xu * std::sin(au) + xv * std::sin(av)),
      std::abs(xu * std::polar(1.0, au) + xv * std::polar(1.0, av)),
      std::abs(xu + xv),
      std::abs(xu * std::polar(1.0, phi_u) + xv * std::polar(1.0, phi_v)),
  };
  for (std::size_t q = 0; q < kRowsPerNode; ++q) {
    if (!matches(pred[q], b[q], tol)) return false;
  }
  return true;
}

// Shared sign policy: a unique match wins; a double match is accepted only when the
// two signs coincide (sin theta ~ 0).
template <class Check>
std::optional<double> pick_sign(double theta, Check&& check) {
  const bool plus = check(theta);
  const bool minus = check(-theta);
  if (plus && minus) {
    if (std::abs(std::sin(theta)) <= 1e-9) return theta;
    return std::nullopt;
  }
  if (plus) return theta;
  if (minus) return -theta;
  return std::nullopt;
}

template <class AdmissibleFn, class PhiFn>
CancelOutAttempt cancel_out_impl(const Intensities& b, const ResolvedSums& sums, std::size_t n,
                                 AdmissibleFn&& admissible, PhiFn&& phi, const Tolerances& tol) {
  if (sums.count == 0) return {CancelOutcome::kNoResolvedNeighbor, std::nullopt};

  const Complex A = sums.cosine;
  const Complex B = sums.sine;
  const Complex C = sums.unit_phase();
  const Complex E = sums.ones;
  const Complex D = sums.random;
  const double b1 = b[0], b2 = b[1], b3 = b[2];

  if (matches(std::abs(A), b1, tol) && matches(std::abs(B), b2, tol) && matches(std::abs(C), b3, tol) &&
      matches(std::abs(E), b[3], tol) && matches(std::abs(D), b[4], tol)) {
    return {CancelOutcome::kExhausted, std::nullopt};
  }

  const double scale = std::max({b1, b2, std::abs(A), std::abs(B)});
  const double scale4 = scale * scale * scale * scale;
  if (b2 <= tol.degenerate * scale) return {CancelOutcome::kDegenerate, std::nullopt};

  // U = A + x cos(a), V = B + i x sin(a), U + V has modulus b3; psi = arg(U / V).
  double cos_psi = 1.0, sin_psi = 0.0;
  if (b1 > tol.degenerate * scale) {
    cos_psi = (b3 * b3 - b1 * b1 - b2 * b2) / (2.0 * b1 * b2);
    if (std::abs(cos_psi) > 1.0 + tol.cosine) return {CancelOutcome::kRejected, std::nullopt};
    cos_psi = std::clamp(cos_psi, -1.0, 1.0);
    sin_psi = std::sqrt(std::max(0.0, 1.0 - cos_psi * cos_psi));
  }

  const double P = b2 * b2 - std::norm(B);
  const double Q = b1 * b1 - std::norm(A);

  struct Candidate {
    Index j;
    Complex x;
  };
  std::vector<Candidate> accepted;
  bool degenerate = false;

  const int signs = sin_psi > 0.0 ? 2 : 1;
  for (int s = 0; s < signs; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    const Complex M = (b1 / b2) * Complex(cos_psi, sign * sin_psi);
    const double R = A.imag() * B.real() - A.real() * B.imag() - b2 * b2 * M.imag();

    // P cos^2 a - 2R cos a sin a + Q sin^2 a = 0. Squaring it gives the quadratic
    // in cos^2 a whose leading coefficient is (P-Q)^2 + 4R^2.
    if ((P - Q) * (P - Q) + 4.0 * R * R <= tol.degenerate * scale4) {
      degenerate = true;
      continue;
    }
    double disc = R * R - P * Q;
    if (disc < -1e-9 * scale4) continue;
    const double root = std::sqrt(std::max(0.0, disc));
    const double qq = R + std::copysign(root, R);

    double angles[2];
    if (std::abs(Q) >= std::abs(P)) {
      // tan a solves Q t^2 - 2R t + P = 0.
      const double t1 = qq / Q;
      const double t2 = qq != 0.0 ? P / qq : t1;
      angles[0] = std::atan(t1);
      angles[1] = std::atan(t2);
    } else {
      // cot a solves P u^2 - 2R u + Q = 0.
      const double u1 = qq / P;
      const double u2 = qq != 0.0 ? Q / qq : u1;
      angles[0] = std::atan2(1.0, u1);
      angles[1] = std::atan2(1.0, u2);
    }

    for (double alpha : angles) {
      const double jr = alpha * 2.0 * static_cast<double>(n) / std::numbers::pi;
      if (!std::isfinite(jr)) continue;
      const double jn = std::round(jr);
      if (std::abs(jr - jn) > tol.integer || jn < 1.0 || jn > static_cast<double>(n)) continue;
      const Index j = static_cast<Index>(jn);
      if (!admissible(j)) continue;

      const double a = unit_angle(j, n);
      const double ca = std::cos(a), sa = std::sin(a);
      const Complex num = B * M - A;
      const Complex den = Complex(ca, 0.0) - kI * M * sa;
      if (std::abs(num) <= tol.degenerate * scale || std::abs(den) <= tol.degenerate) {
        degenerate = true;
        continue;
      }
      const Complex x = num / den;
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) continue;

      const double pred[kRowsPerNode] = {
          std::abs(A + x * ca),
          std::abs(B + kI * x * sa),
          std::abs(C + x * Complex(ca, sa)),
          std::abs(E + x),
          std::abs(D + x * std::polar(1.0, phi(j))),
      };
      bool ok = true;
      for (std::size_t q = 0; q < kRowsPerNode && ok; ++q) ok = matches(pred[q], b[q], tol);
      if (!ok) continue;

      const bool dup = std::any_of(accepted.begin(), accepted.end(), [&](const Candidate& c) {
        return c.j == j && close_values(c.x, x);
      });
      if (!dup) accepted.push_back({j, x});
    }
  }

  if (accepted.size() == 1) {
    return {CancelOutcome::kResolved, Recovery{accepted.front().j, accepted.front().x}};
  }
  if (accepted.empty() && degenerate) return {CancelOutcome::kDegenerate, std::nullopt};
  return {CancelOutcome::kRejected, std::nullopt};
}

// Running sums and "nothing left to learn" flags for one phase's right nodes.
class PhaseSweeper {
 public:
  PhaseSweeper(const MeasurementEnsemble& ens, const IntensityBundle& bundle, std::size_t phase,
               DecoderState& state)
      : ens_(ens),
        graph_(ens.graph(phase)),
        b_(bundle.phases.at(phase)),
        phase_(phase),
        state_(state),
        sums_(graph_.n_right()),
        exhausted_(graph_.n_right(), false) {
    for (Index j : state_.resolution_order) add_contribution(j, state_.resolved.at(j));
  }

  // Returns the number of components resolved during the sweep.
  std::size_t sweep(std::size_t k) {
    std::size_t found = 0;
    for (std::size_t i = 0; i < graph_.n_right(); ++i) {
      if (state_.resolved.size() >= k) break;
      if (exhausted_[i] || sums_[i].count == 0) continue;
      ++state_.stats.cancel_attempts;
      const auto attempt = cancel_out_impl(
          b_[i], sums_[i], ens_.n(),
          [&](Index j) { return !state_.resolved.contains(j) && graph_.has_edge(i, j); },
          [&](Index j) { return ens_.phi(phase_, i, j); }, state_.tol);
      switch (attempt.outcome) {
        case CancelOutcome::kResolved:
          resolve(attempt.recovery->index, attempt.recovery->value);
          ++found;
          break;
        case CancelOutcome::kExhausted:
          exhausted_[i] = true;
          --state_.stats.cancel_attempts;
          break;
        case CancelOutcome::kDegenerate:
          ++state_.stats.degenerate;
          ++state_.stats.cancel_failures;
          break;
        default:
          ++state_.stats.cancel_failures;
          break;
      }
    }
    return found;
  }

 private:
  void add_contribution(Index j, Complex x) {
    for (std::uint32_t r : graph_.column(j)) sums_[r].add(x, j, ens_.n(), ens_.phi(phase_, r, j));
  }

  void resolve(Index j, Complex x) {
    state_.resolved.emplace(j, x);
    state_.resolution_order.push_back(j);
    state_.magnitudes[j] = std::abs(x);
    state_.phases[j] = std::arg(x);
    add_contribution(j, x);
  }

  const MeasurementEnsemble& ens_;
  const BipartiteGraph& graph_;
  const std::vector<Intensities>& b_;
  std::size_t phase_;
  DecoderState& state_;
  std::vector<ResolvedSums> sums_;
  std::vector<bool> exhausted_;
};

}  // namespace

std::optional<SingletonCandidate> try_singleton(const Intensities& b, std::size_t n, const Tolerances& tol) {
  const double b1 = b[0], b2 = b[1];
  if (!(b1 > 0.0) && !(b2 > 0.0)) return std::nullopt;  // zeroton
  const double s = std::atan2(b2, b1) / (std::numbers::pi / (2.0 * static_cast<double>(n)));
  const double jn = std::round(s);
  if (std::abs(s - jn) > tol.integer || jn < 1.0 || jn > static_cast<double>(n)) return std::nullopt;
  const Index j = static_cast<Index>(jn);
  const double a = unit_angle(j, n);
  const double c = std::cos(a), sn = std::sin(a);
  // Divide by the larger of the two entries; both give |x_j| for a true singleton.
  const double magnitude = c >= sn ? b1 / c : b2 / sn;
  if (!(magnitude > 0.0)) return std::nullopt;
  return SingletonCandidate{j, magnitude};
}

bool verify_singleton(const SingletonCandidate& candidate, double b5, const Tolerances& tol) {
  return matches(candidate.magnitude, b5, tol);
}

std::optional<double> doubleton_relative_phase(double mag_u, double mag_v, double b4, const Tolerances& tol) {
  if (!(mag_u > 0.0) || !(mag_v > 0.0)) return std::nullopt;
  const double cos_theta = (b4 * b4 - mag_u * mag_u - mag_v * mag_v) / (2.0 * mag_u * mag_v);
  if (std::abs(cos_theta) > 1.0 + tol.cosine) return std::nullopt;
  return std::acos(std::clamp(cos_theta, -1.0, 1.0));
}

std::optional<double> resolve_doubleton_sign(Index /*u*/, Index /*v*/, double mag_u, double mag_v,
                                             double theta, double phi_u, double phi_v, double b5,
                                             const Tolerances& tol) {
  return pick_sign(theta, [&](double signed_theta) {
    return matches(std::abs(mag_u * std::polar(1.0, phi_u) + mag_v * std::polar(1.0, phi_v + signed_theta)),
                   b5, tol);
  });
}

GiantComponent giant_component(std::span<const Index> nodes, std::span<const PhaseEdge> edges,
                               const Tolerances& tol) {
  GiantComponent out;
  if (nodes.empty()) return out;

  std::unordered_map<Index, std::uint32_t> id;
  id.reserve(nodes.size() * 2);
  for (Index v : nodes) id.emplace(v, static_cast<std::uint32_t>(id.size()));
  const std::size_t count = id.size();
  std::vector<Index> label(count);
  for (const auto& [v, d] : id) label[d] = v;

  struct Arc {
    std::uint32_t to;
    double delta;
  };
  std::vector<std::size_t> offsets(count + 1, 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ends;
  ends.reserve(edges.size());
  for (const auto& e : edges) {
    auto iu = id.find(e.u), iv = id.find(e.v);
    if (iu == id.end() || iv == id.end()) {
      ends.emplace_back(UINT32_MAX, UINT32_MAX);
      continue;
    }
    ends.emplace_back(iu->second, iv->second);
    ++offsets[iu->second + 1];
    ++offsets[iv->second + 1];
  }
  for (std::size_t t = 1; t <= count; ++t) offsets[t] += offsets[t - 1];
  std::vector<Arc> arcs(offsets.back());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const auto [u, v] = ends[t];
    if (u == UINT32_MAX) continue;
    arcs[cursor[u]++] = {v, edges[t].delta};
    arcs[cursor[v]++] = {u, -edges[t].delta};
  }

  // Roots are taken in input order so the traversal is reproducible.
  std::vector<std::uint32_t> comp(count, UINT32_MAX);
  std::vector<double> phase(count, 0.0);
  std::uint32_t best = UINT32_MAX;
  std::size_t best_size = 0;
  std::uint32_t n_comp = 0;
  std::vector<std::uint32_t> queue;
  for (Index root_label : nodes) {
    const std::uint32_t root = id.at(root_label);
    if (comp[root] != UINT32_MAX) continue;
    queue.assign(1, root);
    comp[root] = n_comp;
    phase[root] = 0.0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::uint32_t u = queue[head];
      for (std::size_t a = offsets[u]; a < offsets[u + 1]; ++a) {
        const auto& arc = arcs[a];
        if (comp[arc.to] != UINT32_MAX) continue;
        comp[arc.to] = n_comp;
        phase[arc.to] = phase[u] + arc.delta;
        queue.push_back(arc.to);
      }
    }
    if (queue.size() > best_size) {
      best_size = queue.size();
      best = n_comp;
    }
    ++n_comp;
  }

  for (std::uint32_t d = 0; d < count; ++d) {
    if (comp[d] != best) continue;
    out.members.push_back(label[d]);
    out.phases.emplace(label[d], phase[d]);
  }
  std::sort(out.members.begin(), out.members.end());

  for (std::size_t t = 0; t < edges.size(); ++t) {
    const auto [u, v] = ends[t];
    if (u == UINT32_MAX || comp[u] != best) continue;
    const double gap = std::remainder(phase[v] - phase[u] - edges[t].delta, 2.0 * std::numbers::pi);
    if (std::abs(gap) > tol.phase) ++out.inconsistent_edges;
  }
  return out;
}

void ResolvedSums::add(Complex x, Index j, std::size_t n, double phi) {
  const double a = unit_angle(j, n);
  const double c = std::cos(a), s = std::sin(a);
  cosine += x * c;
  sine += x * Complex(0.0, s);
  ones += x;
  random += x * std::polar(1.0, phi);
  ++count;
}

CancelOutAttempt cancel_out(const Intensities& b, const ResolvedSums& sums, std::size_t n,
                            const Admissible& admissible, const PhaseLookup& phi, const Tolerances& tol) {
  return cancel_out_impl(b, sums, n, admissible, phi, tol);
}

std::optional<Recovery> cancel_out(const Intensities& b, std::span<const Index> neighbors,
                                   const ResolvedLookup& resolved, std::size_t n, const PhaseLookup& phi,
                                   const Tolerances& tol) {
  ResolvedSums sums;
  for (Index j : neighbors) {
    if (auto x = resolved(j)) sums.add(*x, j, n, phi(j));
  }
  const auto admissible = [&](Index j) {
    return std::find(neighbors.begin(), neighbors.end(), j) != neighbors.end() && !resolved(j).has_value();
  };
  return cancel_out_impl(b, sums, n, admissible, phi, tol).recovery;
}

void run_seeding(const MeasurementEnsemble& ens, const IntensityBundle& bundle, DecoderState& state) {
  const auto& g = ens.graph(0);
  const auto& b = bundle.phases.at(0);
  const std::size_t n = ens.n();
  const auto& tol = state.tol;

  state.neighbor_lists.assign(g.n_right(), NeighborList{});
  std::vector<Index> recovered;

  for (std::size_t i = 0; i < g.n_right(); ++i) {
    const auto cand = try_singleton(b[i], n, tol);
    if (!cand || !verify_singleton(*cand, b[i][4], tol)) continue;
    // b3 and b4 also equal |x_j| on a true singleton.
    if (!matches(cand->magnitude, b[i][2], tol) || !matches(cand->magnitude, b[i][3], tol)) continue;
    ++state.stats.singletons;

    const auto [it, inserted] = state.magnitudes.emplace(cand->index, cand->magnitude);
    if (!inserted) {
      if (!matches(cand->magnitude, it->second, tol)) {
        state.failure = "conflicting singleton magnitudes for index " + std::to_string(cand->index);
        return;
      }
      continue;
    }
    recovered.push_back(cand->index);
    for (std::uint32_t r : g.column(cand->index)) {
      auto& list = state.neighbor_lists[r];
      if (list.size < 2) list.items[list.size] = cand->index;
      if (list.size < 3) ++list.size;
    }
  }
  state.stats.magnitudes = recovered.size();

  for (std::size_t i = 0; i < g.n_right(); ++i) {
    const auto& list = state.neighbor_lists[i];
    if (list.size != 2) continue;
    state.doubleton_list.push_back(i);
    const Index u = list.items[0], v = list.items[1];
    const double mu = state.magnitudes.at(u), mv = state.magnitudes.at(v);
    const auto theta = doubleton_relative_phase(mu, mv, b[i][3], tol);
    if (!theta) continue;
    const double phi_u = ens.phi(0, i, u), phi_v = ens.phi(0, i, v);
    const auto delta = pick_sign(*theta, [&](double d) {
      return doubleton_consistent(b[i], n, u, v, mu, mv, d, phi_u, phi_v, tol);
    });
    if (delta) state.h_edges.push_back({u, v, *delta});
  }
  state.stats.doubletons = state.h_edges.size();

  const auto giant = giant_component(recovered, state.h_edges, tol);
  if (!giant.consistent()) {
    state.failure = "inconsistent phase cycle in the implied graph";
    return;
  }
  // Components outside the giant one are demoted to unresolved.
  std::unordered_map<Index, double> kept;
  kept.reserve(giant.members.size() * 2);
  for (Index j : giant.members) {
    const double mag = state.magnitudes.at(j);
    const double ph = giant.phases.at(j);
    kept.emplace(j, mag);
    state.phases.emplace(j, ph);
    state.resolved.emplace(j, std::polar(mag, ph));
    state.resolution_order.push_back(j);
  }
  state.magnitudes = std::move(kept);
  state.stats.giant_size = giant.members.size();
}

void run_stage(const MeasurementEnsemble& ens, const IntensityBundle& bundle, std::size_t stage,
               std::size_t k, DecoderState& state) {
  std::size_t found = 0;
  if (!state.failed() && !state.resolved.empty() && state.resolved.size() < k) {
    PhaseSweeper sweeper(ens, bundle, stage, state);
    found = sweeper.sweep(k);
  }
  state.stats.stage_resolved.push_back(found);
}

void run_cleanup(const MeasurementEnsemble& ens, const IntensityBundle& bundle, std::size_t k,
                 DecoderState& state) {
  if (state.failed() || state.resolved.empty() || state.resolved.size() >= k) return;
  const std::size_t phase = ens.schedule().cleanup_phase();
  PhaseSweeper sweeper(ens, bundle, phase, state);
  const std::size_t max_sweeps = ens.graph(phase).n_right() + 1;
  while (state.resolved.size() < k && state.stats.cleanup_sweeps < max_sweeps) {
    ++state.stats.cleanup_sweeps;
    const std::size_t found = sweeper.sweep(k);
    state.stats.cleanup_resolved += found;
    if (found == 0) break;
  }
}

RecoveryResult decode(const MeasurementEnsemble& ens, const IntensityBundle& bundle, std::size_t k,
                      const Tolerances& tol) {
  const auto start = std::chrono::steady_clock::now();
  DecoderState state;
  state.tol = tol;
  state.resolved.reserve(2 * k);

  run_seeding(ens, bundle, state);
  const std::size_t stages = ens.schedule().stage_count();
  for (std::size_t l = 1; l <= stages; ++l) run_stage(ens, bundle, l, k, state);
  run_cleanup(ens, bundle, k, state);

  RecoveryResult out;
  std::vector<SignalEntry> entries;
  entries.reserve(state.resolved.size());
  for (Index j : state.resolution_order) entries.push_back({j, state.resolved.at(j)});
  out.estimate = SparseSignal(ens.n(), std::move(entries));
  out.success = !state.failed() && state.resolved.size() == k;
  out.failure = state.failed() ? state.failure
                               : (out.success ? std::string{}
                                              : "resolved " + std::to_string(state.resolved.size()) + " of " +
                                                    std::to_string(k));
  out.stats = std::move(state.stats);
  out.stats.decode_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
  return out;
}

bool equal_up_to_global_phase(const SparseSignal& xhat, const SparseSignal& x, double tol) {
  if (xhat.n() != x.n() || xhat.sparsity() != x.sparsity()) return false;
  const auto a = xhat.entries(), b = x.entries();
  Complex corr{};
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].index != b[t].index) return false;
    corr += std::conj(a[t].value) * b[t].value;
  }
  const Complex align = std::polar(1.0, -std::arg(corr));
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (std::abs(a[t].value - b[t].value * align) > tol) return false;
  }
  return true;
}

}  // namespace spr
