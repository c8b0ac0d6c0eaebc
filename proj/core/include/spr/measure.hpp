#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "spr/ensemble.hpp"
#include "spr/random.hpp"
#include "spr/signal.hpp"

namespace spr {

// The five row families attached to every right node.
enum class RowFamily : int {
  kCosine = 1,       // cos(j pi / 2n)
  kSine = 2,         // i sin(j pi / 2n)
  kUnitPhase = 3,    // exp(i j pi / 2n)
  kOnes = 4,         // 1
  kRandomPhase = 5,  // exp(i phi_{i,j})
};

inline constexpr std::size_t kRowsPerNode = 5;
using Intensities = std::array<double, kRowsPerNode>;

// Unit angle j pi / 2n of left node j.
inline double unit_angle(Index j, std::size_t n) noexcept {
  return static_cast<double>(j) * std::numbers::pi / (2.0 * static_cast<double>(n));
}

// Matrix entry for row family q (1..5) and left index j. phi is only read for q = 5.
// Throws std::out_of_range for q outside [1,5] or j outside [1,n].
Complex entry(int q, Index j, std::size_t n, double phi = 0.0);

// Random verification phase for (right node, left node) in phase p.
using PhaseLookup = std::function<double(Index)>;

class MeasurementEnsemble {
 public:
  // Builds the schedule and one graph per phase from independently derived streams.
  explicit MeasurementEnsemble(const EnsembleConfig& cfg);

  const EnsembleConfig& config() const noexcept { return cfg_; }
  std::size_t n() const noexcept { return cfg_.n; }
  const StageSchedule& schedule() const noexcept { return schedule_; }
  std::size_t phase_count() const noexcept { return graphs_.size(); }
  const BipartiteGraph& graph(std::size_t phase) const { return graphs_.at(phase); }
  std::span<const BipartiteGraph> graphs() const noexcept { return graphs_; }

  double phi(std::size_t phase, std::size_t right, Index left) const noexcept {
    return phases_(static_cast<std::uint32_t>(phase), static_cast<std::uint32_t>(right), left);
  }
  std::size_t measurement_count() const noexcept { return schedule_.measurement_count(); }

 private:
  EnsembleConfig cfg_;
  StageSchedule schedule_;
  std::vector<BipartiteGraph> graphs_;
  PhaseField phases_;
};

struct IntensityBundle {
  std::vector<std::vector<Intensities>> phases;

  const Intensities& at(std::size_t phase, std::size_t right) const {
    return phases.at(phase).at(right);
  }
  std::size_t measurement_count() const noexcept;
};

// b = |A x| without materializing A. Throws std::invalid_argument on length mismatch.
IntensityBundle encode(const MeasurementEnsemble& ens, const SparseSignal& x);

// Intensities of one right node with adjacency `row`, given the signal and phi_{i,j}.
Intensities encode_node(std::span<const Index> row, const SparseSignal& x,
                        const PhaseLookup& phi);

}  // namespace spr
