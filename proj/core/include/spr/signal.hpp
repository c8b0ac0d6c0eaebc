#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace spr {

using Complex = std::complex<double>;

// Left-node (signal component) index. One-based: valid values are [1, n].
using Index = std::uint32_t;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SignalEntry {
  Index index;
  Complex value;
};

// Exactly-sparse complex vector of length n. Entries are kept sorted by index;
// every stored value is non-zero and finite.
class SparseSignal {
 public:
  SparseSignal() = default;

  // Throws std::invalid_argument on duplicate/out-of-range indices or zero values.
  SparseSignal(std::size_t n, std::vector<SignalEntry> entries);

  std::size_t n() const noexcept { return n_; }
  std::size_t sparsity() const noexcept { return entries_.size(); }
  std::span<const SignalEntry> entries() const noexcept { return entries_; }

  std::optional<Complex> value_at(Index j) const;
  bool contains(Index j) const { return value_at(j).has_value(); }

  double max_modulus() const noexcept;
  double min_modulus() const noexcept;

  SparseSignal rotated(double theta) const;
  SparseSignal scaled(double s) const;

 private:
  std::size_t n_ = 0;
  std::vector<SignalEntry> entries_;
};

// Default floor on min|x_j| / max|x_j|.
inline constexpr double kDefaultDynamicRangeFloor = 1e-3;

// Throws std::invalid_argument when some modulus falls below ratio * max modulus.
void check_dynamic_range(const SparseSignal& x, double ratio = kDefaultDynamicRangeFloor);

}  // namespace spr
