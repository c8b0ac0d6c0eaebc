#include "spr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spr {

SparseSignal::SparseSignal(std::size_t n, std::vector<SignalEntry> entries)
    : n_(n), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const SignalEntry& a, const SignalEntry& b) { return a.index < b.index; });
  for (std::size_t t = 0; t < entries_.size(); ++t) {
    const auto& e = entries_[t];
    if (e.index < 1 || e.index > n_) {
      throw std::invalid_argument("signal index " + std::to_string(e.index) + " outside [1, " +
                                  std::to_string(n_) + "]");
    }
    if (t > 0 && entries_[t - 1].index == e.index) {
      throw std::invalid_argument("duplicate signal index " + std::to_string(e.index));
    }
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()) || std::abs(e.value) == 0.0) {
      throw std::invalid_argument("signal value at " + std::to_string(e.index) +
                                  " must be finite and non-zero");
    }
  }
}

std::optional<Complex> SparseSignal::value_at(Index j) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                             [](const SignalEntry& e, Index idx) { return e.index < idx; });
  if (it == entries_.end() || it->index != j) return std::nullopt;
  return it->value;
}

double SparseSignal::max_modulus() const noexcept {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
  return m;
}

double SparseSignal::min_modulus() const noexcept {
  if (entries_.empty()) return 0.0;
  double m = std::abs(entries_.front().value);
  for (const auto& e : entries_) m = std::min(m, std::abs(e.value));
  return m;
}

SparseSignal SparseSignal::rotated(double theta) const {
  const Complex w = std::polar(1.0, theta);
  auto out = entries_;
  for (auto& e : out) e.value *= w;
  return SparseSignal(n_, std::move(out));
}

SparseSignal SparseSignal::scaled(double s) const {
  auto out = entries_;
  for (auto& e : out) e.value *= s;
  return SparseSignal(n_, std::move(out));
}

void check_dynamic_range(const SparseSignal& x, double ratio) {
  if (x.sparsity() == 0) return;
  if (x.min_modulus() < ratio * x.max_modulus()) {
    throw std::invalid_argument("signal dynamic range exceeds the configured modulus floor");
  }
}

}  // namespace spr
