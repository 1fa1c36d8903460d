#include "uosf/window_sums.hpp"

#include "uosf/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace uosf {

WindowedSums::WindowedSums(std::size_t channels, std::size_t capacity)
    : channels_(channels), capacity_(capacity), data_(channels * capacity, 0.0),
      sums_(channels, 0.0),
      churn_(channels, 0.0) {
  if (channels == 0) throw ArgumentError("WindowedSums needs at least one channel");
  if (capacity == 0) throw ArgumentError("WindowedSums capacity must be positive");
}

void WindowedSums::push(std::span<const double> row) {
  if (row.size() != channels_) throw ArgumentError("WindowedSums: row width mismatch");
  double* slot = &data_[head_ * channels_];
  if (filled_ == capacity_) {
    for (std::size_t c = 0; c < channels_; ++c) {
      sums_[c] += row[c] - slot[c];
      churn_[c] += std::abs(row[c]) + std::abs(slot[c]);
    }
  } else {
    for (std::size_t c = 0; c < channels_; ++c) {
      sums_[c] += row[c];
      churn_[c] += std::abs(row[c]);
    }
    ++filled_;
  }
  std::copy(row.begin(), row.end(), slot);
  if (++head_ == capacity_) {
    head_ = 0;
    assert(consistent(1e-9));
    resum();
  }
}

void WindowedSums::clear() {
  std::fill(data_.begin(), data_.end(), 0.0);
  std::fill(sums_.begin(), sums_.end(), 0.0);
  std::fill(churn_.begin(), churn_.end(), 0.0);
  head_ = 0;
  filled_ = 0;
}

double WindowedSums::at(std::size_t channel, std::size_t age) const {
  if (channel >= channels_ || age >= filled_) throw BoundsError("WindowedSums: index out of range");
  const std::size_t row = (head_ + capacity_ - 1 - age) % capacity_;
  return data_[row * channels_ + channel];
}

double WindowedSums::max_value() const {
  if (filled_ == 0) return 0.0;
  // Rows [0, filled_) are populated whether or not the ring has wrapped.
  return *std::max_element(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(filled_ * channels_));
}

std::vector<double> WindowedSums::exact_sums() const {
  std::vector<double> out(channels_, 0.0);
  for (std::size_t r = 0; r < filled_; ++r) {
    for (std::size_t c = 0; c < channels_; ++c) out[c] += data_[r * channels_ + c];
  }
  return out;
}

bool WindowedSums::consistent(double rel_tol) const {
  const auto exact = exact_sums();
  for (std::size_t c = 0; c < channels_; ++c) {
    // Rounding residue from values already evicted is bounded by the churn,
    // which matters when the window has drained to (near) zero.
    const double scale = std::max(std::abs(exact[c]), std::abs(sums_[c]));
    const double residue = 4.0 * std::numeric_limits<double>::epsilon() * churn_[c];
    if (std::abs(exact[c] - sums_[c]) > rel_tol * scale + residue) return false;
  }
  return true;
}

void WindowedSums::resum() {
  sums_ = exact_sums();
  std::fill(churn_.begin(), churn_.end(), 0.0);
}

}  // namespace uosf
