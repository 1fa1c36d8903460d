#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace uosf {

// Fixed-capacity ring of rows with one running sum per channel. Pushing past
// capacity evicts the oldest row. The running sums are refreshed from the
// buffer every time the write head wraps, which bounds drift from repeated
// add/subtract to one window's worth of updates.
class WindowedSums {
 public:
  WindowedSums(std::size_t channels, std::size_t capacity);

  void push(std::span<const double> row);
  void clear();

  std::size_t channels() const { return channels_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return filled_; }
  bool full() const { return filled_ == capacity_; }

  std::span<const double> sums() const { return sums_; }
  double sum(std::size_t channel) const { return sums_[channel]; }

  // Value pushed `age` rows ago (age 0 is the newest).
  double at(std::size_t channel, std::size_t age) const;

  // Largest stored value over all channels; 0 when empty.
  double max_value() const;

  // Sums recomputed directly from the stored rows.
  std::vector<double> exact_sums() const;

  // True when every running sum matches its exact sum within rel_tol.
  bool consistent(double rel_tol) const;

 private:
  void resum();

  std::size_t channels_;
  std::size_t capacity_;
  std::vector<double> data_;  // capacity x channels
  std::vector<double> sums_;
  std::vector<double> churn_;  // |values| added or evicted since the last resum
  std::size_t head_ = 0;  // next row to write
  std::size_t filled_ = 0;
};

}  // namespace uosf
