#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stein {

// Immutable sample of nonnegative integers with cached summaries.
class Sample {
 public:
  struct Level {
    std::int64_t value;
    std::int64_t count;
  };

  // Throws DomainError for an empty sample or negative values.
  explicit Sample(std::vector<std::int64_t> values);

  std::span<const std::int64_t> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double n() const noexcept { return static_cast<double>(values_.size()); }

  double mean() const noexcept { return mean_; }
  // Divisor n.
  double variance() const noexcept { return variance_; }
  std::int64_t max() const noexcept { return max_; }
  std::int64_t min() const noexcept { return min_; }

  // Distinct values in increasing order with multiplicities.
  std::span<const Level> levels() const noexcept { return levels_; }

  std::int64_t count(std::int64_t k) const noexcept;

 private:
  std::vector<std::int64_t> values_;
  std::vector<Level> levels_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  std::int64_t max_ = 0;
  std::int64_t min_ = 0;
};

}  // namespace stein
