#include "stein/data.hpp"

#include <algorithm>

#include "stein/error.hpp"

namespace stein {

Sample::Sample(std::vector<std::int64_t> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("sample: empty");
  for (auto v : values_)
    if (v < 0) throw DomainError("sample: values must be nonnegative");

  std::vector<std::int64_t> sorted(values_);
  std::sort(sorted.begin(), sorted.end());
  for (auto v : sorted) {
    if (levels_.empty() || levels_.back().value != v)
      levels_.push_back({v, 1});
    else
      ++levels_.back().count;
  }
  min_ = sorted.front();
  max_ = sorted.back();

  // Two-pass mean / variance.
  double sum = 0.0;
  for (const auto& l : levels_) sum += static_cast<double>(l.value) * static_cast<double>(l.count);
  mean_ = sum / n();
  double ss = 0.0;
  for (const auto& l : levels_) {
    const double d = static_cast<double>(l.value) - mean_;
    ss += d * d * static_cast<double>(l.count);
  }
  variance_ = ss / n();
}

std::int64_t Sample::count(std::int64_t k) const noexcept {
  auto it = std::lower_bound(levels_.begin(), levels_.end(), k,
                             [](const Level& l, std::int64_t v) { return l.value < v; });
  return it != levels_.end() && it->value == k ? it->count : 0;
}

}  // namespace stein
