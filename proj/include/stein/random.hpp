#pragma once

#include <cstdint>
#include <random>

namespace stein {

// Reproducible random stream identified by (seed, stream_id).
//
// The engine state is a pure function of the pair, and substreams are derived
// from the pair alone (never from the engine position), so work can be split
// by replicate index and stay bit-identical for any number of workers.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

RandomStream substream(const RandomStream& rng, std::uint64_t index);

}  // namespace stein
