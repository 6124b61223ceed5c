#pragma once

#include <cstdint>

namespace dimerlab {

// Counter-based splittable generator. Every draw is a hash of
// (seed, stream, counter), so identical (seed, stream) sequences are
// reproducible bit-for-bit on any platform, and derived streams are
// independent without shared state.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

class RngStream {
 public:
  RngStream() : RngStream(RngSeed{}) {}
  explicit RngStream(RngSeed s)
      : key_(detail::splitmix64(s.seed ^ detail::splitmix64(s.stream ^ 0xd1b54a32d192ed03ULL))),
        counter_(0) {}

  std::uint64_t next_u64() { return detail::splitmix64(key_ ^ detail::splitmix64(counter_++)); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x > limit);
    return x % n;
  }

  // Independent substream; derived deterministically from this stream's key.
  RngStream derive(std::uint64_t index) const {
    RngStream r;
    r.key_ = detail::splitmix64(key_ ^ detail::splitmix64(index ^ 0xe220a8397b1dcdafULL));
    r.counter_ = 0;
    return r;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace dimerlab
