#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace kpzlab {

/// Identifies one reproducible random stream. Equal seeds yield bitwise
/// identical draws regardless of host, run, or thread count.
struct Seed {
  std::uint64_t experiment = 0;
  std::uint64_t replicate = 0;
  std::uint64_t stream = 0;

  Seed with_replicate(std::uint64_t r) const { return {experiment, r, stream}; }
  Seed with_stream(std::uint64_t s) const { return {experiment, replicate, s}; }

  friend bool operator==(const Seed&, const Seed&) = default;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: output i is a pure function of (key, i), so
/// streams can be split and replayed without shared state.
class CounterRng {
 public:
  explicit CounterRng(Seed seed, std::uint64_t fork_tag = 0) {
    key_ = detail::mix64(seed.experiment);
    key_ = detail::mix64(key_ ^ seed.replicate);
    key_ = detail::mix64(key_ ^ seed.stream);
    key_ = detail::mix64(key_ ^ fork_tag);
  }

  /// Independent child stream; deterministic in (parent seed, tag).
  CounterRng fork(std::uint64_t tag) const {
    CounterRng child = *this;
    child.key_ = detail::mix64(key_ ^ detail::mix64(tag ^ 0xa5a5a5a5a5a5a5a5ULL));
    child.counter_ = 0;
    child.have_cached_ = false;
    return child;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ ^ (counter_++ * 0xd1342543de82ef95ULL);
    z = detail::mix64(z);
    return detail::mix64(z ^ key_);
  }

  /// Uniform on (0,1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace kpzlab
