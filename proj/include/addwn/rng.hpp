#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace addwn {

// Deterministic stream/substream random source.
//
// Streams form a tree: a master seed derives per-suite streams, a suite
// stream derives per-replicate substreams.  Derivation mixes the parent's
// root seed with the child id through a SplitMix64-style avalanche, so a
// child's draws do not depend on how many values the parent has consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : root_(seed), engine_(mix(seed, 0x9e3779b97f4a7c15ull)) {}

  // Child stream labelled `id`; deterministic in (root seed, id) only.
  RngStream substream(std::uint64_t id) const { return RngStream(mix(root_, id)); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; never zero, safe under log().
  double uniform_pos() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the sine mate is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t root_seed() const { return root_; }

 private:
  static std::uint64_t mix(std::uint64_t h, std::uint64_t id) {
    h ^= id + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
  }

  std::uint64_t root_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace addwn
