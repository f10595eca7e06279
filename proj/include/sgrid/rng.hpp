#ifndef SGRID_RNG_HPP
#define SGRID_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace sgrid {

// splitmix64 finalizer, used to derive well-dispersed substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random source. Gaussian variates use Box-Muller rather than
// std::normal_distribution so that output bytes do not depend on the standard
// library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  // Independent stream addressed by (master_seed, stream, substream).
  static Rng stream(std::uint64_t master_seed, std::uint64_t stream,
                    std::uint64_t substream = 0) {
    return Rng(mix64(mix64(master_seed) ^ mix64(stream ^ 0x5851f42d4c957f2dULL) ^
                     mix64(substream ^ 0x14057b7ef767814fULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 < 1
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sgrid

#endif
