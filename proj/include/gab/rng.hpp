#pragma once

#include <array>
#include <cstdint>

namespace gab {

/// Philox4x32-10 counter-based generator (Salmon et al.). Every draw is a pure
/// function of (key, counter), so simulations can be split across workers in
/// any order and still reproduce bit-identical streams.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  static Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }
};

/// Uniform on (0,1] from two 32-bit words, 53 bits of resolution. Excluding 0
/// makes I(u <= p) exactly 0 for p = 0 and exactly 1 for p = 1.
inline double open_closed_uniform(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t k = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
  return static_cast<double>(k + 1) * 0x1.0p-53;
}

/// Independent stream families drawn from one master seed.
enum class StreamDomain : std::uint32_t {
  Shock = 0,          ///< u_{i,t} driving the outcomes
  InitialOutcome = 1, ///< supplemental draws for the initial outcome lags
  Count = 2,          ///< Poisson count simulation
  Auxiliary = 3,      ///< random restarts, random initial conditions
};

/// Two uniforms per Philox call; cell (t, i) uses half of block (t, i/2).
class CellUniforms {
 public:
  CellUniforms(std::uint64_t seed, std::uint32_t replicate, StreamDomain domain)
      : key_(Philox4x32::key_from_seed(seed)),
        replicate_(replicate),
        domain_(static_cast<std::uint32_t>(domain)) {}

  double operator()(std::uint32_t t, std::uint32_t i) const {
    const auto out = Philox4x32::apply({t, i >> 1, replicate_, domain_}, key_);
    return (i & 1u) ? open_closed_uniform(out[2], out[3]) : open_closed_uniform(out[0], out[1]);
  }

  /// Fills u[i] for i in [0, n) at time t.
  template <typename Out>
  void fill(std::uint32_t t, std::uint32_t n, Out& u) const {
    for (std::uint32_t j = 0; j < n; j += 2) {
      const auto out = Philox4x32::apply({t, j >> 1, replicate_, domain_}, key_);
      u[j] = open_closed_uniform(out[0], out[1]);
      if (j + 1 < n) u[j + 1] = open_closed_uniform(out[2], out[3]);
    }
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t replicate_;
  std::uint32_t domain_;
};

/// splitmix64 finalizer, used to derive independent 64-bit seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix_seed(seed ^ mix_seed(tag));
}

}  // namespace gab
