#include <catch_amalgamated.hpp>

#include <set>

#include "gab/rng.hpp"

using namespace gab;

TEST_CASE("Philox4x32-10 known-answer vectors", "[rng]") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms lie in (0, 1]", "[rng]") {
  CHECK(open_closed_uniform(0, 0) > 0.0);
  CHECK(open_closed_uniform(0xffffffff, 0xffffffff) == 1.0);
  CellUniforms u(42, 0, StreamDomain::Shock);
  double sum = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const double v = u(static_cast<std::uint32_t>(t), 3);
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("streams are distinct across cells, replicates and domains", "[rng]") {
  std::set<double> seen;
  for (std::uint32_t rep = 0; rep < 3; ++rep) {
    for (auto dom : {StreamDomain::Shock, StreamDomain::InitialOutcome, StreamDomain::Count}) {
      CellUniforms u(9, rep, dom);
      for (std::uint32_t t = 0; t < 20; ++t) {
        for (std::uint32_t i = 0; i < 5; ++i) seen.insert(u(t, i));
      }
    }
  }
  CHECK(seen.size() == 3 * 3 * 20 * 5);
  CellUniforms a(1, 0, StreamDomain::Shock), b(1, 0, StreamDomain::Shock);
  CHECK(a(5, 7) == b(5, 7));
  std::vector<double> out(5);
  a.fill(5, 5, out);
  for (std::uint32_t i = 0; i < 5; ++i) CHECK(out[i] == a(5, i));
}
