#pragma once

#include <cstdint>

#include "datapact/bytes.hpp"

namespace datapact {

// Deterministic splitmix64 stream. Every random draw in the engine (addresses,
// keys, nonces, link tokens, latency samples) comes from one of these so that a
// scenario seed fully determines a run, independent of platform and stdlib.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  void fill(std::uint8_t* out, std::size_t n) {
    std::size_t i = 0;
    while (i < n) {
      std::uint64_t word = next_u64();
      for (int b = 0; b < 8 && i < n; ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(word >> (8 * b));
      }
    }
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out.data(), n);
    return out;
  }

  // Independent child stream; used to give subsystems their own sequences.
  DeterministicRng fork() { return DeterministicRng(next_u64()); }

 private:
  std::uint64_t state_;
};

}  // namespace datapact
