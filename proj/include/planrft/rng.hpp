#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace planrft {

// All randomness in the project flows from one master seed through named
// substreams, so independent stages (task-gen, sampling, init, shuffle)
// can be reproduced in isolation.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view label) {
  // FNV-1a over the label, mixed with the master seed.
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  h ^= master + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

class Rng {
 public:
  Rng() : engine_(0) {}
  Rng(std::uint64_t master, std::string_view label)
      : engine_(substream_seed(master, label)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection-free modulo is fine here; n is always tiny relative to 2^64.
    return engine_() % n;
  }

  double next_gaussian() {
    // Box-Muller, one value per call (the spare is discarded to keep the
    // stream state trivially serializable).
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace planrft
