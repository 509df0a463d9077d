#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rezk {

/// Seeded generator with platform-stable output (mt19937_64 is fully
/// specified; we avoid std distributions, whose streams are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }

  bool flip() { return (next() & 1) != 0; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rezk
