#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace memcl {

/// Derives a stream seed from a base seed and a list of labels (FNV-1a then
/// splitmix64), so independent streams never depend on call order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::string_view> labels) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (auto label : labels) {
    for (unsigned char c : label) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

// Fisher-Yates with an explicit modulo draw; std::shuffle's output is not
// pinned across standard libraries.
template <class T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace memcl
