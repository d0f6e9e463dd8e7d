#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace plmtest {

using Rng = std::mt19937_64;

// Stream labels mixed into derived seeds so that, e.g., bootstrap multipliers
// never share a stream with the data split of the same replicate.
enum class Purpose : std::uint64_t {
  replicate = 1,
  generate = 2,
  split = 3,
  fit = 4,
  bootstrap = 5,
  multi_split = 6,
  cv_folds = 7,
  forest = 8,
  retry = 9,
};

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Child seed from a parent seed and an ordered list of logical ids. Depends only
// on the ids, never on execution order, so parallel runs reproduce serial ones.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> ids) noexcept {
  std::uint64_t h = splitmix64(parent);
  for (std::uint64_t id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, Purpose purpose,
                                    std::uint64_t index = 0) noexcept {
  return derive_seed(parent, {static_cast<std::uint64_t>(purpose), index});
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace plmtest
