#pragma once

#include <cstdint>
#include <vector>

#include "sinkbond/mdp.hpp"

namespace fixtures {

inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix(mix(mix(seed ^ a) ^ b) ^ c);
}

/// Random admissible decision rule over the problem's action sets.
inline sinkbond::DecisionRule random_rule(const sinkbond::MdpProblem& problem, std::uint64_t seed) {
  return [&problem, seed](std::size_t n, int s, std::size_t node) {
    std::vector<int> acts;
    problem.actions(n, s, acts);
    return acts[key(seed, n, static_cast<std::uint64_t>(s), node) % acts.size()];
  };
}

}  // namespace fixtures
