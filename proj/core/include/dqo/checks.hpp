#pragma once

// Invariant suite run by the `validate` mode: structural properties of the
// generator, the decoupled population dynamics and the stationary state,
// evaluated on the caller's parameters.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dqo/algebra.hpp"
#include "dqo/bath.hpp"

namespace dqo {

struct CheckResult {
  std::string name;
  double value;
  double threshold;
  bool passed;
  bool skipped = false;
  std::string note;
};

/// Random Hermitian, positive, unit-trace state supported on indices lo..hi.
Matrix random_interior_state(int dim, int lo, int hi, std::mt19937_64& rng);

std::vector<CheckResult> run_invariant_checks(const Oscillator& model, const Bath& bath,
                                              std::uint64_t seed = 20241018, int samples = 8);

}  // namespace dqo
