// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_MODELS_HPP
#define MORTAU_MODELS_HPP

#include <cstdint>

#include "mortau/system.hpp"

namespace mortau
{

// Stable random system A = S L S^{-1}: L block diagonal with real poles in
// -[0.1, 30] and complex pairs with real part in -[0.1, 10], S a mild perturbation of I.
// B and C have standard normal entries. Deterministic in the seed.
StateSpaceSystem synthetic_system(Eigen::Index n, Eigen::Index inputs, Eigen::Index outputs,
                                  std::uint64_t seed);

// The order-1006 SISO test system with three lightly damped oscillators
// (-1 +- 100i, -1 +- 200i, -1 +- 400i) and real poles -1, ..., -1000.
StateSpaceSystem fom_system();

}  // namespace mortau

#endif  // MORTAU_MODELS_HPP
