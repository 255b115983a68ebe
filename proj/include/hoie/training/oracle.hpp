#pragma once

#include "hoie/numerics/composite.hpp"
#include "hoie/training/labeler.hpp"

namespace hoie::train {

// A trigger and two entities over six tokens with seeded gold labels, plus a
// small all-factor labeler config to go with it.
schema::LabelSchema oracle_schema();
LabeledSentence oracle_sentence(std::uint64_t seed, int entities = 2);
LabelerConfig oracle_config(int iterations, AlphaMode mode, std::size_t width = 4);

// Finite differences of the high-order joint loss against reverse mode over
// every parameter: encoder, scorers and (learned mode) α. Train mode, so
// dropout masks are part of the checked function.
num::GradCheckResult labeler_gradient_check(int iterations, AlphaMode mode, std::uint64_t seed);

}  // namespace hoie::train
