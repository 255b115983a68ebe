#pragma once

#include "hoie/inference/mfvi.hpp"

// Plain-loop mean-field updates: one variable and one factor at a time, no
// tape. Kept as the serial reference the tape-based implementation is tested
// and benchmarked against.
namespace hoie::infer::reference {

Posterior init_posteriors(const PotentialSet& pot);
Posterior mfvi_step(const Posterior& q, const PotentialSet& pot, const AlphaConfig& alphas, ScheduleMode mode);
Posterior run_mfvi(const PotentialSet& pot, const Schedule& schedule, const AlphaConfig& alphas);

}  // namespace hoie::infer::reference
