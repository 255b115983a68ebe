#pragma once

#include "hoie/inference/oracle.hpp"

namespace hoie::testing {

using infer::random_graph;
using infer::random_potentials;
using infer::random_schema;
using infer::random_tensor;
using infer::RandomGraphSpec;

}  // namespace hoie::testing
