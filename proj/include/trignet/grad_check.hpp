#pragma once

#include <functional>

#include "trignet/param_store.hpp"
#include "trignet/tape.hpp"

namespace trignet {

/// Builds a loss on a fresh tape from the current parameter values.
/// Must be deterministic: called repeatedly under entry perturbations.
using LossBuilder = std::function<NodeId(Tape&, const ParamStore&)>;

/// Compares analytic gradients against central finite differences
/// (f(x+eps) - f(x-eps)) / (2 eps) for every entry of every parameter.
/// Returns the max over entries of |a - n| / max(1e-8, |a| + |n|).
/// Throws on eps == 0 ("degenerate step") or a non-finite loss.
double grad_check(const LossBuilder& build, ParamStore& store, double eps);

}  // namespace trignet
