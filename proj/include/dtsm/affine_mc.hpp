#pragma once

#include "dtsm/affine.hpp"
#include "dtsm/noarb.hpp"

namespace dtsm::affine {

/// Path sampler over the doubly stochastic affine model for martingale
/// tests (zero short rate). Per path: zeta ~ Exp(1) is drawn first, the
/// state advances by full-truncation Euler with the hazard accumulated by
/// trapezoid, and each atom absorbs the draw with the jump
/// phi_i + psi_i . X_{u_i}. Grid times and risky times land exactly on
/// step boundaries.
noarb::PathSampler make_affine_sampler(AffineParams params, CompensatorLoadings loadings,
                                       core::RiskySchedule schedule, Vector x0, double step);

} // namespace dtsm::affine
