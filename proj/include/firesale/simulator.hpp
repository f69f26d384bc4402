#pragma once

#include <cstdint>
#include <vector>

#include "firesale/dynamics.hpp"
#include "firesale/scenario.hpp"

namespace firesale {

struct IntegratorConfig {
    double base_step = 0.0;       // <= 0 picks horizon / 2000
    double event_tol = 1e-10;     // bisection width for activation times
    double constraint_tol = 1e-8; // |theta_i - theta_min| allowed for active banks
    int output_grid = 501;        // uniform sample count (events are merged in)
    double lambda_floor = 1e-12;
    int max_retries = 6;          // step halvings after a constraint drift
};

// Integrates the regime-switching system on [0, horizon]: RK4 between
// activation events, bisection to event_tol for each hitting time, and a
// fresh start of the ODE after every activation. The returned samples
// contain the uniform output grid merged with every hitting time; prices are
// nonincreasing and liquidation fractions nondecreasing along the samples.
//
// Throws InadmissibleScenario if validation fails, NearSingularRegime for
// risk-weights outside the admissible region, and ConstraintDrift when an
// active bank leaves the theta_min manifold even after max_retries step
// halvings.
Trajectory simulate(const Scenario& scn, const IntegratorConfig& config = {});

// Integrator state between samples: liquidation fractions and proceeds only;
// prices are implied by (t, pi).
struct PathState {
    double t = 0.0;
    std::vector<double> pi, psi;
    std::vector<std::uint8_t> active;
};

struct ActivationEvent {
    double tau = 0.0;
    std::vector<int> banks;  // every bank whose margin is <= 0 at tau
};

// Locates the earliest activation in (t_lo, t_hi] by bisection on the
// monotone activation margins, re-integrating from `at_lo` for each probe.
// Precondition: all inactive margins are positive at t_lo and some margin is
// <= 0 at t_hi.
ActivationEvent locate_activation(const PathState& at_lo, double t_hi, const Scenario& scn,
                                  const IntegratorConfig& config);

// Measures each active bank's distance from the theta_min manifold. Residuals
// within constraint_tol pass through; residuals in (tol, 10 tol] trigger one
// Newton projection of the liquidation fractions (t and psi held fixed);
// anything larger throws ConstraintDrift.
SystemState renormalize_active(const SystemState& state, const Scenario& scn,
                               const IntegratorConfig& config);

// One classical RK4 step of length h from `state` (exposed for event
// location and tests).
PathState rk4_step(const PathState& state, double h, const Scenario& scn, double lambda_floor);

// Materialises a full snapshot (prices, liquidated units) from the
// integrator state.
SystemState materialize(const PathState& state, const Scenario& scn);

}  // namespace firesale
