#pragma once

#include <string>
#include <vector>

#include "firesale/bounds.hpp"
#include "firesale/core.hpp"
#include "firesale/scenario.hpp"
#include "firesale/stochastic.hpp"

namespace firesale {

// Shortest round-trip representation (17 significant digits).
std::string format_double(double x);

// trajectory.csv: t, q_1..q_m, then pi_i, psi_i, theta_i, active_i per bank.
void write_trajectory_csv(const Trajectory& traj, const Scenario& scn, const std::string& path);

// hitting_times.csv: bank, tau, tau_bound; "never" for banks that stay clear
// of the regulatory boundary.
void write_hitting_times_csv(const Trajectory& traj, const BoundSchedule& schedule,
                             const std::string& path);

// bounds.csv: rank, bank, asset, q_bar, tau_bound, f_level, lambda, nu, exponent.
void write_schedule_csv(const BoundSchedule& schedule, const std::string& path);

// cdf.csv: q_star, empirical_p, analytic_bound_p, dkw_lo, dkw_hi, all in the
// P(q(t) <= q*) orientation (analytic_bound_p is the upper bound implied by
// the lower bound on the survival probability).
struct CdfRow {
    double q_star = 0.0;
    double empirical_p = 0.0;
    double analytic_bound_p = 0.0;
    double dkw_lo = 0.0;
    double dkw_hi = 0.0;
};
void write_cdf_csv(const std::vector<CdfRow>& rows, const std::string& path);

}  // namespace firesale
