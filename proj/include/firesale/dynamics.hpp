#pragma once

#include <cstdint>
#include <vector>

#include "firesale/scenario.hpp"

namespace firesale {

// Per-asset demand evaluations shared by every right-hand-side piece.
// Prices are always reconstructed as q_k = f_t,k(t) * f_Gamma,k(total
// liquidations); the integrator never carries q as a state variable.
struct DemandEval {
    std::vector<double> gamma_total;  // m, sum_i s_ik pi_i
    std::vector<double> ft, ft_prime; // m
    std::vector<double> fg, fg_prime; // m
    std::vector<double> q;            // m
};

DemandEval eval_demand(double t, const std::vector<double>& pi, const Scenario& scn);

// Per-asset liquidation pressure of each active bank,
//   Z[i][k] = 1{i active} * (1 - alpha_k*theta) * (s_ik - gamma_ik)
//             / (alpha_k*theta * f_t,k * f_G,k),
// row-major n x m; rows of inactive banks are zero. In the single-asset
// system this is exactly the scalar Z_i driving gamma_dot.
std::vector<double> compute_Z(double t, const std::vector<double>& pi,
                              const std::vector<std::uint8_t>& active, const Scenario& scn);

// Regime multipliers
//   Lambda_k = 1 + ((1-alpha_k*theta)/(alpha_k*theta))
//              * [sum over active j of (s_jk - gamma_jk)] * f'_G,k / f_G,k.
// Positive along admissible trajectories; values below lambda_floor signal
// risk-weights outside the admissible interval and abort the run.
std::vector<double> compute_lambda(double t, const std::vector<double>& pi,
                                   const std::vector<std::uint8_t>& active, const Scenario& scn,
                                   double lambda_floor = 1e-12);

struct Derivatives {
    std::vector<double> pi_dot;   // n, >= 0 componentwise
    std::vector<double> q_dot;    // m, <= 0 componentwise
    std::vector<double> psi_dot;  // n
};

// Right-hand side of the regime ODE. Inactive banks are frozen; active rows
// solve (I + Z diag(f_t) diag(f'_G) s^T) pi_dot = -Z diag(f'_t) f_G with the
// bank-coupling matrix normalised for liquidation fractions, and q_dot comes
// from the m x m companion system. The m = 1 case takes the rank-1 shortcut
// q_dot = f'_t f_G / Lambda,
// gamma_dot_i = -((1-alpha*theta)/(alpha*theta)) (q_dot/q) (s_i - gamma_i).
Derivatives rhs(double t, const std::vector<double>& pi,
                const std::vector<std::uint8_t>& active, const Scenario& scn,
                double lambda_floor = 1e-12);

// Solves (I + scale * z 1^T) x = b in O(n) via the rank-1 update identity.
// Throws SingularUpdate when |1 + scale * sum(z)| < 1e-14.
std::vector<double> sherman_morrison_solve(const std::vector<double>& z_col, double scale,
                                           const std::vector<double>& rhs_vec);

// Diagnostic bundle for one regime: cached Z and Lambda plus the
// determinants of the bank-side (n x n) and asset-side (m x m) systems,
// which agree by Sylvester's identity.
struct RegimeRhs {
    std::vector<std::uint8_t> active;
    std::vector<double> z;       // n x m, spec convention above
    std::vector<double> lambda;  // m
    double det_bank_system = 1.0;
    double det_asset_system = 1.0;
};

RegimeRhs analyze_regime(double t, const std::vector<double>& pi,
                         const std::vector<std::uint8_t>& active, const Scenario& scn,
                         double lambda_floor = 1e-12);

}  // namespace firesale
