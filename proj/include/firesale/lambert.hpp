#pragma once

namespace firesale {

// Principal branch W0 of the Lambert W function, the inverse of w -> w*exp(w)
// on [-1/e, inf). Halley iteration from a piecewise initial guess; the
// residual |w*exp(w) - z| stays below 1e-13 * max(1, |z|).
//
// Throws DomainError for z < -1/e - 1e-15.
double lambert_w(double z);

// W0 evaluated at z = exp(log_z). Stable for arguments far beyond the range
// of double (log_z up to ~1e300); used by hitting-time formulas whose W
// argument is assembled in log space.
double lambert_w_from_log(double log_z);

}  // namespace firesale
