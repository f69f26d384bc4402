#pragma once

namespace firesale {

// Capital regulation: every bank must keep its risk-weighted capital ratio
// at or above theta_min at all times.
struct Regulation {
    double theta_min = 0.1;

    bool operator==(const Regulation&) const = default;
};

}  // namespace firesale
