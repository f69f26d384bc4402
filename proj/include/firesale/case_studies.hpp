#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "firesale/scenario.hpp"
#include "firesale/simulator.hpp"
#include "firesale/stochastic.hpp"

namespace firesale {

// Scenario presets behind the `case-study` CLI verb. The builders are exposed
// so the regression suites can run them directly.

// 20 banks, one asset: liabilities 1, liquid assets 2(i-1)/475, two units of
// the tradable asset each, theta_min = 0.1, alpha = 5, exponential decay
// with rate -log(0.95) and exponential impact b.
Scenario make_20bank_scenario(double b);

// Exponential-rate stress calibrated so that P(f_t(1) <= 0.95) = 0.05.
double probability_stress_rate();

// Single leverage-constrained bank: s = lambda_max, liabilities
// lambda_max - 1, alpha = alpha_ell = 1, theta_min = 1/lambda_max.
Scenario make_leverage_scenario(double lambda_max);

// Two banks, two assets, diversification parameter zeta in [0, 1]: bank 1
// holds (2 - zeta, zeta), bank 2 the mirror image; only asset 1 is stressed
// in time.
Scenario make_2asset_scenario(double zeta);

struct CaseStudyOptions {
    std::string out_dir = ".";
    std::vector<double> b_values;          // ex-20bank; empty = {0, 0.7/M, 1/(M+1e-8)}
    double zeta_step = 0.01;               // ex-2asset grid
    double lambda_min = 1.05;              // ex-leverage grid
    double lambda_max = 10.45;
    double lambda_step = 0.05;
    double b_probability = 0.9 / 40.0;     // ex-probability impact
    int samples = 10000;                   // ex-probability Monte Carlo draws
    std::uint64_t seed = 42;
    IntegratorConfig integrator;
};

// Runs one of ex-20bank, ex-probability, ex-leverage, ex-2asset; writes the
// CSV and scenario artifacts into out_dir and returns a printable summary.
// Throws UnknownCaseStudy for unrecognised names.
std::string run_case_study(const std::string& name, const CaseStudyOptions& opts = {});

}  // namespace firesale
