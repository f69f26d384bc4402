#pragma once

#include <string>
#include <vector>

#include "firesale/core.hpp"

namespace firesale {

// A complete market configuration: regulation, banks, assets, and the crisis
// horizon. Scenario files are versioned UTF-8 JSON documents (schema
// "firesale/1"); see README for the field layout.
struct Scenario {
    Regulation regulation;
    std::vector<BankBook> banks;
    std::vector<AssetSpec> assets;
    double horizon = 1.0;

    int n_banks() const { return static_cast<int>(banks.size()); }
    int n_assets() const { return static_cast<int>(assets.size()); }

    bool operator==(const Scenario&) const = default;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool passed() const;
    std::string summary() const;  // one line per check
};

// Runs every admissibility check: positive threshold, initial capital
// ratios, risk-weights inside the admissible interval per asset, demand
// monotonicity condition, market caps covering total holdings, and curve
// normalisation. Side-effect free.
ValidationReport validate(const Scenario& scenario);

// Throws InadmissibleScenario listing the failed checks.
void require_valid(const Scenario& scenario);

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace firesale
