#include "firesale/core.hpp"

#include <algorithm>
#include <cmath>

#include "firesale/errors.hpp"

namespace firesale {

double capital_ratio(const BankBook& book, double pi, const std::vector<double>& q, double psi,
                     const std::vector<AssetSpec>& assets, const Regulation& /*reg*/) {
    double marked = 0.0, rwa = 0.0;
    for (std::size_t k = 0; k < assets.size(); ++k) {
        const double remaining = book.holdings[k] * (1.0 - pi);
        marked += remaining * q[k];
        rwa += assets[k].alpha * remaining * q[k];
    }
    rwa += book.nontradable_weight * book.nontradable;
    if (rwa <= 0.0) {
        throw ZeroRiskWeightedAssets("capital ratio undefined: bank holds no risky assets");
    }
    const double capital =
        book.liquid + psi + marked + book.nontradable - book.liabilities;
    return std::max(capital, 0.0) / rwa;
}

double threshold_price(const BankBook& book, const std::vector<AssetSpec>& assets,
                       const Regulation& reg) {
    double denom = 0.0;
    for (std::size_t k = 0; k < assets.size(); ++k) {
        denom += (1.0 - assets[k].alpha * reg.theta_min) * book.holdings[k];
    }
    if (denom <= 0.0) {
        throw NoTradableAssets("threshold price undefined: no tradable holdings");
    }
    const double shortfall = book.liabilities - book.liquid -
                             (1.0 - book.nontradable_weight * reg.theta_min) * book.nontradable;
    return shortfall / denom;
}

double activation_margin(const BankBook& book, const std::vector<AssetSpec>& assets,
                         const Regulation& reg, const std::vector<double>& q) {
    double value = 0.0;
    for (std::size_t k = 0; k < assets.size(); ++k) {
        value += (1.0 - assets[k].alpha * reg.theta_min) * book.holdings[k] * q[k];
    }
    return value - (book.liabilities - book.liquid -
                    (1.0 - book.nontradable_weight * reg.theta_min) * book.nontradable);
}

ThresholdLadder make_threshold_ladder(const std::vector<BankBook>& banks,
                                      const std::vector<AssetSpec>& assets,
                                      const Regulation& reg) {
    ThresholdLadder ladder;
    std::vector<std::pair<double, int>> entries;
    for (std::size_t i = 0; i < banks.size(); ++i) {
        double denom = 0.0;
        for (std::size_t k = 0; k < assets.size(); ++k) {
            denom += (1.0 - assets[k].alpha * reg.theta_min) * banks[i].holdings[k];
        }
        if (denom <= 0.0) continue;
        const double qb = threshold_price(banks[i], assets, reg);
        if (qb <= 0.0) continue;
        entries.emplace_back(qb, static_cast<int>(i));
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.first > b.first;  // decreasing q_bar, ties keep input order
    });
    for (const auto& [qb, idx] : entries) {
        ladder.order.push_back(idx);
        ladder.qbar.push_back(qb);
    }
    return ladder;
}

}  // namespace firesale
