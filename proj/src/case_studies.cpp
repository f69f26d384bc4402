#include "firesale/case_studies.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "firesale/bounds.hpp"
#include "firesale/emit.hpp"
#include "firesale/errors.hpp"

namespace firesale {

namespace fs = std::filesystem;

Scenario make_20bank_scenario(double b) {
    Scenario scn;
    scn.horizon = 1.0;
    scn.regulation.theta_min = 0.1;
    AssetSpec asset;
    asset.alpha = 5.0;
    asset.market_cap = 40.0;
    asset.demand.time_part = TimeDecay::exponential(-std::log(0.95), scn.horizon);
    asset.demand.impact_part = b > 0.0 ? ImpactCurve::exponential(b) : ImpactCurve::none();
    scn.assets.push_back(asset);
    for (int i = 0; i < 20; ++i) {
        BankBook bank;
        bank.liquid = 2.0 * i / 475.0;
        bank.holdings = {2.0};
        bank.liabilities = 1.0;
        scn.banks.push_back(bank);
    }
    return scn;
}

double probability_stress_rate() {
    return std::log(20.0) / (std::log(20.0) - std::log(19.0));
}

Scenario make_leverage_scenario(double lambda_max) {
    Scenario scn;
    scn.horizon = 1.0;
    scn.regulation.theta_min = 1.0 / lambda_max;
    AssetSpec asset;
    asset.alpha = 1.0;
    asset.market_cap = lambda_max;
    asset.demand.time_part = TimeDecay::exponential(-std::log(0.95), scn.horizon);
    asset.demand.impact_part =
        ImpactCurve::exponential(-std::log(0.9) / (1.0 - 1.0 / std::log(0.9)));
    scn.assets.push_back(asset);
    BankBook bank;
    bank.holdings = {lambda_max};
    bank.liabilities = lambda_max - 1.0;
    bank.nontradable_weight = 1.0;
    scn.banks.push_back(bank);
    return scn;
}

Scenario make_2asset_scenario(double zeta) {
    Scenario scn;
    scn.horizon = 1.0;
    scn.regulation.theta_min = 0.1;
    for (int k = 0; k < 2; ++k) {
        AssetSpec asset;
        asset.alpha = 5.0;
        asset.market_cap = 2.0;
        asset.demand.time_part = k == 0
                                     ? TimeDecay::exponential(-std::log(0.95), scn.horizon)
                                     : TimeDecay::constant();
        asset.demand.impact_part = ImpactCurve::exponential(0.4950);
        scn.assets.push_back(asset);
    }
    BankBook bank1, bank2;
    bank1.holdings = {2.0 - zeta, zeta};
    bank2.holdings = {zeta, 2.0 - zeta};
    bank1.liabilities = bank2.liabilities = 0.98;
    scn.banks.push_back(bank1);
    scn.banks.push_back(bank2);
    return scn;
}

namespace {

std::string join(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

std::string run_20bank(const CaseStudyOptions& opts) {
    ensure_dir(opts.out_dir);
    std::vector<double> bs = opts.b_values;
    if (bs.empty()) bs = {0.0, 0.7 / 40.0, 1.0 / (40.0 + 1e-8)};

    std::ostringstream summary;
    summary << "firm";
    for (double b : bs) summary << "  tau(b=" << b << ")  bound";
    summary << '\n';

    std::vector<Trajectory> trajectories;
    std::vector<BoundSchedule> schedules;
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
        const Scenario scn = make_20bank_scenario(bs[bi]);
        save_scenario(scn, join(opts.out_dir, "scenario_b" + std::to_string(bi) + ".json"));
        Trajectory traj = simulate(scn, opts.integrator);
        BoundSchedule sched = build_bound_schedule(scn);
        write_trajectory_csv(traj, scn,
                             join(opts.out_dir, "trajectory_b" + std::to_string(bi) + ".csv"));
        write_hitting_times_csv(
            traj, sched, join(opts.out_dir, "hitting_times_b" + std::to_string(bi) + ".csv"));
        write_schedule_csv(sched, join(opts.out_dir, "bounds_b" + std::to_string(bi) + ".csv"));
        trajectories.push_back(std::move(traj));
        schedules.push_back(std::move(sched));
    }

    for (int i = 0; i < 20; ++i) {
        summary << (i + 1);
        for (std::size_t bi = 0; bi < bs.size(); ++bi) {
            const auto& tau = trajectories[bi].hitting_times[i];
            summary << "  " << (tau ? std::to_string(*tau) : std::string("--"));
            double bound = std::numeric_limits<double>::infinity();
            for (int r = 0; r < schedules[bi].n_ranked(); ++r) {
                if (schedules[bi].order[r] == i) bound = schedules[bi].tau_at(r, 0);
            }
            summary << "  " << (std::isfinite(bound) ? std::to_string(bound) : std::string("--"));
        }
        summary << '\n';
    }
    return summary.str();
}

std::string run_probability(const CaseStudyOptions& opts) {
    ensure_dir(opts.out_dir);
    const Scenario scn = make_20bank_scenario(opts.b_probability);
    save_scenario(scn, join(opts.out_dir, "scenario.json"));
    const BoundSchedule sched = build_bound_schedule(scn);
    const std::vector<StressDistribution> stress(
        1, StressDistribution::exponential_rate(probability_stress_rate()));

    const double t = scn.horizon;
    const MonteCarloResult mc =
        monte_carlo(scn, stress, t, opts.samples, opts.seed, opts.integrator);

    const double q_low = mc.q_sorted[0].front() * (1.0 - 1e-9);
    const int grid_points = 201;
    std::vector<CdfRow> rows(grid_points);
    for (int j = 0; j < grid_points; ++j) {
        const double q_star =
            std::exp(std::log(q_low) * (1.0 - static_cast<double>(j) / (grid_points - 1)));
        CdfRow row;
        row.q_star = q_star;
        row.empirical_p = mc.prob_price_at_most(0, q_star);
        row.analytic_bound_p =
            1.0 - price_cdf_lower_bound(sched, scn, t, {q_star}, stress);
        row.dkw_lo = std::max(0.0, row.empirical_p - mc.dkw_radius);
        row.dkw_hi = std::min(1.0, row.empirical_p + mc.dkw_radius);
        rows[j] = row;
    }
    write_cdf_csv(rows, join(opts.out_dir, "cdf.csv"));

    std::ostringstream summary;
    summary << "samples = " << opts.samples << ", seed = " << opts.seed << '\n'
            << "P(q(1) <= 0.9): empirical " << mc.prob_price_at_most(0, 0.9) << ", bound "
            << 1.0 - price_cdf_lower_bound(sched, scn, t, {0.9}, stress) << '\n'
            << "P(q(1) <= 0.8): empirical " << mc.prob_price_at_most(0, 0.8) << ", bound "
            << 1.0 - price_cdf_lower_bound(sched, scn, t, {0.8}, stress) << '\n'
            << "no-impact control P(f_t(1) <= 0.9): " << mc.prob_ft_at_most(0, 0.9) << '\n';
    return summary.str();
}

std::string run_leverage(const CaseStudyOptions& opts) {
    ensure_dir(opts.out_dir);
    const std::string path = join(opts.out_dir, "leverage.csv");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "lambda_max,pi_terminal,holdings_terminal,price_terminal,pi_bound,price_bound\n";

    double peak_pi = 0.0, best_holdings = 0.0, best_lambda = 0.0;
    for (double lam = opts.lambda_min; lam <= opts.lambda_max + 1e-12; lam += opts.lambda_step) {
        const Scenario scn = make_leverage_scenario(lam);
        const Trajectory traj = simulate(scn, opts.integrator);
        const BoundSchedule sched = build_bound_schedule(scn);
        const double pi_T = traj.terminal().pi[0];
        const double q_T = traj.terminal().q[0];
        const double held = lam * (1.0 - pi_T);
        const BoundedState bounded = bounded_liquidations(sched, scn.horizon);
        out << format_double(lam) << ',' << format_double(pi_T) << ',' << format_double(held)
            << ',' << format_double(q_T) << ',' << format_double(bounded.pi_tilde[0]) << ','
            << format_double(bounded_price(sched, scn.horizon, 0)) << '\n';
        peak_pi = std::max(peak_pi, pi_T);
        if (held > best_holdings) {
            best_holdings = held;
            best_lambda = lam;
        }
    }
    if (!out) throw IoError("failed writing '" + path + "'");

    std::ostringstream summary;
    summary << "peak terminal liquidation fraction: " << peak_pi << '\n'
            << "terminal holdings maximised at lambda_max = " << best_lambda << " ("
            << best_holdings << " units)\n";
    return summary.str();
}

std::string run_2asset(const CaseStudyOptions& opts) {
    ensure_dir(opts.out_dir);
    const std::string path = join(opts.out_dir, "diversification.csv");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "zeta,q1_terminal,q2_terminal,total_market_cap,pi1_terminal,pi2_terminal,tau_1,tau_2\n";

    double best_mcap = -1.0, best_zeta = 0.0;
    for (double zeta = 0.0; zeta <= 1.0 + 1e-12; zeta += opts.zeta_step) {
        const Scenario scn = make_2asset_scenario(std::min(zeta, 1.0));
        const Trajectory traj = simulate(scn, opts.integrator);
        const SystemState& end = traj.terminal();
        const double mcap = 2.0 * end.q[0] + 2.0 * end.q[1];
        out << format_double(zeta) << ',' << format_double(end.q[0]) << ','
            << format_double(end.q[1]) << ',' << format_double(mcap) << ','
            << format_double(end.pi[0]) << ',' << format_double(end.pi[1]);
        for (int i = 0; i < 2; ++i) {
            out << ',';
            if (traj.hitting_times[i]) {
                out << format_double(*traj.hitting_times[i]);
            } else {
                out << "never";
            }
        }
        out << '\n';
        if (mcap > best_mcap) {
            best_mcap = mcap;
            best_zeta = zeta;
        }
    }
    if (!out) throw IoError("failed writing '" + path + "'");

    std::ostringstream summary;
    summary << "total terminal market cap maximised at zeta = " << best_zeta << " (" << best_mcap
            << ")\n";
    return summary.str();
}

}  // namespace

std::string run_case_study(const std::string& name, const CaseStudyOptions& opts) {
    if (name == "ex-20bank") return run_20bank(opts);
    if (name == "ex-probability") return run_probability(opts);
    if (name == "ex-leverage") return run_leverage(opts);
    if (name == "ex-2asset") return run_2asset(opts);
    throw UnknownCaseStudy("unknown case study '" + name +
                           "' (expected ex-20bank, ex-probability, ex-leverage, ex-2asset)");
}

}  // namespace firesale
