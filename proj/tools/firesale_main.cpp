// Command-line front end: scenario validation, simulation, analytical
// bounds, probabilistic stress tests, and the bundled case studies.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical failure,
// 4 I/O or parse failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "firesale/bounds.hpp"
#include "firesale/case_studies.hpp"
#include "firesale/emit.hpp"
#include "firesale/errors.hpp"
#include "firesale/scenario.hpp"
#include "firesale/simulator.hpp"
#include "firesale/stochastic.hpp"

namespace {

namespace fs = std::filesystem;
using namespace firesale;

std::string join(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir = ".";
    double step = 0.0;
    int grid = 501;
    double tol = 1e-8;
    std::uint64_t seed = 42;

    IntegratorConfig integrator() const {
        IntegratorConfig cfg;
        cfg.base_step = step;
        cfg.output_grid = grid;
        cfg.constraint_tol = tol;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_scenario = true) {
    auto* s = cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file");
    if (needs_scenario) s->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--step", opts.step, "integrator base step (default horizon/2000)");
    cmd->add_option("--grid", opts.grid, "output sample count");
    cmd->add_option("--tol", opts.tol, "active-bank constraint tolerance");
    cmd->add_option("--seed", opts.seed, "random seed");
}

std::vector<StressDistribution> stress_from_flags(const Scenario& scn, double mu,
                                                  const std::string& stress_file) {
    if (!stress_file.empty()) {
        std::ifstream in(stress_file);
        if (!in) throw IoError("cannot open stress file '" + stress_file + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(buf.str());
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("stress file parse error: ") + e.what());
        }
        std::vector<StressDistribution> stress;
        for (const auto& item : doc) {
            const std::string kind = item.at("kind").get<std::string>();
            if (kind == "exponential-rate") {
                stress.push_back(StressDistribution::exponential_rate(item.at("mu").get<double>()));
            } else if (kind == "tabulated-quantile") {
                stress.push_back(StressDistribution::tabulated_quantile(
                    item.at("probs").get<std::vector<double>>(),
                    item.at("values").get<std::vector<double>>()));
            } else {
                throw ParseError("unknown stress kind '" + kind + "'");
            }
        }
        if (static_cast<int>(stress.size()) == 1 && scn.n_assets() > 1) {
            stress.resize(scn.n_assets(), stress.front());
        }
        return stress;
    }
    return std::vector<StressDistribution>(scn.n_assets(),
                                           StressDistribution::exponential_rate(mu));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fire-sale contagion simulator and stress-testing engine"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string case_name;
    double mu = probability_stress_rate();
    std::string stress_file;
    double eval_time = -1.0;
    std::vector<double> q_star;
    int samples = 10000;
    CaseStudyOptions cs;

    auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
    add_common(validate_cmd, opts);

    auto* simulate_cmd =
        app.add_subcommand("simulate", "integrate the system; writes trajectory.csv");
    add_common(simulate_cmd, opts);

    auto* bounds_cmd =
        app.add_subcommand("bounds", "analytical worst-case schedule; writes bounds.csv");
    add_common(bounds_cmd, opts);

    auto* prob_cmd = app.add_subcommand(
        "prob-bound", "analytic lower bound on P(q(t) >= q*) under random stress rates");
    add_common(prob_cmd, opts);
    prob_cmd->add_option("--mu", mu, "exponential rate of the stress distribution");
    prob_cmd->add_option("--stress-file", stress_file, "per-asset stress JSON");
    prob_cmd->add_option("--t", eval_time, "evaluation time (default horizon)");
    prob_cmd->add_option("--q-star", q_star, "price levels, one per asset")->required();

    auto* mc_cmd = app.add_subcommand(
        "monte-carlo", "empirical distribution of q(t) under random stress; writes cdf.csv");
    add_common(mc_cmd, opts);
    mc_cmd->add_option("--mu", mu, "exponential rate of the stress distribution");
    mc_cmd->add_option("--stress-file", stress_file, "per-asset stress JSON");
    mc_cmd->add_option("--t", eval_time, "evaluation time (default horizon)");
    mc_cmd->add_option("--samples", samples, "number of draws");

    auto* case_cmd = app.add_subcommand("case-study", "run a bundled case study");
    add_common(case_cmd, opts, false);
    case_cmd->add_option("--name", case_name, "ex-20bank | ex-probability | ex-leverage | ex-2asset")
        ->required();
    case_cmd->add_option("--b", cs.b_values, "impact parameters (ex-20bank)");
    case_cmd->add_option("--zeta-step", cs.zeta_step, "diversification grid step (ex-2asset)");
    case_cmd->add_option("--lambda-min", cs.lambda_min, "leverage grid start (ex-leverage)");
    case_cmd->add_option("--lambda-max", cs.lambda_max, "leverage grid end (ex-leverage)");
    case_cmd->add_option("--lambda-step", cs.lambda_step, "leverage grid step (ex-leverage)");
    case_cmd->add_option("--b-probability", cs.b_probability, "impact parameter (ex-probability)");
    case_cmd->add_option("--samples", cs.samples, "Monte Carlo draws (ex-probability)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        if (*validate_cmd) {
            const Scenario scn = load_scenario(opts.scenario_path);
            const ValidationReport report = validate(scn);
            std::cout << report.summary();
            if (!report.passed()) {
                std::cout << "scenario INVALID\n";
                return 2;
            }
            std::cout << "scenario valid\n";
            return 0;
        }

        if (*simulate_cmd) {
            const Scenario scn = load_scenario(opts.scenario_path);
            ensure_dir(opts.out_dir);
            const Trajectory traj = simulate(scn, opts.integrator());
            const BoundSchedule sched = build_bound_schedule(scn);
            write_trajectory_csv(traj, scn, join(opts.out_dir, "trajectory.csv"));
            write_hitting_times_csv(traj, sched, join(opts.out_dir, "hitting_times.csv"));
            std::cout << "wrote trajectory.csv and hitting_times.csv to " << opts.out_dir << '\n';
            return 0;
        }

        if (*bounds_cmd) {
            const Scenario scn = load_scenario(opts.scenario_path);
            ensure_dir(opts.out_dir);
            const BoundSchedule sched = build_bound_schedule(scn);
            write_schedule_csv(sched, join(opts.out_dir, "bounds.csv"));
            std::cout << "wrote bounds.csv to " << opts.out_dir
                      << (scn.n_assets() > 1
                              ? " (multi-asset bounds are typically very weak)"
                              : "")
                      << '\n';
            return 0;
        }

        if (*prob_cmd) {
            const Scenario scn = load_scenario(opts.scenario_path);
            const double t = eval_time > 0.0 ? eval_time : scn.horizon;
            const auto stress = stress_from_flags(scn, mu, stress_file);
            const BoundSchedule sched = build_bound_schedule(scn);
            const double lower = price_cdf_lower_bound(sched, scn, t, q_star, stress);
            std::cout << "P(q(" << t << ") >= q*) >= " << lower << '\n'
                      << "P(q(" << t << ") <= q*) <= " << 1.0 - lower << '\n';
            return 0;
        }

        if (*mc_cmd) {
            const Scenario scn = load_scenario(opts.scenario_path);
            ensure_dir(opts.out_dir);
            const double t = eval_time > 0.0 ? eval_time : scn.horizon;
            const auto stress = stress_from_flags(scn, mu, stress_file);
            const BoundSchedule sched = build_bound_schedule(scn);
            const MonteCarloResult mc =
                monte_carlo(scn, stress, t, samples, opts.seed, opts.integrator());
            const double q_low = mc.q_sorted[0].front() * (1.0 - 1e-9);
            std::vector<CdfRow> rows;
            const int grid_points = 201;
            for (int j = 0; j < grid_points; ++j) {
                const double q =
                    std::exp(std::log(q_low) * (1.0 - static_cast<double>(j) / (grid_points - 1)));
                CdfRow row;
                row.q_star = q;
                row.empirical_p = mc.prob_price_at_most(0, q);
                std::vector<double> qs(scn.n_assets(), q);
                row.analytic_bound_p = 1.0 - price_cdf_lower_bound(sched, scn, t, qs, stress);
                row.dkw_lo = std::max(0.0, row.empirical_p - mc.dkw_radius);
                row.dkw_hi = std::min(1.0, row.empirical_p + mc.dkw_radius);
                rows.push_back(row);
            }
            write_cdf_csv(rows, join(opts.out_dir, "cdf.csv"));
            std::cout << "wrote cdf.csv to " << opts.out_dir << " (" << samples
                      << " draws, DKW radius " << mc.dkw_radius << ")\n";
            return 0;
        }

        if (*case_cmd) {
            cs.out_dir = opts.out_dir;
            cs.seed = opts.seed;
            cs.integrator = opts.integrator();
            std::cout << run_case_study(case_name, cs);
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
