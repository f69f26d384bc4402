#include "firesale/emit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "firesale/errors.hpp"

namespace firesale {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_trajectory_csv(const Trajectory& traj, const Scenario& scn, const std::string& path) {
    std::ofstream out = open_out(path);
    const int n = scn.n_banks(), m = scn.n_assets();
    out << "t";
    for (int k = 0; k < m; ++k) out << ",q_" << (k + 1);
    for (int i = 0; i < n; ++i) {
        out << ",pi_" << (i + 1) << ",psi_" << (i + 1) << ",theta_" << (i + 1) << ",active_"
            << (i + 1);
    }
    out << '\n';
    for (const SystemState& s : traj.samples) {
        out << format_double(s.t);
        for (int k = 0; k < m; ++k) out << ',' << format_double(s.q[k]);
        for (int i = 0; i < n; ++i) {
            const double theta =
                capital_ratio(scn.banks[i], s.pi[i], s.q, s.psi[i], scn.assets, scn.regulation);
            out << ',' << format_double(s.pi[i]) << ',' << format_double(s.psi[i]) << ','
                << format_double(theta) << ',' << (s.active[i] ? 1 : 0);
        }
        out << '\n';
    }
    finish(out, path);
}

void write_hitting_times_csv(const Trajectory& traj, const BoundSchedule& schedule,
                             const std::string& path) {
    std::ofstream out = open_out(path);
    out << "bank,tau,tau_bound\n";
    const int n = static_cast<int>(traj.hitting_times.size());
    std::vector<double> bound_tau(n, std::numeric_limits<double>::infinity());
    for (int r = 0; r < schedule.n_ranked(); ++r) {
        double earliest = std::numeric_limits<double>::infinity();
        for (int l = 0; l < schedule.n_assets; ++l) {
            earliest = std::min(earliest, schedule.tau_at(r, l));
        }
        bound_tau[schedule.order[r]] = earliest;
    }
    for (int i = 0; i < n; ++i) {
        out << (i + 1) << ',';
        if (traj.hitting_times[i]) {
            out << format_double(*traj.hitting_times[i]);
        } else {
            out << "never";
        }
        out << ',';
        if (std::isfinite(bound_tau[i])) {
            out << format_double(bound_tau[i]);
        } else {
            out << "never";
        }
        out << '\n';
    }
    finish(out, path);
}

void write_schedule_csv(const BoundSchedule& schedule, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "rank,bank,asset,q_bar,tau_bound,f_level,lambda,nu,exponent\n";
    for (int r = 0; r < schedule.n_ranked(); ++r) {
        for (int l = 0; l < schedule.n_assets; ++l) {
            out << (r + 1) << ',' << (schedule.order[r] + 1) << ',' << (l + 1) << ','
                << format_double(schedule.qbar[r]) << ',';
            const double tau = schedule.tau_at(r, l);
            if (std::isfinite(tau)) {
                out << format_double(tau);
            } else {
                out << "never";
            }
            out << ',' << format_double(schedule.level_at(r, l)) << ','
                << format_double(schedule.lambda_at(r, l)) << ','
                << format_double(schedule.nu_at(r, l)) << ','
                << format_double(schedule.exponent_at(r, l)) << '\n';
        }
    }
    finish(out, path);
}

void write_cdf_csv(const std::vector<CdfRow>& rows, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "q_star,empirical_p,analytic_bound_p,dkw_lo,dkw_hi\n";
    for (const CdfRow& r : rows) {
        out << format_double(r.q_star) << ',' << format_double(r.empirical_p) << ','
            << format_double(r.analytic_bound_p) << ',' << format_double(r.dkw_lo) << ','
            << format_double(r.dkw_hi) << '\n';
    }
    finish(out, path);
}

}  // namespace firesale
