#include "firesale/dynamics.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "firesale/errors.hpp"

namespace firesale {

DemandEval eval_demand(double t, const std::vector<double>& pi, const Scenario& scn) {
    const int n = scn.n_banks(), m = scn.n_assets();
    DemandEval ev;
    ev.gamma_total.assign(m, 0.0);
    ev.ft.resize(m);
    ev.ft_prime.resize(m);
    ev.fg.resize(m);
    ev.fg_prime.resize(m);
    ev.q.resize(m);
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < n; ++i) ev.gamma_total[k] += scn.banks[i].holdings[k] * pi[i];
        const DemandCurve& curve = scn.assets[k].demand;
        ev.ft[k] = curve.time_part.value(t);
        ev.ft_prime[k] = curve.time_part.derivative(t);
        ev.fg[k] = curve.impact_part.value(ev.gamma_total[k]);
        ev.fg_prime[k] = curve.impact_part.derivative(ev.gamma_total[k]);
        ev.q[k] = ev.ft[k] * ev.fg[k];
    }
    return ev;
}

namespace {

// Fraction-normalised coupling matrix: row i is divided by the bank's
// risk-weighted tradable value so that pi_dot = -Z_frac * q_dot.
std::vector<double> fraction_z(const DemandEval& ev, const std::vector<double>& pi,
                               const std::vector<std::uint8_t>& active, const Scenario& scn) {
    const int n = scn.n_banks(), m = scn.n_assets();
    const double theta = scn.regulation.theta_min;
    std::vector<double> z(static_cast<std::size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        double weighted = 0.0;  // sum_l alpha_l s_il q_l
        for (int l = 0; l < m; ++l) weighted += scn.assets[l].alpha * scn.banks[i].holdings[l] * ev.q[l];
        if (weighted <= 0.0) continue;  // nothing tradable left to sell
        for (int k = 0; k < m; ++k) {
            const double remaining = scn.banks[i].holdings[k] * (1.0 - pi[i]);
            z[static_cast<std::size_t>(i) * m + k] =
                (1.0 - scn.assets[k].alpha * theta) * remaining / (theta * weighted);
        }
    }
    return z;
}

}  // namespace

std::vector<double> compute_Z(double t, const std::vector<double>& pi,
                              const std::vector<std::uint8_t>& active, const Scenario& scn) {
    const int n = scn.n_banks(), m = scn.n_assets();
    const double theta = scn.regulation.theta_min;
    const DemandEval ev = eval_demand(t, pi, scn);
    std::vector<double> z(static_cast<std::size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (int k = 0; k < m; ++k) {
            const double at = scn.assets[k].alpha * theta;
            const double remaining = scn.banks[i].holdings[k] * (1.0 - pi[i]);
            z[static_cast<std::size_t>(i) * m + k] =
                (1.0 - at) * remaining / (at * ev.ft[k] * ev.fg[k]);
        }
    }
    return z;
}

std::vector<double> compute_lambda(double t, const std::vector<double>& pi,
                                   const std::vector<std::uint8_t>& active, const Scenario& scn,
                                   double lambda_floor) {
    const int n = scn.n_banks(), m = scn.n_assets();
    const double theta = scn.regulation.theta_min;
    const DemandEval ev = eval_demand(t, pi, scn);
    std::vector<double> lambda(m);
    for (int k = 0; k < m; ++k) {
        double remaining_active = 0.0;
        for (int i = 0; i < n; ++i) {
            if (active[i]) remaining_active += scn.banks[i].holdings[k] * (1.0 - pi[i]);
        }
        const double at = scn.assets[k].alpha * theta;
        lambda[k] = 1.0 + (1.0 - at) / at * remaining_active * ev.fg_prime[k] / ev.fg[k];
        if (lambda[k] < lambda_floor) {
            throw NearSingularRegime("Lambda for asset " + std::to_string(k + 1) +
                                     " fell to " + std::to_string(lambda[k]) +
                                     "; risk-weights too low for this liquidity");
        }
    }
    return lambda;
}

std::vector<double> sherman_morrison_solve(const std::vector<double>& z_col, double scale,
                                           const std::vector<double>& rhs_vec) {
    double z_sum = 0.0, b_sum = 0.0;
    for (double z : z_col) z_sum += z;
    for (double b : rhs_vec) b_sum += b;
    const double denom = 1.0 + scale * z_sum;
    if (std::fabs(denom) < 1e-14) {
        throw SingularUpdate("rank-1 update denominator vanished");
    }
    std::vector<double> x(rhs_vec);
    const double coeff = scale * b_sum / denom;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= coeff * z_col[i];
    return x;
}

Derivatives rhs(double t, const std::vector<double>& pi,
                const std::vector<std::uint8_t>& active, const Scenario& scn,
                double lambda_floor) {
    const int n = scn.n_banks(), m = scn.n_assets();
    const DemandEval ev = eval_demand(t, pi, scn);
    const std::vector<double> lambda = compute_lambda(t, pi, active, scn, lambda_floor);
    const double theta = scn.regulation.theta_min;

    Derivatives d;
    d.pi_dot.assign(n, 0.0);
    d.q_dot.assign(m, 0.0);
    d.psi_dot.assign(n, 0.0);

    if (m == 1) {
        const double at = scn.assets[0].alpha * theta;
        d.q_dot[0] = ev.ft_prime[0] * ev.fg[0] / lambda[0];
        // gamma_dot via the rank-1 solve on the unit-coupled system.
        std::vector<double> z32(n, 0.0), b(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (!active[i]) continue;
            const double remaining = scn.banks[i].holdings[0] * (1.0 - pi[i]);
            z32[i] = (1.0 - at) * remaining / (at * ev.q[0]);
            b[i] = -z32[i] * ev.ft_prime[0] * ev.fg[0];
        }
        const std::vector<double> gamma_dot =
            sherman_morrison_solve(z32, ev.ft[0] * ev.fg_prime[0], b);
        for (int i = 0; i < n; ++i) {
            if (!active[i] || scn.banks[i].holdings[0] <= 0.0) continue;
            d.pi_dot[i] = gamma_dot[i] / scn.banks[i].holdings[0];
            d.psi_dot[i] = gamma_dot[i] * ev.q[0];
        }
        return d;
    }

    const std::vector<double> zf = fraction_z(ev, pi, active, scn);
    std::vector<int> act;
    for (int i = 0; i < n; ++i) {
        if (active[i]) act.push_back(i);
    }
    const int na = static_cast<int>(act.size());

    if (na > 0) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(na, na);
        Eigen::VectorXd b(na);
        for (int r = 0; r < na; ++r) {
            const int i = act[r];
            double rhs_i = 0.0;
            for (int k = 0; k < m; ++k) {
                rhs_i -= zf[static_cast<std::size_t>(i) * m + k] * ev.ft_prime[k] * ev.fg[k];
            }
            b[r] = rhs_i;
            for (int c = 0; c < na; ++c) {
                const int j = act[c];
                double coupling = 0.0;
                for (int k = 0; k < m; ++k) {
                    coupling += zf[static_cast<std::size_t>(i) * m + k] * ev.ft[k] *
                                ev.fg_prime[k] * scn.banks[j].holdings[k];
                }
                A(r, c) += coupling;
            }
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        const Eigen::VectorXd x = lu.solve(b);
        if ((A * x - b).norm() > 1e-8 * std::max(1.0, b.norm())) {
            throw LinearSolveFailure("regime system solve failed (near-singular matrix)");
        }
        for (int r = 0; r < na; ++r) d.pi_dot[act[r]] = x[r];
    }

    // Price derivatives from the m x m companion system
    //   (I + diag(f_t) diag(f'_G) s^T Z) q_dot = diag(f'_t) f_G.
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rq(m);
    for (int k = 0; k < m; ++k) {
        rq[k] = ev.ft_prime[k] * ev.fg[k];
        for (int l = 0; l < m; ++l) {
            double acc = 0.0;
            for (int i : act) {
                acc += scn.banks[i].holdings[k] * zf[static_cast<std::size_t>(i) * m + l];
            }
            B(k, l) += ev.ft[k] * ev.fg_prime[k] * acc;
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> luq(B);
    const Eigen::VectorXd qd = luq.solve(rq);
    if ((B * qd - rq).norm() > 1e-8 * std::max(1.0, rq.norm())) {
        throw LinearSolveFailure("price companion solve failed (near-singular matrix)");
    }
    for (int k = 0; k < m; ++k) d.q_dot[k] = qd[k];

    for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        double value = 0.0;
        for (int k = 0; k < m; ++k) value += scn.banks[i].holdings[k] * ev.q[k];
        d.psi_dot[i] = d.pi_dot[i] * value;
    }
    return d;
}

RegimeRhs analyze_regime(double t, const std::vector<double>& pi,
                         const std::vector<std::uint8_t>& active, const Scenario& scn,
                         double lambda_floor) {
    const int n = scn.n_banks(), m = scn.n_assets();
    RegimeRhs regime;
    regime.active = active;
    regime.z = compute_Z(t, pi, active, scn);
    regime.lambda = compute_lambda(t, pi, active, scn, lambda_floor);

    const DemandEval ev = eval_demand(t, pi, scn);
    const std::vector<double> zf = fraction_z(ev, pi, active, scn);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(m, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < m; ++k) {
                acc += zf[static_cast<std::size_t>(i) * m + k] * ev.ft[k] * ev.fg_prime[k] *
                       scn.banks[j].holdings[k];
            }
            A(i, j) += acc;
        }
    }
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += scn.banks[i].holdings[k] * zf[static_cast<std::size_t>(i) * m + l];
            }
            B(k, l) += ev.ft[k] * ev.fg_prime[k] * acc;
        }
    }
    regime.det_bank_system = A.determinant();
    regime.det_asset_system = B.determinant();
    return regime;
}

}  // namespace firesale
