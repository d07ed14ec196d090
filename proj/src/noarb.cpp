#include "dtsm/noarb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtsm/errors.hpp"
#include "dtsm/math/rng.hpp"

namespace dtsm::noarb {

namespace {

double norm2(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

void add_scaled(Vector& acc, const Vector& v, double w) {
    if (acc.size() < v.size()) acc.resize(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
}

} // namespace

BarIntegrals bar_integrals(const HJMCoefficients& coef, double t, double T) {
    require_range(t <= T, "bar integrals: need t <= T");
    require(coef.a && coef.b, "bar integrals: a and b must be supplied");
    require(coef.schedule.empty() || (coef.alpha && coef.beta),
            "bar integrals: alpha and beta must be supplied with a schedule");
    BarIntegrals out;
    out.bbar.assign(static_cast<std::size_t>(coef.n_factors), 0.0);
    out.betabar.assign(static_cast<std::size_t>(coef.n_factors), 0.0);

    if (T > t) {
        const int n = std::max(1, coef.quad_points);
        const double h = (T - t) / n;
        for (int k = 0; k <= n; ++k) {
            const double u = k == n ? T : t + k * h;
            const double w = (k == 0 || k == n) ? 0.5 * h : h;
            out.abar += w * coef.a(t, u);
            add_scaled(out.bbar, coef.b(t, u), w);
        }
    }
    for (std::size_t i = 0; i < coef.schedule.size(); ++i) {
        const double u = coef.schedule[i].time;
        if (u > t && u <= T && coef.schedule.announce_time(i) <= t) {
            out.alphabar += coef.alpha(t, u);
            add_scaled(out.betabar, coef.beta(t, u), 1.0);
        }
    }
    return out;
}

VerificationReport verify_general_drift(const HJMCoefficients& coef,
                                        const core::CompensatorSpec& spec,
                                        const core::ShortRate& r,
                                        const std::function<double(double)>& f_diag,
                                        std::span<const std::pair<double, double>> grid,
                                        double tol) {
    require(!grid.empty(), "verify: empty grid");
    require(static_cast<bool>(f_diag), "verify: f_diag must be supplied");
    require(coef.schedule.empty() || static_cast<bool>(coef.g),
            "verify: missing g values at the risky diagonal points");

    ConditionReport dc1{"dc1", 0.0, 0.0, 0.0, tol, false};
    for (const auto& [t, T] : grid) {
        (void)T;
        const double res = std::abs(f_diag(t) - r(t) - spec.hazard()(t));
        if (res > dc1.max_residual) {
            dc1.max_residual = res;
            dc1.argmax_t = t;
            dc1.argmax_T = t;
        }
    }
    for (std::size_t i = 0; i < spec.schedule().size(); ++i) {
        const auto& e = spec.schedule()[i];
        const double res = std::abs(coef.g(e.time, e.time) + std::log1p(-e.gamma));
        if (res > dc1.max_residual) {
            dc1.max_residual = res;
            dc1.argmax_t = e.time;
            dc1.argmax_T = e.time;
        }
    }
    dc1.pass = dc1.max_residual <= tol;

    ConditionReport dc2{"dc2", 0.0, 0.0, 0.0, tol, false};
    for (const auto& [t, T] : grid) {
        const BarIntegrals bars = bar_integrals(coef, t, T);
        Vector vol = bars.bbar;
        add_scaled(vol, bars.betabar, 1.0);
        double rhs = 0.5 * norm2(vol);
        for (const auto& atom : coef.nu)
            if (atom.u > t && atom.u <= T)
                rhs += atom.weight(t) * std::expm1(-coef.g(t, atom.u));
        const double res = std::abs(bars.abar + bars.alphabar - rhs);
        if (res > dc2.max_residual) {
            dc2.max_residual = res;
            dc2.argmax_t = t;
            dc2.argmax_T = T;
        }
    }
    dc2.pass = dc2.max_residual <= tol;

    return {{dc1, dc2}};
}

VerificationReport verify_merton_drift(const MertonCoefficients& coef,
                                       const core::CompensatorSpec& spec,
                                       const core::ShortRate& r,
                                       std::span<const std::pair<double, double>> grid,
                                       double tol) {
    require(!grid.empty(), "verify: empty grid");
    require(static_cast<bool>(coef.f_diag), "verify: f_diag must be supplied");
    const bool direct_bars = coef.abar && coef.bbar;
    require(direct_bars || (coef.a && coef.b), "verify: coefficients must be supplied");
    require(direct_bars || coef.schedule.empty() || (coef.a_atom && coef.b_atom),
            "verify: atom coefficients must be supplied with a schedule");

    ConditionReport dcm1{"dcm1", 0.0, 0.0, 0.0, tol, false};
    for (const auto& [t, T] : grid) {
        (void)T;
        const double res = std::abs(coef.f_diag(t) - r(t) - spec.hazard()(t));
        if (res > dcm1.max_residual) {
            dcm1.max_residual = res;
            dcm1.argmax_t = t;
            dcm1.argmax_T = t;
        }
    }
    // the atom identity needs evaluable diagonal values; models whose atom
    // forward degenerates at t = u_i (e.g. the indicator limit in the
    // Merton example) supply no f_atom and are checked on the continuous
    // part only
    if (coef.f_atom) {
        for (std::size_t i = 0; i < spec.schedule().size(); ++i) {
            const auto& e = spec.schedule()[i];
            const double res = std::abs(coef.f_atom(e.time, i) + std::log1p(-e.gamma));
            if (res > dcm1.max_residual) {
                dcm1.max_residual = res;
                dcm1.argmax_t = e.time;
                dcm1.argmax_T = e.time;
            }
        }
    }
    dcm1.pass = dcm1.max_residual <= tol;

    ConditionReport dcm2{"dcm2", 0.0, 0.0, 0.0, tol, false};
    for (const auto& [t, T] : grid) {
        double abar = 0.0;
        Vector bbar(static_cast<std::size_t>(coef.n_factors), 0.0);
        if (coef.abar && coef.bbar) {
            abar = coef.abar(t, T);
            bbar = coef.bbar(t, T);
        } else {
            if (T > t) {
                const int n = std::max(1, coef.quad_points);
                const double h = (T - t) / n;
                for (int k = 0; k <= n; ++k) {
                    const double u = k == n ? T : t + k * h;
                    const double w = (k == 0 || k == n) ? 0.5 * h : h;
                    abar += w * coef.a(t, u);
                    add_scaled(bbar, coef.b(t, u), w);
                }
            }
            for (std::size_t i = 0; i < coef.schedule.size(); ++i) {
                const double u = coef.schedule[i].time;
                if (u > t && u <= T) {
                    abar += coef.a_atom(t, i);
                    add_scaled(bbar, coef.b_atom(t, i), 1.0);
                }
            }
        }
        const double res = std::abs(abar - 0.5 * norm2(bbar));
        if (res > dcm2.max_residual) {
            dcm2.max_residual = res;
            dcm2.argmax_t = t;
            dcm2.argmax_T = T;
        }
    }
    dcm2.pass = dcm2.max_residual <= tol;

    return {{dcm1, dcm2}};
}

double g_jump_check(const core::ForwardSurface& surface, std::size_t atom_index, double T,
                    double continuity_tol) {
    const auto& schedule = surface.schedule();
    require(atom_index < schedule.size(), "g jump check: atom index out of range");
    const double u_i = schedule[atom_index].time;
    require(T > u_i, "g jump check: need T > u_i");
    require(schedule.announce_time(atom_index) < u_i,
            "g jump check: the atom must be announced before u_i");

    for (std::size_t j = 0; j < schedule.size(); ++j)
        if (schedule[j].time > u_i && schedule[j].time <= T)
            require(schedule.announce_time(j) != u_i,
                    "g jump check: simultaneous announcement at u_i");

    const auto& tg = surface.time_grid();
    auto it = std::lower_bound(tg.begin(), tg.end(), u_i);
    require(it != tg.end() && *it == u_i, "g jump check: u_i must be a time-grid node");
    const std::size_t node = static_cast<std::size_t>(it - tg.begin());
    require(node >= 2, "g jump check: need two grid nodes below u_i for the left limit");

    // sum of atom premiums counted by G at time t, maturities in (t,T]
    auto log_g_sum = [&](double t, bool left_limit) {
        double sum = 0.0;
        for (std::size_t j = 0; j < schedule.size(); ++j) {
            const double u = schedule[j].time;
            const bool included = left_limit ? (u >= u_i && u <= T && schedule.announce_time(j) < u_i)
                                             : (u > u_i && u <= T && schedule.announce_time(j) <= u_i);
            if (!included) continue;
            if (left_limit) {
                // linear extrapolation of the column to u_i-
                const double t1 = tg[node - 1];
                const double t2 = tg[node - 2];
                const double g1 = surface.g_at(t1, j);
                const double g2 = surface.g_at(t2, j);
                const double g_extrap = g1 + (g1 - g2) * (u_i - t1) / (t1 - t2);
                const double g_node = surface.g_at(u_i, j);
                require(std::abs(g_node - g_extrap) <= continuity_tol,
                        "g jump check: g column discontinuous in t at the risky time");
                sum += g_extrap;
            } else {
                sum += surface.g_at(t, j);
            }
        }
        return sum;
    };

    const double log_g_right = log_g_sum(u_i, false);
    const double log_g_left = log_g_sum(u_i, true);
    // G = exp(-sum); the atom at u_i leaves the sum across the jump
    const double ratio = std::exp(log_g_left - log_g_right);
    return (ratio - 1.0) - std::expm1(surface.g_at(u_i, atom_index));
}

MartingaleReport martingale_mc_test(const PricingClosure& price, const PathSampler& sample,
                                    std::span<const double> t_grid, double T,
                                    double reference_price, std::size_t n_paths,
                                    std::uint64_t seed) {
    require(n_paths >= 1000, "martingale mc: fewer than 10^3 paths is underpowered");
    require(!t_grid.empty(), "martingale mc: empty time grid");
    for (double t : t_grid) require(t >= 0.0 && t <= T, "martingale mc: grid time outside [0,T]");

    std::vector<double> sum(t_grid.size(), 0.0);
    std::vector<double> sum2(t_grid.size(), 0.0);
    for (std::size_t p = 0; p < n_paths; ++p) {
        const auto points = sample(math::derive_seed(seed, p), t_grid);
        require(points.size() == t_grid.size(), "martingale mc: sampler grid mismatch");
        for (std::size_t k = 0; k < points.size(); ++k) {
            const double v = price(points[k], T) / points[k].numeraire;
            sum[k] += v;
            sum2[k] += v * v;
        }
    }

    MartingaleReport report;
    report.reference = reference_price;
    report.pass = true;
    const double n = static_cast<double>(n_paths);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        MartingalePoint pt;
        pt.t = t_grid[k];
        pt.mean = sum[k] / n;
        const double var = std::max(0.0, sum2[k] / n - pt.mean * pt.mean);
        pt.std_error = std::sqrt(var / n);
        if (pt.std_error > 0.0)
            pt.z = (pt.mean - reference_price) / pt.std_error;
        else
            pt.z = pt.mean == reference_price ? 0.0
                                              : std::numeric_limits<double>::infinity();
        if (std::abs(pt.z) > 3.0) report.pass = false;
        report.points.push_back(pt);
    }
    return report;
}

} // namespace dtsm::noarb
