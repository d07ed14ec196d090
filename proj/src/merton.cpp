#include "dtsm/merton.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "dtsm/errors.hpp"
#include "dtsm/math/normal.hpp"
#include "dtsm/math/rng.hpp"

namespace dtsm::merton {

using math::normal_cdf;
using math::normal_pdf;

void MertonSetup::validate() const {
    require(v0 > 0.0, "merton setup: v0 must be positive");
    require(sigma > 0.0, "merton setup: sigma must be positive");
    require(varX > 0.0, "merton setup: varX must be positive");
    require(K > 0.0 && Kprime > 0.0, "merton setup: face values must be positive");
    require(S > 0.0 && S < T && T < U, "merton setup: need 0 < S < T < U");
    require(sigma_eta > 0.0, "merton setup: sigma_eta must be positive");
}

double variance_pre_news(const MertonSetup& setup) {
    const double s2 = setup.sigma * setup.sigma;
    return setup.varX / (1.0 + setup.varX / s2 * setup.S);
}

double variance_path(const MertonSetup& setup, double t) {
    require_range(t >= 0.0, "variance path: t must be non-negative");
    const double s2 = setup.sigma * setup.sigma;
    if (t < setup.S) return setup.varX / (1.0 + setup.varX / s2 * t);
    const double pre = variance_pre_news(setup);
    const double eta2 = setup.sigma_eta * setup.sigma_eta;
    const double at_s = eta2 * pre / (pre + eta2);
    return at_s / (1.0 + at_s / s2 * (t - setup.S));
}

FilterState filter_step(const FilterState& state, double dY, double dt, const MertonSetup& setup) {
    require(dt > 0.0, "filter step: dt must be positive");
    const double s2 = setup.sigma * setup.sigma;
    FilterState next;
    next.t = state.t + dt;
    next.xhat = state.xhat + state.Sigma / s2 * (dY - state.xhat * dt);
    next.Sigma = variance_path(setup, next.t);
    return next;
}

FilterState news_update(const FilterState& state, double yprime, const MertonSetup& setup) {
    require(std::abs(state.t - setup.S) <= 1e-9, "news update: state must sit at t = S");
    const double pre = variance_pre_news(setup);
    const double eta2 = setup.sigma_eta * setup.sigma_eta;
    FilterState next;
    next.t = setup.S;
    next.xhat = state.xhat + pre / (pre + eta2) * (yprime - state.xhat);
    next.Sigma = variance_path(setup, setup.S);
    return next;
}

double default_prob_T(const FilterState& state, double V_t, const MertonSetup& setup) {
    require(V_t > 0.0, "default prob: firm value must be positive");
    const double t = state.t;
    require_range(t >= 0.0 && t < setup.T, "default prob T: need 0 <= t < T");
    const double dt = setup.T - t;
    const double s2 = setup.sigma * setup.sigma;
    const double a = std::log(setup.K / V_t) + 0.5 * s2 * dt;
    const double b = std::sqrt(dt) * std::sqrt(s2 + state.Sigma * dt);
    return normal_cdf((a - state.xhat * dt) / b);
}

double default_prob_U(const FilterState& state, double V_t, bool survived_T,
                      const MertonSetup& setup) {
    require(V_t > 0.0, "default prob: firm value must be positive");
    const double t = state.t;
    require_range(t < setup.U, "default prob U: need t < U");
    require_range(t >= setup.S, "default prob U: the formula is not asserted before the news time");
    if (t >= setup.T && !survived_T) return 0.0;
    const double du = setup.U - t;
    const double s2 = setup.sigma * setup.sigma;
    const double a = std::log(setup.Kprime / V_t) + 0.5 * s2 * du;
    const double b = std::sqrt(du) * std::sqrt(s2 + state.Sigma * du);
    return normal_cdf((a - state.xhat * du) / b);
}

double gaussian_phi_expectation(double a, double b) {
    require(b >= 0.0, "gaussian phi expectation: b must be non-negative");
    return normal_cdf(a / std::sqrt(1.0 + b * b));
}

double merton_bond_price(double W_t, double t, double T, const MertonBondParams& params) {
    require_range(t < params.U, "merton bond: need t < U");
    require_range(t <= T, "merton bond: need t <= T");
    const double discount = std::exp(-params.r * (T - t));
    if (T < params.U) return discount;
    return discount * normal_cdf((W_t - params.K) / std::sqrt(params.U - t));
}

ForwardCoeffs merton_forward_coeffs(double W_t, double t, double U, double K) {
    require_range(t < U, "merton forward coeffs: need t < U");
    const double s = U - t;
    const double z = (W_t - K) / std::sqrt(s);
    const double big_phi = normal_cdf(z);
    require(big_phi > 0.0, "merton forward coeffs: survival probability underflows");
    const double rho = normal_pdf(z) / big_phi;
    ForwardCoeffs out;
    out.f = -std::log(big_phi);
    out.b = -rho / std::sqrt(s);
    // Ito drift of -log Phi: time decay plus half the second W-derivative
    const double dt_f = -rho * z / (2.0 * s);
    const double dww_f = (z * rho + rho * rho) / s;
    out.a = dt_f + 0.5 * dww_f;
    return out;
}

FilterRun run_filter_scenario(const MertonSetup& setup, double dt, double horizon,
                              std::uint64_t seed) {
    setup.validate();
    require(dt > 0.0, "filter scenario: dt must be positive");
    require(horizon > 0.0 && horizon < setup.U, "filter scenario: horizon must lie in (0,U)");

    // grid of multiples of dt with S (and T, when crossed) inserted
    std::vector<double> times{0.0};
    for (int k = 1;; ++k) {
        const double t = k * dt;
        if (t >= horizon - 1e-12) break;
        times.push_back(t);
    }
    times.push_back(horizon);
    auto insert_node = [&](double t) {
        if (t >= horizon) return;
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (std::abs(times[i] - t) < 1e-12) return;
            if (times[i] > t) {
                times.insert(times.begin() + static_cast<std::ptrdiff_t>(i), t);
                return;
            }
        }
    };
    insert_node(setup.S);
    insert_node(setup.T);

    math::Rng rng(seed);
    const double x_true = setup.muX + std::sqrt(setup.varX) * rng.normal();

    FilterRun run;
    run.x_true = x_true;
    FilterState state{0.0, setup.muX, setup.varX};
    double y = 0.0;
    bool survived_T = true;

    auto firm_value = [&](double t) {
        return setup.v0 * std::exp(y - 0.5 * setup.sigma * setup.sigma * t);
    };
    auto emit = [&](const FilterState& st) {
        const double v = firm_value(st.t);
        FilterRow row;
        row.t = st.t;
        row.xhat = st.xhat;
        row.Sigma = st.Sigma;
        row.pT = st.t < setup.T ? default_prob_T(st, v, setup)
                                : std::numeric_limits<double>::quiet_NaN();
        row.pU = st.t >= setup.S ? default_prob_U(st, v, survived_T, setup)
                                 : std::numeric_limits<double>::quiet_NaN();
        run.rows.push_back(row);
    };

    emit(state);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double h = times[i] - times[i - 1];
        const double dY = x_true * h + setup.sigma * std::sqrt(h) * rng.normal();
        y += dY;
        state = filter_step(state, dY, h, setup);
        if (std::abs(times[i] - setup.S) < 1e-12) {
            run.yprime = x_true + setup.sigma_eta * rng.normal();
            state = news_update(state, run.yprime, setup);
        }
        if (std::abs(times[i] - setup.T) < 1e-12) survived_T = firm_value(setup.T) >= setup.K;
        emit(state);
    }
    run.y_terminal = y;
    return run;
}

void write_csv(const FilterRun& run, std::ostream& os) {
    os << "t,xhat,Sigma,pT,pU\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (const auto& row : run.rows) {
        put(row.t);
        os << ',';
        put(row.xhat);
        os << ',';
        put(row.Sigma);
        os << ',';
        put(row.pT);
        os << ',';
        put(row.pU);
        os << '\n';
    }
}

} // namespace dtsm::merton
