#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dtsm::merton {

/// Merton model with unknown drift under incomplete information.
/// The firm value follows dV = V (X dt + sigma dW) with X ~ N(muX, varX)
/// unobserved; the market sees Y_t = X t + sigma W_t, and at the news
/// time S additionally Y' = X + eta with eta ~ N(0, sigma_eta^2).
/// Debt K is due at T and K' at U, with S < T < U.
struct MertonSetup {
    double v0 = 1.0;
    double sigma = 0.2;
    double muX = 0.0;
    double varX = 0.0;
    double K = 0.0;
    double Kprime = 0.0;
    double T = 0.0;
    double U = 0.0;
    double S = 0.0;
    double sigma_eta = 0.0;
    double r = 0.0;

    void validate() const;
};

/// Conditional law of the drift given the observations: X | F_t is
/// N(xhat, Sigma).
struct FilterState {
    double t = 0.0;
    double xhat = 0.0;
    double Sigma = 0.0;
};

/// Deterministic conditional variance. Between observations Sigma solves
/// dSigma = -(Sigma^2 / sigma^2) dt (hyperbolic decay); across the news
/// time it contracts to sigma_eta^2 Sigma(S-) / (Sigma(S-) + sigma_eta^2).
/// The value at t = S is the post-news one.
double variance_path(const MertonSetup& setup, double t);

/// Left limit Sigma(S-) just before the news arrives.
double variance_pre_news(const MertonSetup& setup);

/// Euler step of dxhat = (Sigma(t)/sigma^2)(dY - xhat dt); the gain uses
/// the state's Sigma, the advanced Sigma comes from variance_path.
/// Steps must not straddle the news time S (align S onto the grid and
/// apply news_update there).
FilterState filter_step(const FilterState& state, double dY, double dt, const MertonSetup& setup);

/// Exact Bayes update for the news observation Y' = X + eta:
///   xhat <- xhat + [Sigma(S-) / (Sigma(S-) + sigma_eta^2)] (Y' - xhat).
FilterState news_update(const FilterState& state, double yprime, const MertonSetup& setup);

/// P(tau = T | F_t) for t < T:
///   Phi((a'(t) - xhat (T-t)) / b'(t)),
///   a' = log(K/V_t) + sigma^2 (T-t)/2,  b' = sqrt(T-t) sqrt(sigma^2 + Sigma(t)(T-t)).
double default_prob_T(const FilterState& state, double V_t, const MertonSetup& setup);

/// P(tau = U | F_t) for S <= t < U, with a''/b'' the K'-versions over
/// U - t. The formula is not asserted before the news time; for
/// t >= T the survived_T flag settles the indicator 1{tau > T}.
double default_prob_U(const FilterState& state, double V_t, bool survived_T,
                      const MertonSetup& setup);

/// E[Phi(xi)] = Phi(a / sqrt(1 + b^2)) for xi ~ N(a, b^2).
double gaussian_phi_expectation(double a, double b);

/// Stylized Merton bond on normalized log assets W with default at U iff
/// W_U <= K.
struct MertonBondParams {
    double K = 0.0;
    double U = 0.0;
    double r = 0.0;
};

/// P(t,T) = e^{-r(T-t)} Phi((W_t - K)/sqrt(U-t)) for t < U <= T, and
/// e^{-r(T-t)} for T < U (no default risk carried).
double merton_bond_price(double W_t, double t, double T, const MertonBondParams& params);

/// Atom forward value and its Ito coefficients for f(t,U) = -log Phi(z),
/// z = (W_t - K)/sqrt(U-t):
///   b = -(phi(z)/Phi(z)) / sqrt(U-t),
///   a = d_t f + (1/2) d_WW f   (computed from the analytic partials).
/// The drift identity a = b^2/2 holds exactly.
struct ForwardCoeffs {
    double f = 0.0;
    double a = 0.0;
    double b = 0.0;
};

ForwardCoeffs merton_forward_coeffs(double W_t, double t, double U, double K);

/// Synthetic scenario run: drift drawn from the prior, observations on a
/// dt-grid with the news time inserted, filter advanced exactly through
/// S. pU is NaN before S (the formula is not asserted there).
struct FilterRow {
    double t;
    double xhat;
    double Sigma;
    double pT;
    double pU;
};

struct FilterRun {
    std::vector<FilterRow> rows;
    double x_true = 0.0;
    double y_terminal = 0.0;
    double yprime = 0.0;
};

FilterRun run_filter_scenario(const MertonSetup& setup, double dt, double horizon,
                              std::uint64_t seed);

/// CSV columns t,xhat,Sigma,pT,pU.
void write_csv(const FilterRun& run, std::ostream& os);

} // namespace dtsm::merton
