#pragma once

// Test-side oracles, independent of the library implementation paths they
// check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature (weight e^{-x^2}) via the orthonormal recurrence
//   p_0 = pi^{-1/4},  p_{k+1} = x sqrt(2/(k+1)) p_k - sqrt(k/(k+1)) p_{k-1},
// roots located by interlacing bisection plus Newton polish, Christoffel
// weights 1 / sum_j p_j(x)^2.
// ---------------------------------------------------------------------------
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline double hermite_eval(int n, double x, double* deriv = nullptr) {
    double pm = 0.0;
    double p = 0.75112554446494248285870300477623; // pi^{-1/4}
    for (int k = 0; k < n; ++k) {
        const double pn = x * std::sqrt(2.0 / (k + 1)) * p - std::sqrt(k / (k + 1.0)) * pm;
        pm = p;
        p = pn;
    }
    if (deriv) *deriv = std::sqrt(2.0 * n) * pm;
    return p;
}

inline GaussHermite gauss_hermite(int n) {
    std::vector<double> roots{};
    for (int k = 1; k <= n; ++k) {
        const double bound = std::sqrt(2.0 * k + 1.0) + 2.0;
        std::vector<double> brackets{-bound};
        brackets.insert(brackets.end(), roots.begin(), roots.end());
        brackets.push_back(bound);
        std::vector<double> next;
        for (std::size_t i = 0; i + 1 < brackets.size(); ++i) {
            double lo = brackets[i], hi = brackets[i + 1];
            double flo = hermite_eval(k, lo);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fmid = hermite_eval(k, mid);
                if ((flo <= 0.0) == (fmid <= 0.0)) {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                }
            }
            double x = 0.5 * (lo + hi);
            for (int it = 0; it < 4; ++it) {
                double dp;
                const double p = hermite_eval(k, x, &dp);
                if (dp != 0.0) x -= p / dp;
            }
            next.push_back(x);
        }
        roots = std::move(next);
    }
    GaussHermite out;
    out.nodes = roots;
    for (double x : roots) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            const double pj = hermite_eval(j, x);
            s += pj * pj;
        }
        out.weights.push_back(1.0 / s);
    }
    return out;
}

/// E[Phi(a + b Z)] for standard normal Z by Gauss-Hermite quadrature.
inline double gh_phi_expectation(const GaussHermite& gh, double a, double b,
                                 const std::function<double(double)>& phi) {
    const double sqrt_pi = 1.7724538509055160272981674833411;
    double s = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
        s += gh.weights[i] * phi(a + b * std::sqrt(2.0) * gh.nodes[i]);
    return s / sqrt_pi;
}

// ---------------------------------------------------------------------------
// Exact conjugate-normal posterior for the drift filtering problem:
// prior X ~ N(m0, v0), observation Y_t = X t + sigma W_t (sufficient
// statistic: the endpoint), optional news Y' = X + eta, eta ~ N(0, eta_sd^2).
// ---------------------------------------------------------------------------
struct NormalPosterior {
    double mean;
    double var;
};

inline NormalPosterior conjugate_posterior(double m0, double v0, double sigma, double t,
                                           double y_t,
                                           std::optional<std::pair<double, double>> news = {}) {
    double precision = 1.0 / v0 + t / (sigma * sigma);
    double weighted = m0 / v0 + y_t / (sigma * sigma);
    if (news) {
        const double eta2 = news->second * news->second;
        precision += 1.0 / eta2;
        weighted += news->first / eta2;
    }
    return {weighted / precision, 1.0 / precision};
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov statistic against a continuous CDF, with the
// asymptotic critical value c(alpha)/sqrt(n).
// ---------------------------------------------------------------------------
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs((i + 1) / n - f));
        d = std::max(d, std::abs(f - i / n));
    }
    return d;
}

inline double ks_critical_1pct(std::size_t n) {
    return 1.62762 / std::sqrt(static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Jarque-Bera statistic; compare against the chi^2(2) 99% quantile 9.21.
// ---------------------------------------------------------------------------
inline double jarque_bera(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2) - 3.0;
    return n / 6.0 * (skew * skew + 0.25 * kurt * kurt);
}

// ---------------------------------------------------------------------------
// Streaming mean / standard error.
// ---------------------------------------------------------------------------
struct MeanAccumulator {
    double sum = 0.0;
    double sum2 = 0.0;
    std::size_t n = 0;

    void add(double v) {
        sum += v;
        sum2 += v * v;
        ++n;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double std_error() const {
        const double m = mean();
        const double var = std::max(0.0, sum2 / static_cast<double>(n) - m * m);
        return std::sqrt(var / static_cast<double>(n));
    }
};

/// Composite trapezoid on a callable; kept separate from the library
/// quadrature so grid checks have an independent route.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
    double s = 0.5 * (f(a) + f(b));
    for (int k = 1; k < n; ++k) s += f(a + (b - a) * k / n);
    return s * (b - a) / n;
}

} // namespace oracles
