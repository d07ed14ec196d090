#include "dtsm/default_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtsm/errors.hpp"
#include "dtsm/math/normal.hpp"

namespace dtsm::sim {

HazardPath::HazardPath(math::PiecewiseLinear lambda, std::vector<Atom> atoms)
    : lambda_(std::move(lambda)), atoms_(std::move(atoms)) {
    require(lambda_.domain_begin() == 0.0, "hazard path: grid must start at 0");
    require(lambda_.min_value() >= 0.0, "hazard path: lambda must be non-negative");
    cum_ = lambda_.cumulative();
    double prev = 0.0;
    for (const auto& a : atoms_) {
        require(a.u > prev && a.u <= horizon(), "hazard path: atoms must be increasing in (0,horizon]");
        require(a.lam_prime >= 0.0, "hazard path: lam' must be non-negative");
        prev = a.u;
    }
}

double HazardPath::cumulative_at(double t) const {
    const auto& knots = lambda_.knots();
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    std::size_t i = static_cast<std::size_t>(it - knots.begin());
    if (i > 0) --i;
    if (i >= knots.size() - 1) i = knots.size() - 2;
    const double w = (t - knots[i]) / (knots[i + 1] - knots[i]);
    return cum_[i] + w * (cum_[i + 1] - cum_[i]);
}

double HazardPath::integrated(double t) const {
    require_range(t >= 0.0 && t <= horizon(), "hazard path: t outside [0,horizon]");
    double value = cumulative_at(t);
    for (const auto& a : atoms_)
        if (a.u <= t) value += a.lam_prime;
    return value;
}

DefaultSample simulate_tau(const HazardPath& path, std::uint64_t seed) {
    math::Rng rng(seed);
    const double zeta = rng.exponential();

    const auto& knots = path.lambda().knots();
    const auto& atoms = path.atoms();

    auto continuous_crossing = [&](double lo, double hi, double base) -> std::optional<double> {
        // invert the piecewise-linear cumulative hazard on (lo, hi]
        const double c_lo = path.cumulative_at(lo);
        const double c_hi = path.cumulative_at(hi);
        if (base + (c_hi - c_lo) < zeta) return std::nullopt;
        // walk grid cells inside (lo, hi]
        double cell_lo = lo;
        double acc = base;
        while (cell_lo < hi) {
            auto it = std::upper_bound(knots.begin(), knots.end(), cell_lo);
            std::size_t i = static_cast<std::size_t>(it - knots.begin());
            if (i > 0) --i;
            if (i >= knots.size() - 1) i = knots.size() - 2;
            const double cell_hi = std::min(hi, knots[i + 1]);
            const double gain = path.cumulative_at(cell_hi) - path.cumulative_at(cell_lo);
            if (acc + gain >= zeta) {
                if (gain <= 0.0) return cell_hi;
                const double w = (zeta - acc) / gain;
                return cell_lo + w * (cell_hi - cell_lo);
            }
            acc += gain;
            cell_lo = cell_hi;
        }
        return hi;
    };

    double level = 0.0;  // accumulated Lambda at the left end of the segment
    double seg_lo = 0.0; // segment start
    std::size_t next_atom = 0;
    while (true) {
        const double seg_hi = next_atom < atoms.size() ? atoms[next_atom].u : path.horizon();
        if (auto hit = continuous_crossing(seg_lo, seg_hi, level))
            return {*hit, std::nullopt};
        level += path.cumulative_at(seg_hi) - path.cumulative_at(seg_lo);
        if (next_atom >= atoms.size()) break;
        const double jump = atoms[next_atom].lam_prime;
        if (level < zeta && zeta <= level + jump) return {atoms[next_atom].u, next_atom};
        level += jump;
        seg_lo = seg_hi;
        ++next_atom;
        if (seg_lo >= path.horizon()) break;
    }
    return {std::numeric_limits<double>::infinity(), std::nullopt};
}

std::vector<DefaultSample> simulate_ensemble(const HazardPath& path, std::size_t n,
                                             std::uint64_t seed) {
    std::vector<DefaultSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(simulate_tau(path, math::derive_seed(seed, i)));
    return out;
}

double conditional_atom_prob(double lam_prime) {
    require(lam_prime >= 0.0, "conditional atom prob: lam' must be non-negative");
    return -std::expm1(-lam_prime);
}

McEstimate conditional_atom_prob_mc(const std::function<double(math::Rng&)>& sampler,
                                    std::size_t n, std::uint64_t seed) {
    require(n >= 2, "conditional atom prob mc: need at least two samples");
    math::Rng rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lp = sampler(rng);
        require(lp >= 0.0, "conditional atom prob mc: sampler produced a negative lam'");
        const double v = -std::expm1(-lp);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

double survival_probability(const core::CompensatorSpec& spec, double t) {
    require_range(t >= 0.0 && t <= spec.horizon(), "survival probability: t outside [0,T*]");
    double value = std::exp(-spec.hazard().integral(0.0, t));
    for (const auto& e : spec.schedule())
        if (e.time <= t) value *= 1.0 - e.gamma;
    return value;
}

double deterministic_term_structure(const HazardPath& path, double t, double T, bool defaulted) {
    require_range(t <= T && t >= 0.0 && T <= path.horizon(),
                  "deterministic term structure: need 0 <= t <= T <= horizon");
    if (defaulted) return 0.0;
    double log_p = -path.lambda().integral(t, T);
    for (const auto& a : path.atoms())
        if (a.u > t && a.u <= T) log_p -= a.lam_prime;
    return std::exp(log_p);
}

core::RiskySchedule announced_scenario(double rate,
                                       const std::function<double(math::Rng&)>& delay_law,
                                       double horizon, std::uint64_t seed) {
    require(rate > 0.0, "announced scenario: rate must be positive");
    require(horizon > 0.0, "announced scenario: horizon must be positive");
    math::Rng rng(seed);
    const double gamma = -std::expm1(-1.0);
    std::vector<core::RiskyTime> entries;
    double s = 0.0;
    while (true) {
        s += rng.exponential() / rate;
        if (s >= horizon) break;
        const double delay = delay_law(rng);
        require(delay >= 0.0, "announced scenario: delays must be non-negative");
        const double u = s + delay;
        if (u <= horizon && delay > 0.0) entries.push_back({u, gamma, s});
    }
    std::sort(entries.begin(), entries.end(),
              [](const core::RiskyTime& a, const core::RiskyTime& b) { return a.time < b.time; });
    return core::RiskySchedule(std::move(entries));
}

AzemaPath azema_path(const math::PiecewiseLinear& f, std::span<const double> obs_times,
                     double obs_noise_std, double prior_p1, std::uint64_t seed, double dt) {
    require(f.domain_begin() == 0.0, "azema: f must start at 0");
    require(f.values().front() >= 0.0, "azema: f must be non-negative");
    for (std::size_t i = 1; i < f.values().size(); ++i)
        require(f.values()[i] >= f.values()[i - 1], "azema: f must be non-decreasing");
    require(obs_noise_std > 0.0, "azema: observation noise must be positive");
    require(prior_p1 >= 0.0 && prior_p1 <= 1.0, "azema: prior mass must lie in [0,1]");
    require(dt > 0.0, "azema: dt must be positive");
    const double horizon = f.domain_end();
    double prev = 0.0;
    for (double s : obs_times) {
        require(s > prev && s <= horizon, "azema: observation times must be increasing in (0,horizon]");
        prev = s;
    }

    math::Rng rng(seed);
    const double x_true = rng.uniform() < prior_p1 ? 1.0 : 2.0;

    AzemaPath out;
    out.x_true = x_true;
    double p1 = prior_p1;

    auto z_of = [&](double t) {
        return p1 * std::exp(-1.0 * f(t)) + (1.0 - p1) * std::exp(-2.0 * f(t));
    };

    // refinement grid with every observation time a node
    std::vector<double> grid{0.0};
    const int n = std::max(1, static_cast<int>(std::ceil(horizon / dt - 1e-12)));
    for (int k = 1; k <= n; ++k) grid.push_back(k == n ? horizon : horizon * k / n);
    for (double s : obs_times) {
        auto it = std::lower_bound(grid.begin(), grid.end(), s);
        if (it == grid.end() || std::abs(*it - s) > 1e-12) grid.insert(it, s);
    }

    std::size_t next_obs = 0;
    for (double t : grid) {
        if (next_obs < obs_times.size() && std::abs(t - obs_times[next_obs]) <= 1e-12) {
            const double z_before = z_of(t);
            const double y = x_true + obs_noise_std * rng.normal();
            out.observations.push_back(y);
            // exact two-point Bayes
            const double l1 = math::normal_pdf((y - 1.0) / obs_noise_std);
            const double l2 = math::normal_pdf((y - 2.0) / obs_noise_std);
            const double w1 = p1 * l1;
            const double w2 = (1.0 - p1) * l2;
            p1 = w1 + w2 > 0.0 ? w1 / (w1 + w2) : p1;
            const double z_after = z_of(t);
            out.jumps.push_back({t, z_before, z_after});
            ++next_obs;
        }
        out.t.push_back(t);
        out.z.push_back(z_of(t));
    }
    return out;
}

} // namespace dtsm::sim
