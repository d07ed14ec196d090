#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dtsm/core_model.hpp"
#include "dtsm/math/piecewise_linear.hpp"
#include "dtsm/math/rng.hpp"

namespace dtsm::sim {

/// Integrated hazard Lambda_t = int_0^t lambda ds + sum_{u_i <= t} lam'_i
/// driving the doubly-stochastic default time tau = inf{t: Lambda_t >= zeta}.
class HazardPath {
  public:
    struct Atom {
        double u = 0.0;
        double lam_prime = 0.0;
    };

    HazardPath(math::PiecewiseLinear lambda, std::vector<Atom> atoms);

    const math::PiecewiseLinear& lambda() const { return lambda_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double horizon() const { return lambda_.domain_end(); }

    /// Lambda_t (right-continuous). The continuous part interpolates the
    /// cumulative hazard linearly between grid nodes.
    double integrated(double t) const;

    /// Continuous cumulative hazard, linearly interpolated (no atoms).
    double cumulative_at(double t) const;

  private:
    math::PiecewiseLinear lambda_;
    std::vector<double> cum_; // cumulative continuous hazard at the grid nodes
    std::vector<Atom> atoms_;
};

struct DefaultSample {
    double tau = 0.0; // +infinity when no default before the horizon
    std::optional<std::size_t> hit_atom;
};

/// Draws zeta ~ Exp(1) by inverse CDF and returns the first time the
/// right-continuous Lambda reaches zeta. Continuous crossings invert the
/// piecewise-linear cumulative hazard; an atom absorbs the draw iff
/// Lambda_{u_i-} < zeta <= Lambda_{u_i} (level ties go to the atom).
DefaultSample simulate_tau(const HazardPath& path, std::uint64_t seed);

/// n independent draws with counter-derived per-path seeds.
std::vector<DefaultSample> simulate_ensemble(const HazardPath& path, std::size_t n,
                                             std::uint64_t seed);

/// Q(tau = u_i | tau >= u_i) = 1 - e^{-lam'} for a deterministic jump.
double conditional_atom_prob(double lam_prime);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo mean of 1 - e^{-lam'} for random lam' >= 0.
McEstimate conditional_atom_prob_mc(const std::function<double(math::Rng&)>& sampler,
                                    std::size_t n, std::uint64_t seed);

/// Q(tau > t | G) = e^{-int_0^t h ds} prod_{u_i <= t} (1 - Gamma_i).
double survival_probability(const core::CompensatorSpec& spec, double t);

/// Deterministic-term-structure price of the doubly stochastic model with
/// zero rates: 1{not defaulted} exp(-int_t^T lambda - sum_{u_i in (t,T]} lam'_i).
double deterministic_term_structure(const HazardPath& path, double t, double T, bool defaulted);

/// Samples announced risky times: Poisson news arrivals S_i with the given
/// rate, delays sigma_i from delay_law, U_i = S_i + sigma_i kept when
/// U_i <= horizon; every atom carries gamma = 1 - e^{-1}.
core::RiskySchedule announced_scenario(double rate,
                                       const std::function<double(math::Rng&)>& delay_law,
                                       double horizon, std::uint64_t seed);

/// One simulated path of the Azema supermartingale
/// Z_t = E[exp(-X f(t)) | observations so far] for a two-point drift
/// X in {1,2} observed through Y_i = X + noise at the given times.
struct AzemaPath {
    std::vector<double> t;
    std::vector<double> z;
    struct Jump {
        double time;
        double z_before;
        double z_after;
    };
    std::vector<Jump> jumps;
    double x_true = 0.0;
    std::vector<double> observations;
};

/// f must be non-decreasing with f(0) >= 0; prior_p1 = P(X = 1) may be
/// degenerate. The returned grid refines [0, f-domain-end] with spacing
/// ~dt and contains every observation time.
AzemaPath azema_path(const math::PiecewiseLinear& f, std::span<const double> obs_times,
                     double obs_noise_std, double prior_p1, std::uint64_t seed,
                     double dt = 0.01);

} // namespace dtsm::sim
