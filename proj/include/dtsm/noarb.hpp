#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtsm/core_model.hpp"

namespace dtsm::noarb {

using Vector = std::vector<double>;

/// Coefficient functions of the extended HJM dynamics
///   df(.,T) = a dt + b.dW,   dg(.,T) = alpha dt + beta.dW,
/// with the announcement kernel nu(t,du) represented by finitely many
/// locations u_j carrying time-varying weights. The measure mu_t counts
/// only risky times already announced at t.
struct HJMCoefficients {
    int n_factors = 1;
    std::function<double(double, double)> a;
    std::function<Vector(double, double)> b;
    std::function<double(double, double)> alpha;
    std::function<Vector(double, double)> beta;
    std::function<double(double, double)> g;
    struct NuAtom {
        double u;
        std::function<double(double)> weight;
    };
    std::vector<NuAtom> nu;
    core::RiskySchedule schedule;
    int quad_points = 256; // trapezoid subdivisions for du-integrals
};

struct BarIntegrals {
    double abar = 0.0;
    Vector bbar;
    double alphabar = 0.0;
    Vector betabar;
};

/// abar/bbar by composite trapezoid over [t,T]; alphabar/betabar as sums
/// over announced atoms U_i in (t,T] with S_i <= t.
BarIntegrals bar_integrals(const HJMCoefficients& coef, double t, double T);

struct ConditionReport {
    std::string condition;
    double max_residual = 0.0;
    double argmax_t = 0.0;
    double argmax_T = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<ConditionReport> conditions;

    bool pass() const {
        for (const auto& c : conditions)
            if (!c.pass) return false;
        return true;
    }
};

/// Certifies the general drift conditions on the given (t,T) grid.
/// The first condition is checked in its pointwise split form, which is
/// equivalent to the integrated statement and numerically sharper:
///   f(t,t) = r_t + h_t   and   g(U_i,U_i) = -log(1 - Gamma_i);
/// the second compares abar + alphabar against
///   |bbar + betabar|^2 / 2 + sum_{u_j in (t,T]} w_j(t) (e^{-g(t,u_j)} - 1).
VerificationReport verify_general_drift(const HJMCoefficients& coef,
                                        const core::CompensatorSpec& spec,
                                        const core::ShortRate& r,
                                        const std::function<double(double)>& f_diag,
                                        std::span<const std::pair<double, double>> grid,
                                        double tol);

/// Generalized-Merton coefficients: continuous-part functions plus the
/// atom values of the same objects, kept separate so quadrature nodes
/// never collide with atoms. When abar/bbar are supplied they are used
/// directly (exact mu^M-integrals, e.g. from a Riccati solution).
struct MertonCoefficients {
    int n_factors = 1;
    std::function<double(double, double)> a;
    std::function<Vector(double, double)> b;
    std::function<double(double, std::size_t)> a_atom;
    std::function<Vector(double, std::size_t)> b_atom;
    std::function<double(double)> f_diag;
    std::function<double(double, std::size_t)> f_atom;
    std::function<double(double, double)> abar;  // optional
    std::function<Vector(double, double)> bbar;  // optional
    core::RiskySchedule schedule;
    int quad_points = 256;
};

/// (dcm1) split form: f(t,t) = r_t + h_t and f(u_i,u_i) = -log(1-Gamma_i);
/// (dcm2): abar(t,T) = |bbar(t,T)|^2 / 2 with mu^M-integrals.
VerificationReport verify_merton_drift(const MertonCoefficients& coef,
                                       const core::CompensatorSpec& spec,
                                       const core::ShortRate& r,
                                       std::span<const std::pair<double, double>> grid,
                                       double tol);

/// Relative jump of G(t,T) = exp(-int_t^T g(t,u) mu_t(du)) across the
/// risky time: returns G(u_i,T)/G(u_i-,T) - 1 - (e^{g(u_i,u_i)} - 1).
/// The left limit extrapolates the g columns linearly from the two
/// preceding time-grid nodes; a column moving by more than
/// continuity_tol across that cell is rejected as discontinuous in t.
double g_jump_check(const core::ForwardSurface& surface, std::size_t atom_index, double T,
                    double continuity_tol = 1e-3);

/// State of one simulated path at a test time: t & tau resolved into the
/// effective state, plus the numeraire at t.
struct McPoint {
    double t = 0.0;
    bool defaulted = false;
    Vector x;
    double numeraire = 1.0;
};

/// Produces the path's points at every time of the test grid.
using PathSampler =
    std::function<std::vector<McPoint>(std::uint64_t path_seed, std::span<const double> t_grid)>;

/// Prices the T-bond given the path state (zero after default).
using PricingClosure = std::function<double(const McPoint& state, double T)>;

struct MartingalePoint {
    double t = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    double z = 0.0;
};

struct MartingaleReport {
    double reference = 0.0;
    std::vector<MartingalePoint> points;
    bool pass = false;
};

/// Estimates E[(X^0_t)^{-1} P(t and tau, T)] at each grid time and reports
/// the deviation from the t=0 reference in standard-error units; passes
/// iff every |z| <= 3. Fewer than 10^3 paths is refused as underpowered.
MartingaleReport martingale_mc_test(const PricingClosure& price, const PathSampler& sample,
                                    std::span<const double> t_grid, double T,
                                    double reference_price, std::size_t n_paths,
                                    std::uint64_t seed);

} // namespace dtsm::noarb
