#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dtsm/core_model.hpp"
#include "dtsm/math/piecewise_linear.hpp"
#include "dtsm/math/rng.hpp"

namespace dtsm::affine {

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;

/// Affine diffusion on the canonical state space R_{>=0}^m x R^{d-m}:
///   dX = mu(X) dt + sigma(X) dW,   mu(x) = mu0 + sum_i x_i mu_i,
///   (1/2) sigma(x)^T sigma(x) = sigma0 + sum_i x_i sigma_i.
/// Parameters are validated structurally at construction: sigma0 must not
/// touch cone coordinates, diffusion loadings of real coordinates vanish,
/// cone loadings act on their own diagonal only, and the drift points
/// inward at the cone boundary.
struct AffineParams {
    int dim = 0;
    int cone_dim = 0;
    Vector mu0;
    std::vector<Vector> mu;
    Matrix sigma0;
    std::vector<Matrix> sigma;

    void validate() const;
    Vector drift(const Vector& x) const;
    /// sigma(x)^T sigma(x) = 2 (sigma0 + sum_i x_i sigma_i)
    Matrix diffusion_cov(const Vector& x) const;
};

/// Compensator loadings H^p = int (phi0 + psi0.X) ds + atoms (phi_i, psi_i).
/// phi0, psi0 are piecewise linear in time; positivity is checked on the
/// cone generators (phi0 >= 0, cone components of psi >= 0, real
/// components identically 0).
struct CompensatorLoadings {
    math::PiecewiseLinear phi0;
    std::vector<math::PiecewiseLinear> psi0;
    struct Jump {
        double phi = 0.0;
        Vector psi;
    };
    std::vector<Jump> jumps;

    void validate(int dim, int cone_dim) const;
    double phi0_at(double t) const { return phi0(t); }
    Vector psi0_at(double t) const;
    /// Instantaneous hazard phi0(t) + psi0(t).x
    double hazard(double t, const Vector& x) const;
};

/// Backward Riccati solution A(.,T), B(.,T) stored right-continuously on
/// an ascending grid with every risky time forced onto a node. Left
/// limits at risky nodes are kept separately so that
/// A(u_i-) - A(u_i) = phi_i and B(u_i-) - B(u_i) = psi_i exactly.
struct RiccatiSolution {
    double maturity = 0.0;
    std::vector<double> t;
    std::vector<double> A;
    std::vector<Vector> B;
    std::vector<bool> risky;
    struct JumpRecord {
        std::size_t node;
        double A_left;
        Vector B_left;
    };
    std::vector<JumpRecord> jumps;

    double A_at(double s) const;
    Vector B_at(double s) const;
};

/// Integrates (A,B) backward from A(T,T)=B(T,T)=0 with classical RK4:
///   -dA/dt = phi0(t) + mu0.B - B.sigma0.B
///   -dB_k/dt = psi0_k(t) + mu_k.B - B.sigma_k.B
/// applying A <- A + phi_i, B <- B + psi_i on the left limit at each
/// risky time u_i <= T.
RiccatiSolution riccati_solve(const AffineParams& params, const CompensatorLoadings& loadings,
                              const core::RiskySchedule& schedule, double T, double step);

/// CSV export with columns t,A,B_1..B_d,is_risky.
void write_csv(const RiccatiSolution& sol, std::ostream& os);

/// One-dimensional CIR model dX = (mu0 + mu1 X) dt + sigma sqrt(X) dW
/// with compensator loadings phi0 = 0, psi0 = 1 and a single risky time
/// u1 carrying the atom loading psi1 >= 0.
struct CIRParams {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double sigma = 0.0;
    double psi1 = 0.0;
};

struct CirAB {
    double A = 0.0;
    double B = 0.0;
};

/// Closed-form Riccati solution for the CIR model with theta =
/// sqrt(mu1^2 + 2 sigma^2):
///   B0(s) = L1(s)/L3(s),
///   A0(s) = -(2 mu0 / sigma^2) log(2 theta e^{(theta-mu1)s/2} / L3(s)),
/// and for t < u1 <= T the flow restarted from u(T) = B0(T-u1) + psi1:
///   B = (L1 + L2 u)/(L3 + L4 u) at s = u1 - t, with the matching
///   logarithmic A increment accumulated on top of A0(T-u1).
CirAB cir_closed_form(const CIRParams& params, double t, double T, double u1);

/// P(t,T) = 1{not defaulted} exp(-A(t,T) - B(t,T).x)
double affine_bond_price(const RiccatiSolution& sol, const Vector& x, double t, bool defaulted,
                         int cone_dim);

/// Simulated state path on a uniform grid, stored flat (dim entries per
/// node) to keep large ensembles cheap.
struct StatePath {
    int dim = 0;
    std::vector<double> t;
    std::vector<double> flat;

    std::size_t nodes() const { return t.size(); }
    double value(std::size_t node, int k) const { return flat[node * dim + k]; }
    Vector node_state(std::size_t node) const;
    Vector at(double s) const;
};

/// H^p_t = int_0^t (phi0 + psi0.X_s) ds  (trapezoid on the path grid)
///       + sum_{u_i <= t} (1 - exp(-phi_i - psi_i.X_{u_i})).
double affine_compensator(const CompensatorLoadings& loadings, const StatePath& path,
                          const core::RiskySchedule& schedule, double t);

/// Euler-Maruyama with full truncation on cone coordinates: coefficients
/// are evaluated at the clamped state and the state itself is floored at
/// zero. Deterministic given the seed.
StatePath simulate_state(const AffineParams& params, const Vector& x0, double horizon,
                         double step, std::uint64_t seed);

/// One full-truncation Euler step of fixed size; buffers are reused so
/// stepping an ensemble allocates nothing per step.
class EulerStepper {
  public:
    EulerStepper(const AffineParams& params, double step);

    double step_size() const { return h_; }
    void advance(Vector& x, math::Rng& rng);

  private:
    const AffineParams& p_;
    double h_;
    double sqrt_h_;
    Vector xp_, mu_, z_;
    Matrix cov_, l_;
};

} // namespace dtsm::affine
