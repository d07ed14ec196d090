#include "dtsm/affine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dtsm/errors.hpp"
#include "dtsm/math/rng.hpp"

namespace dtsm::affine {

namespace {

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double quadratic_form(const Vector& v, const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * dot(m[i], v);
    return s;
}

void check_square(const Matrix& m, int d, const char* name) {
    require(static_cast<int>(m.size()) == d, std::string(name) + ": wrong row count");
    for (const auto& row : m) {
        require(static_cast<int>(row.size()) == d, std::string(name) + ": wrong column count");
        for (double v : row) require(std::isfinite(v), std::string(name) + ": non-finite entry");
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            require(std::abs(m[i][j] - m[j][i]) <= 1e-12 * (1.0 + std::abs(m[i][j])),
                    std::string(name) + ": not symmetric");
}

// Cholesky factor L with L L^T = m for PSD m; tiny negative pivots are
// clamped to zero, genuinely negative ones throw.
Matrix cholesky_psd(const Matrix& m, const char* name) {
    const std::size_t d = m.size();
    Matrix l(d, Vector(d, 0.0));
    double scale = 1e-30;
    for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(m[i][i]));
    for (std::size_t j = 0; j < d; ++j) {
        double diag = m[j][j];
        for (std::size_t k = 0; k < j; ++k) diag -= l[j][k] * l[j][k];
        require(diag >= -1e-10 * scale, std::string(name) + ": not positive semidefinite");
        diag = std::max(diag, 0.0);
        l[j][j] = std::sqrt(diag);
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = m[i][j];
            for (std::size_t k = 0; k < j; ++k) v -= l[i][k] * l[j][k];
            l[i][j] = l[j][j] > 0.0 ? v / l[j][j] : 0.0;
        }
    }
    return l;
}

} // namespace

void AffineParams::validate() const {
    require(dim >= 1, "affine params: dim must be positive");
    require(cone_dim >= 0 && cone_dim <= dim, "affine params: cone_dim must lie in [0,dim]");
    require(static_cast<int>(mu0.size()) == dim, "affine params: mu0 size");
    require(static_cast<int>(mu.size()) == dim, "affine params: mu list size");
    for (const auto& v : mu) require(static_cast<int>(v.size()) == dim, "affine params: mu_i size");
    check_square(sigma0, dim, "sigma0");
    require(static_cast<int>(sigma.size()) == dim, "affine params: sigma list size");
    for (int i = 0; i < dim; ++i) check_square(sigma[i], dim, "sigma_i");

    cholesky_psd(sigma0, "sigma0");
    // sigma0 must not touch cone coordinates
    for (int k = 0; k < cone_dim; ++k)
        for (int j = 0; j < dim; ++j)
            require(sigma0[k][j] == 0.0 && sigma0[j][k] == 0.0,
                    "affine params: sigma0 touches a cone coordinate");
    for (int i = 0; i < dim; ++i) {
        if (i >= cone_dim) {
            // real coordinates cannot scale the diffusion
            for (int k = 0; k < dim; ++k)
                for (int j = 0; j < dim; ++j)
                    require(sigma[i][k][j] == 0.0,
                            "affine params: diffusion loading on a real coordinate");
        } else {
            cholesky_psd(sigma[i], "sigma_i");
            for (int k = 0; k < dim; ++k)
                for (int j = 0; j < dim; ++j)
                    if (!(k == i && j == i))
                        require(sigma[i][k][j] == 0.0,
                                "affine params: cone diffusion loading must be diagonal");
        }
    }
    // drift points inward at the cone boundary
    for (int k = 0; k < cone_dim; ++k) {
        require(mu0[k] >= 0.0, "affine params: mu0 points outward at the cone boundary");
        for (int i = 0; i < dim; ++i) {
            if (i == k) continue;
            if (i < cone_dim)
                require(mu[i][k] >= 0.0, "affine params: inward-pointing drift violated");
            else
                require(mu[i][k] == 0.0,
                        "affine params: real coordinate feeds a cone drift");
        }
    }
}

Vector AffineParams::drift(const Vector& x) const {
    Vector out = mu0;
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) out[k] += x[i] * mu[i][k];
    return out;
}

Matrix AffineParams::diffusion_cov(const Vector& x) const {
    Matrix out(dim, Vector(dim, 0.0));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double v = sigma0[i][j];
            for (int k = 0; k < dim; ++k) v += x[k] * sigma[k][i][j];
            out[i][j] = 2.0 * v;
        }
    return out;
}

void CompensatorLoadings::validate(int dim, int cone_dim) const {
    require(static_cast<int>(psi0.size()) == dim, "loadings: psi0 component count");
    for (double v : phi0.values()) require(v >= 0.0, "loadings: phi0 must be non-negative");
    for (int k = 0; k < dim; ++k) {
        for (double v : psi0[k].values()) {
            if (k < cone_dim)
                require(v >= 0.0, "loadings: psi0 cone component must be non-negative");
            else
                require(v == 0.0, "loadings: psi0 real component must vanish");
        }
    }
    for (const auto& j : jumps) {
        require(static_cast<int>(j.psi.size()) == dim, "loadings: psi_i size");
        require(j.phi >= 0.0, "loadings: phi_i must be non-negative");
        for (int k = 0; k < dim; ++k) {
            if (k < cone_dim)
                require(j.psi[k] >= 0.0, "loadings: psi_i cone component must be non-negative");
            else
                require(j.psi[k] == 0.0, "loadings: psi_i real component must vanish");
        }
    }
}

Vector CompensatorLoadings::psi0_at(double t) const {
    Vector out(psi0.size());
    for (std::size_t k = 0; k < psi0.size(); ++k) out[k] = psi0[k](t);
    return out;
}

double CompensatorLoadings::hazard(double t, const Vector& x) const {
    double h = phi0(t);
    for (std::size_t k = 0; k < psi0.size(); ++k) h += psi0[k](t) * x[k];
    return h;
}

namespace {

struct RiccatiRhs {
    const AffineParams& p;
    const CompensatorLoadings& l;

    // time derivatives (the ODE is integrated backward)
    void eval(double t, double A, const Vector& B, double& dA, Vector& dB) const {
        (void)A;
        dA = -(l.phi0_at(t) + dot(p.mu0, B) - quadratic_form(B, p.sigma0));
        for (int k = 0; k < p.dim; ++k)
            dB[k] = -(l.psi0[k](t) + dot(p.mu[k], B) - quadratic_form(B, p.sigma[k]));
    }
};

} // namespace

RiccatiSolution riccati_solve(const AffineParams& params, const CompensatorLoadings& loadings,
                              const core::RiskySchedule& schedule, double T, double step) {
    params.validate();
    loadings.validate(params.dim, params.cone_dim);
    require(step > 0.0, "riccati: step must be positive");
    require(T > 0.0, "riccati: maturity must be positive");
    require(loadings.jumps.size() == schedule.size(), "riccati: one jump loading per risky time");
    require(loadings.phi0.domain_begin() <= 0.0 && loadings.phi0.domain_end() >= T,
            "riccati: loadings not defined up to T");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        require(step <= schedule[i].time - schedule[i - 1].time,
                "riccati: step exceeds the smallest inter-risky-time gap");

    // breakpoints: 0, risky times inside (0,T), T
    std::vector<double> breaks{0.0};
    std::vector<std::size_t> atom_of_break(1, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double u = schedule[i].time;
        if (u > 0.0 && u < T) {
            breaks.push_back(u);
            atom_of_break.push_back(i);
        }
    }
    breaks.push_back(T);
    atom_of_break.push_back(static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < schedule.size(); ++i)
        if (schedule[i].time == T) atom_of_break.back() = i;

    // ascending grid with every breakpoint a node
    std::vector<double> grid;
    std::vector<std::size_t> break_node; // node index of each breakpoint
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double lo = breaks[s];
        const double hi = breaks[s + 1];
        const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step - 1e-12)));
        break_node.push_back(grid.size());
        for (int k = 0; k < n; ++k) grid.push_back(lo + (hi - lo) * k / n);
    }
    break_node.push_back(grid.size());
    grid.push_back(T);

    RiccatiSolution sol;
    sol.maturity = T;
    sol.t = grid;
    sol.A.assign(grid.size(), 0.0);
    sol.B.assign(grid.size(), Vector(params.dim, 0.0));
    sol.risky.assign(grid.size(), false);

    const RiccatiRhs rhs{params, loadings};
    double A = 0.0;
    Vector B(params.dim, 0.0);
    Vector dB1(params.dim), dB2(params.dim), dB3(params.dim), dB4(params.dim);
    Vector tmp(params.dim);
    double dA1, dA2, dA3, dA4;

    // terminal node
    sol.A.back() = A;
    sol.B.back() = B;
    if (atom_of_break.back() != static_cast<std::size_t>(-1)) {
        const auto& j = loadings.jumps[atom_of_break.back()];
        sol.risky.back() = true;
        double A_left = A + j.phi;
        Vector B_left = B;
        for (int k = 0; k < params.dim; ++k) B_left[k] += j.psi[k];
        sol.jumps.push_back({grid.size() - 1, A_left, B_left});
        A = A_left;
        B = B_left;
    }

    for (std::size_t s = breaks.size() - 1; s-- > 0;) {
        const std::size_t node_hi = break_node[s + 1];
        const std::size_t node_lo = break_node[s];
        for (std::size_t n = node_hi; n-- > node_lo;) {
            const double t1 = grid[n + 1];
            const double t0 = grid[n];
            const double h = t1 - t0;
            rhs.eval(t1, A, B, dA1, dB1);
            for (int k = 0; k < params.dim; ++k) tmp[k] = B[k] - 0.5 * h * dB1[k];
            rhs.eval(t1 - 0.5 * h, A - 0.5 * h * dA1, tmp, dA2, dB2);
            for (int k = 0; k < params.dim; ++k) tmp[k] = B[k] - 0.5 * h * dB2[k];
            rhs.eval(t1 - 0.5 * h, A - 0.5 * h * dA2, tmp, dA3, dB3);
            for (int k = 0; k < params.dim; ++k) tmp[k] = B[k] - h * dB3[k];
            rhs.eval(t0, A - h * dA3, tmp, dA4, dB4);
            A -= h / 6.0 * (dA1 + 2.0 * dA2 + 2.0 * dA3 + dA4);
            for (int k = 0; k < params.dim; ++k)
                B[k] -= h / 6.0 * (dB1[k] + 2.0 * dB2[k] + 2.0 * dB3[k] + dB4[k]);
            sol.A[n] = A;
            sol.B[n] = B;
        }
        // arriving at a risky breakpoint: stored value is the right limit,
        // integration continues from the left limit
        const std::size_t atom = atom_of_break[s];
        if (atom != static_cast<std::size_t>(-1)) {
            const auto& j = loadings.jumps[atom];
            sol.risky[node_lo] = true;
            double A_left = A + j.phi;
            Vector B_left = B;
            for (int k = 0; k < params.dim; ++k) B_left[k] += j.psi[k];
            sol.jumps.push_back({node_lo, A_left, B_left});
            A = A_left;
            B = B_left;
        }
    }
    std::reverse(sol.jumps.begin(), sol.jumps.end());
    return sol;
}

// cell lookup with left-limit handling at risky nodes: within the cell
// just below a risky node the interpolation target is the node's left
// limit, so the stored path stays right-continuous

double RiccatiSolution::A_at(double s) const {
    require_range(s >= t.front() && s <= t.back(), "riccati solution: t outside the grid");
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    if (i > 0) --i;
    if (i >= t.size() - 1) i = t.size() - 2;
    if (s == t[i]) return A[i];
    double hiA = A[i + 1];
    for (const auto& j : jumps)
        if (j.node == i + 1) hiA = j.A_left;
    const double w = (s - t[i]) / (t[i + 1] - t[i]);
    return A[i] + w * (hiA - A[i]);
}

Vector RiccatiSolution::B_at(double s) const {
    require_range(s >= t.front() && s <= t.back(), "riccati solution: t outside the grid");
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    if (i > 0) --i;
    if (i >= t.size() - 1) i = t.size() - 2;
    if (s == t[i]) return B[i];
    const Vector* hiB = &B[i + 1];
    for (const auto& j : jumps)
        if (j.node == i + 1) hiB = &j.B_left;
    const double w = (s - t[i]) / (t[i + 1] - t[i]);
    Vector out(B[i].size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = B[i][k] + w * ((*hiB)[k] - B[i][k]);
    return out;
}

void write_csv(const RiccatiSolution& sol, std::ostream& os) {
    const std::size_t d = sol.B.empty() ? 0 : sol.B.front().size();
    os << "t,A";
    for (std::size_t k = 1; k <= d; ++k) os << ",B_" << k;
    os << ",is_risky\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (std::size_t n = 0; n < sol.t.size(); ++n) {
        put(sol.t[n]);
        os << ',';
        put(sol.A[n]);
        for (std::size_t k = 0; k < d; ++k) {
            os << ',';
            put(sol.B[n][k]);
        }
        os << ',' << (sol.risky[n] ? 1 : 0) << '\n';
    }
}

CirAB cir_closed_form(const CIRParams& params, double t, double T, double u1) {
    require(params.sigma > 0.0, "cir: sigma must be positive");
    require(params.psi1 >= 0.0, "cir: psi1 must be non-negative");
    require_range(t >= 0.0 && t <= T, "cir: need 0 <= t <= T");
    const double mu0 = params.mu0;
    const double mu1 = params.mu1;
    const double s2 = params.sigma * params.sigma;
    const double theta = std::sqrt(mu1 * mu1 + 2.0 * s2);

    auto L1 = [&](double s) { return 2.0 * std::expm1(theta * s); };
    auto L2 = [&](double s) { return theta * (std::exp(theta * s) + 1.0) + mu1 * std::expm1(theta * s); };
    auto L3 = [&](double s) { return theta * (std::exp(theta * s) + 1.0) - mu1 * std::expm1(theta * s); };
    auto L4 = [&](double s) { return s2 * std::expm1(theta * s); };
    auto A0 = [&](double s) {
        return -(2.0 * mu0 / s2) * (std::log(2.0 * theta) + 0.5 * (theta - mu1) * s - std::log(L3(s)));
    };
    auto B0 = [&](double s) { return L1(s) / L3(s); };

    if (T < u1 || t >= u1) return {A0(T - t), B0(T - t)};

    // t < u1 <= T: restart the backward flow below u1 from the left limit
    const double s = u1 - t;
    const double u = B0(T - u1) + params.psi1;
    const double den = L3(s) + L4(s) * u;
    CirAB out;
    out.B = (L1(s) + L2(s) * u) / den;
    out.A = A0(T - u1) +
            (2.0 * mu0 / s2) * (std::log(den / (2.0 * theta)) + 0.5 * (mu1 - theta) * s);
    return out;
}

double affine_bond_price(const RiccatiSolution& sol, const Vector& x, double t, bool defaulted,
                         int cone_dim) {
    require_range(t <= sol.maturity, "affine bond price: t beyond maturity");
    for (int k = 0; k < cone_dim; ++k)
        require(x[k] >= 0.0, "affine bond price: state outside the cone");
    if (defaulted) return 0.0;
    const double A = sol.A_at(t);
    const Vector B = sol.B_at(t);
    return std::exp(-A - dot(B, x));
}

Vector StatePath::node_state(std::size_t node) const {
    Vector out(dim);
    for (int k = 0; k < dim; ++k) out[k] = value(node, k);
    return out;
}

Vector StatePath::at(double s) const {
    require_range(!t.empty() && s >= t.front() && s <= t.back(), "state path: t outside the grid");
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    if (i > 0) --i;
    if (i >= t.size() - 1) i = t.size() - 2;
    const double w = (s - t[i]) / (t[i + 1] - t[i]);
    Vector out(dim);
    for (int k = 0; k < dim; ++k)
        out[k] = value(i, k) + w * (value(i + 1, k) - value(i, k));
    return out;
}

double affine_compensator(const CompensatorLoadings& loadings, const StatePath& path,
                          const core::RiskySchedule& schedule, double t) {
    require(!path.t.empty() && path.t.back() >= t, "affine compensator: path must cover [0,t]");
    require(loadings.jumps.size() == schedule.size(),
            "affine compensator: one jump loading per risky time");
    double integral = 0.0;
    double prev_t = path.t.front();
    double prev_h = loadings.hazard(prev_t, path.node_state(0));
    require(prev_h >= 0.0, "affine compensator: negative instantaneous hazard");
    for (std::size_t i = 1; i < path.t.size() && prev_t < t; ++i) {
        const double ti = std::min(path.t[i], t);
        const Vector xi = ti == path.t[i] ? path.node_state(i) : path.at(ti);
        const double hi = loadings.hazard(ti, xi);
        require(hi >= 0.0, "affine compensator: negative instantaneous hazard");
        integral += 0.5 * (prev_h + hi) * (ti - prev_t);
        prev_t = ti;
        prev_h = hi;
    }
    double atoms = 0.0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double u = schedule[i].time;
        if (u <= t) {
            const Vector xu = path.at(u);
            const auto& j = loadings.jumps[i];
            atoms += -std::expm1(-(j.phi + dot(j.psi, xu)));
        }
    }
    return integral + atoms;
}

EulerStepper::EulerStepper(const AffineParams& params, double step)
    : p_(params), h_(step), sqrt_h_(std::sqrt(step)), xp_(params.dim), mu_(params.dim),
      z_(params.dim), cov_(params.dim, Vector(params.dim, 0.0)),
      l_(params.dim, Vector(params.dim, 0.0)) {
    require(step > 0.0, "euler stepper: step must be positive");
}

void EulerStepper::advance(Vector& x, math::Rng& rng) {
    const int d = p_.dim;
    for (int i = 0; i < d; ++i) xp_[i] = i < p_.cone_dim ? std::max(x[i], 0.0) : x[i];
    for (int k = 0; k < d; ++k) {
        double m = p_.mu0[k];
        for (int i = 0; i < d; ++i) m += xp_[i] * p_.mu[i][k];
        mu_[k] = m;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = p_.sigma0[i][j];
            for (int k = 0; k < d; ++k) v += xp_[k] * p_.sigma[k][i][j];
            cov_[i][j] = 2.0 * v;
        }
    // cov = L L^T; cone-coordinate diagonals can brush zero
    for (int j = 0; j < d; ++j) {
        double diag = cov_[j][j];
        for (int m = 0; m < j; ++m) diag -= l_[j][m] * l_[j][m];
        diag = std::max(diag, 0.0);
        l_[j][j] = std::sqrt(diag);
        for (int i = j + 1; i < d; ++i) {
            double v = cov_[i][j];
            for (int m = 0; m < j; ++m) v -= l_[i][m] * l_[j][m];
            l_[i][j] = l_[j][j] > 0.0 ? v / l_[j][j] : 0.0;
        }
    }
    for (int i = 0; i < d; ++i) z_[i] = rng.normal();
    for (int i = 0; i < d; ++i) {
        double diff = 0.0;
        for (int j = 0; j <= i; ++j) diff += l_[i][j] * z_[j];
        x[i] += mu_[i] * h_ + diff * sqrt_h_;
    }
    for (int i = 0; i < p_.cone_dim; ++i) x[i] = std::max(x[i], 0.0);
}

StatePath simulate_state(const AffineParams& params, const Vector& x0, double horizon,
                         double step, std::uint64_t seed) {
    params.validate();
    require(step > 0.0, "simulate_state: step must be positive");
    require(horizon > 0.0, "simulate_state: horizon must be positive");
    require(static_cast<int>(x0.size()) == params.dim, "simulate_state: x0 size");
    for (int k = 0; k < params.cone_dim; ++k)
        require(x0[k] >= 0.0, "simulate_state: x0 outside the cone");

    const int n = std::max(1, static_cast<int>(std::ceil(horizon / step - 1e-12)));
    const double h = horizon / n;

    math::Rng rng(seed);
    EulerStepper stepper(params, h);
    StatePath path;
    path.dim = params.dim;
    path.t.reserve(n + 1);
    path.flat.reserve(static_cast<std::size_t>(n + 1) * params.dim);
    path.t.push_back(0.0);
    path.flat.insert(path.flat.end(), x0.begin(), x0.end());

    Vector x = x0;
    for (int k = 1; k <= n; ++k) {
        stepper.advance(x, rng);
        path.t.push_back(k == n ? horizon : k * h);
        path.flat.insert(path.flat.end(), x.begin(), x.end());
    }
    return path;
}

} // namespace dtsm::affine
