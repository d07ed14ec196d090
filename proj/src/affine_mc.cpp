#include "dtsm/affine_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtsm/errors.hpp"

namespace dtsm::affine {

noarb::PathSampler make_affine_sampler(AffineParams params, CompensatorLoadings loadings,
                                       core::RiskySchedule schedule, Vector x0, double step) {
    params.validate();
    loadings.validate(params.dim, params.cone_dim);
    require(step > 0.0, "affine sampler: step must be positive");
    require(loadings.jumps.size() == schedule.size(),
            "affine sampler: one jump loading per risky time");

    return [params, loadings, schedule, x0, step](std::uint64_t path_seed,
                                                  std::span<const double> t_grid) {
        // event timeline: observation times and risky times, ascending
        struct Event {
            double t;
            bool observe;
            std::size_t atom; // size_t(-1) when not an atom
        };
        std::vector<Event> events;
        for (double t : t_grid) events.push_back({t, true, static_cast<std::size_t>(-1)});
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            const double u = schedule[i].time;
            if (u <= 0.0) continue;
            bool merged = false;
            for (auto& e : events)
                if (e.t == u) {
                    e.atom = i;
                    merged = true;
                }
            if (!merged) events.push_back({u, false, i});
        }
        std::sort(events.begin(), events.end(),
                  [](const Event& a, const Event& b) { return a.t < b.t; });

        math::Rng rng(path_seed);
        const double zeta = rng.exponential();

        std::vector<noarb::McPoint> out;
        out.reserve(t_grid.size());

        Vector x = x0;
        double t = 0.0;
        double cum = 0.0; // integrated hazard
        double tau = std::numeric_limits<double>::infinity();
        double h_prev = loadings.hazard(0.0, x);

        auto record = [&](double at) {
            noarb::McPoint p;
            p.t = at;
            p.defaulted = tau <= at;
            p.x = x;
            p.numeraire = 1.0;
            out.push_back(p);
        };

        for (const auto& ev : events) {
            if (ev.t > t) {
                const int n = std::max(1, static_cast<int>(std::ceil((ev.t - t) / step - 1e-12)));
                const double h = (ev.t - t) / n;
                EulerStepper seg(params, h);
                for (int k = 0; k < n; ++k) {
                    seg.advance(x, rng);
                    const double t_next = k == n - 1 ? ev.t : t + h;
                    const double h_next = loadings.hazard(t_next, x);
                    const double gain = 0.5 * (h_prev + h_next) * h;
                    if (std::isinf(tau) && cum + gain >= zeta) {
                        const double w = gain > 0.0 ? (zeta - cum) / gain : 1.0;
                        tau = t + w * h;
                    }
                    cum += gain;
                    h_prev = h_next;
                    t = t_next;
                }
            }
            if (ev.atom != static_cast<std::size_t>(-1) && std::isinf(tau)) {
                const auto& j = loadings.jumps[ev.atom];
                double lam_prime = j.phi;
                for (int k = 0; k < params.dim; ++k) lam_prime += j.psi[k] * x[k];
                if (cum < zeta && zeta <= cum + lam_prime) tau = ev.t;
                cum += lam_prime;
            } else if (ev.atom != static_cast<std::size_t>(-1)) {
                const auto& j = loadings.jumps[ev.atom];
                double lam_prime = j.phi;
                for (int k = 0; k < params.dim; ++k) lam_prime += j.psi[k] * x[k];
                cum += lam_prime;
            }
            if (ev.observe) record(ev.t);
        }
        return out;
    };
}

} // namespace dtsm::affine
