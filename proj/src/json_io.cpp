#include "dtsm/json_io.hpp"

#include <cmath>
#include <fstream>

#include "dtsm/errors.hpp"

namespace dtsm::io {

namespace {

std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

} // namespace

MarketScenario market_scenario_from_json(const json& j) {
    const auto time_grid = doubles(j.at("time_grid"));
    const auto maturity_grid = doubles(j.at("maturity_grid"));
    require(!time_grid.empty() && time_grid.front() == 0.0, "scenario: time grid must start at 0");
    require(!maturity_grid.empty() && maturity_grid.front() == 0.0,
            "scenario: maturity grid must start at 0");

    std::vector<std::vector<double>> f;
    for (const auto& row : j.at("f")) f.push_back(doubles(row));

    std::vector<core::RiskyTime> entries;
    std::vector<std::vector<double>> g;
    if (j.contains("atoms")) {
        for (const auto& a : j.at("atoms")) {
            core::RiskyTime e;
            e.time = a.at("u").get<double>();
            e.gamma = a.at("gamma").get<double>();
            if (a.contains("S") && !a.at("S").is_null())
                e.announce_time = a.at("S").get<double>();
            entries.push_back(e);
            g.push_back(doubles(a.at("g")));
        }
    }
    core::RiskySchedule schedule(entries);

    auto column = [&](const char* key) {
        if (j.contains(key)) return doubles(j.at(key));
        return std::vector<double>(time_grid.size(), 0.0);
    };
    const auto h = column("h");
    const auto r = column("r");
    require(h.size() == time_grid.size() && r.size() == time_grid.size(),
            "scenario: h and r must be sampled on the time grid");

    return MarketScenario{
        core::ForwardSurface(time_grid, maturity_grid, f, schedule, g),
        core::CompensatorSpec(math::PiecewiseLinear(time_grid, h), schedule),
        core::ShortRate(math::PiecewiseLinear(time_grid, r)),
    };
}

json market_scenario_to_json(const MarketScenario& s) {
    json j;
    j["time_grid"] = s.surface.time_grid();
    j["maturity_grid"] = s.surface.maturity_grid();
    j["f"] = s.surface.f_values();
    json atoms = json::array();
    const auto& schedule = s.surface.schedule();
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        json a;
        a["u"] = schedule[i].time;
        if (schedule[i].announce_time) a["S"] = *schedule[i].announce_time;
        a["gamma"] = schedule[i].gamma;
        a["g"] = s.surface.g_values()[i];
        atoms.push_back(a);
    }
    j["atoms"] = atoms;
    j["h"] = s.compensator.hazard().values();
    j["r"] = s.short_rate.curve().values();
    return j;
}

json affine_params_to_json(const affine::AffineParams& p) {
    json j;
    j["dim"] = p.dim;
    j["cone_dim"] = p.cone_dim;
    j["mu0"] = p.mu0;
    j["mu"] = p.mu;
    j["sigma0"] = p.sigma0;
    j["sigma"] = p.sigma;
    return j;
}

affine::AffineParams affine_params_from_json(const json& j) {
    affine::AffineParams p;
    p.dim = j.at("dim").get<int>();
    p.cone_dim = j.at("cone_dim").get<int>();
    p.mu0 = doubles(j.at("mu0"));
    for (const auto& v : j.at("mu")) p.mu.push_back(doubles(v));
    for (const auto& row : j.at("sigma0")) p.sigma0.push_back(doubles(row));
    for (const auto& m : j.at("sigma")) {
        affine::Matrix mat;
        for (const auto& row : m) mat.push_back(doubles(row));
        p.sigma.push_back(mat);
    }
    p.validate();
    return p;
}

json loadings_to_json(const affine::CompensatorLoadings& l) {
    json j;
    j["grid"] = l.phi0.knots();
    j["phi0"] = l.phi0.values();
    json psi0 = json::array();
    for (const auto& c : l.psi0) psi0.push_back(c.values());
    j["psi0"] = psi0;
    json jumps = json::array();
    for (const auto& jump : l.jumps) {
        json e;
        e["phi"] = jump.phi;
        e["psi"] = jump.psi;
        jumps.push_back(e);
    }
    j["jumps"] = jumps;
    return j;
}

affine::CompensatorLoadings loadings_from_json(const json& j) {
    affine::CompensatorLoadings l;
    const auto grid = doubles(j.at("grid"));
    l.phi0 = math::PiecewiseLinear(grid, doubles(j.at("phi0")));
    for (const auto& c : j.at("psi0"))
        l.psi0.emplace_back(grid, doubles(c));
    if (j.contains("jumps")) {
        for (const auto& e : j.at("jumps")) {
            affine::CompensatorLoadings::Jump jump;
            jump.phi = e.at("phi").get<double>();
            jump.psi = doubles(e.at("psi"));
            l.jumps.push_back(jump);
        }
    }
    return l;
}

json merton_setup_to_json(const merton::MertonSetup& s) {
    return json{{"v0", s.v0},       {"sigma", s.sigma},         {"muX", s.muX},
                {"varX", s.varX},   {"K", s.K},                 {"Kprime", s.Kprime},
                {"T", s.T},         {"U", s.U},                 {"S", s.S},
                {"sigma_eta", s.sigma_eta}, {"r", s.r}};
}

merton::MertonSetup merton_setup_from_json(const json& j) {
    merton::MertonSetup s;
    s.v0 = j.at("v0").get<double>();
    s.sigma = j.at("sigma").get<double>();
    s.muX = j.at("muX").get<double>();
    s.varX = j.at("varX").get<double>();
    s.K = j.at("K").get<double>();
    s.Kprime = j.at("Kprime").get<double>();
    s.T = j.at("T").get<double>();
    s.U = j.at("U").get<double>();
    s.S = j.at("S").get<double>();
    s.sigma_eta = j.at("sigma_eta").get<double>();
    s.r = j.value("r", 0.0);
    s.validate();
    return s;
}

sim::HazardPath hazard_path_from_json(const json& j) {
    const double horizon = j.at("horizon").get<double>();
    require(horizon > 0.0, "hazard scenario: horizon must be positive");
    const auto lam = doubles(j.at("lambda"));
    require(lam.size() >= 2, "hazard scenario: lambda needs at least two samples");
    std::vector<double> grid(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i)
        grid[i] = horizon * static_cast<double>(i) / static_cast<double>(lam.size() - 1);
    std::vector<sim::HazardPath::Atom> atoms;
    if (j.contains("atoms")) {
        for (const auto& a : j.at("atoms"))
            atoms.push_back({a.at("u").get<double>(), a.at("lamp").get<double>()});
    }
    return sim::HazardPath(math::PiecewiseLinear(grid, lam), atoms);
}

json hazard_path_to_json(const sim::HazardPath& p) {
    json j;
    j["horizon"] = p.horizon();
    j["lambda"] = p.lambda().values();
    json atoms = json::array();
    for (const auto& a : p.atoms()) atoms.push_back({{"u", a.u}, {"lamp", a.lam_prime}});
    j["atoms"] = atoms;
    return j;
}

json condition_report_to_json(const noarb::ConditionReport& r) {
    json j;
    j["condition"] = r.condition;
    j["max_residual"] = finite_or_string(r.max_residual);
    j["argmax"] = {{"t", r.argmax_t}, {"T", r.argmax_T}};
    j["tol"] = r.tol;
    j["pass"] = r.pass;
    return j;
}

json verification_report_to_json(const noarb::VerificationReport& r) {
    json j;
    j["conditions"] = json::array();
    for (const auto& c : r.conditions) j["conditions"].push_back(condition_report_to_json(c));
    j["pass"] = r.pass();
    return j;
}

json martingale_report_to_json(const noarb::MartingaleReport& r) {
    json j;
    j["condition"] = "martingale";
    j["reference"] = r.reference;
    j["points"] = json::array();
    for (const auto& p : r.points)
        j["points"].push_back({{"t", p.t},
                               {"mean", p.mean},
                               {"std_error", p.std_error},
                               {"z", finite_or_string(p.z)}});
    j["pass"] = r.pass;
    return j;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    return json::parse(in);
}

} // namespace dtsm::io
