#pragma once

#include <string>

#include <json.hpp>

#include "dtsm/affine.hpp"
#include "dtsm/core_model.hpp"
#include "dtsm/default_sim.hpp"
#include "dtsm/merton.hpp"
#include "dtsm/noarb.hpp"

namespace dtsm::io {

using nlohmann::json;

/// Market scenario document:
/// {"time_grid":[...], "maturity_grid":[...], "f":[[...]],
///  "atoms":[{"u":..,"S":..,"gamma":..,"g":[...]}], "h":[...], "r":[...]}
/// h and r are sampled on the time grid and default to zero when absent.
struct MarketScenario {
    core::ForwardSurface surface;
    core::CompensatorSpec compensator;
    core::ShortRate short_rate;
};

MarketScenario market_scenario_from_json(const json& j);
json market_scenario_to_json(const MarketScenario& s);

json affine_params_to_json(const affine::AffineParams& p);
affine::AffineParams affine_params_from_json(const json& j);

json loadings_to_json(const affine::CompensatorLoadings& l);
affine::CompensatorLoadings loadings_from_json(const json& j);

json merton_setup_to_json(const merton::MertonSetup& s);
merton::MertonSetup merton_setup_from_json(const json& j);

/// Default scenario document:
/// {"lambda":[...], "atoms":[{"u":..,"lamp":..}], "horizon":..}
/// lambda is sampled on an equally spaced grid over [0,horizon].
sim::HazardPath hazard_path_from_json(const json& j);
json hazard_path_to_json(const sim::HazardPath& p);

json condition_report_to_json(const noarb::ConditionReport& r);
json verification_report_to_json(const noarb::VerificationReport& r);
json martingale_report_to_json(const noarb::MartingaleReport& r);

json load_json_file(const std::string& path);

} // namespace dtsm::io
