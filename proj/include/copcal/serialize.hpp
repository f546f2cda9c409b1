#pragma once

// JSON conversions for the model/state/report types. Numeric values are
// emitted by the JSON library's round-trip-exact writer, so a read-back
// reproduces every double bit for bit; -infinity (the log-zero sentinel)
// is encoded as null.

#include <json.hpp>

#include "copcal/calibration.hpp"
#include "copcal/cvml.hpp"
#include "copcal/data.hpp"
#include "copcal/mcmc.hpp"
#include "copcal/model.hpp"

namespace copcal {

nlohmann::json calibration_to_json(const calibration_state& s);
calibration_state calibration_from_json(const nlohmann::json& j);

nlohmann::json map_to_json(const standardization_map& m);
standardization_map map_from_json(const nlohmann::json& j);

nlohmann::json spec_to_json(const model_spec& spec);
model_spec spec_from_json(const nlohmann::json& j);

nlohmann::json options_to_json(const mcmc_options& o);
mcmc_options options_from_json(const nlohmann::json& j);

nlohmann::json acceptance_to_json(const std::vector<block_stat>& stats);

nlohmann::json report_to_json(const cvml_report& r);
cvml_report report_from_json(const nlohmann::json& j);

std::string mode_name(likelihood_mode mode);
likelihood_mode mode_from_name(const std::string& name);

// File helpers shared by the CLI: dump(2)-formatted with trailing newline.
void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json(const std::string& path);

}  // namespace copcal
