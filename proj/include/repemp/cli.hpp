#pragma once

#include <string>

#include <json.hpp>

#include "repemp/curator.hpp"
#include "repemp/empowerment.hpp"

namespace repemp {

// Exit codes: 0 ok, 2 validation failure, 3 resource cap, 4 task failure.
int run_cli(int argc, const char* const* argv);

nlohmann::ordered_json report_to_json(const EmpowermentReport& r);

// Full curator/executor loop over the scenario's tasks. Deterministic given
// scenario + seed; wall-clock never enters the report.
nlohmann::ordered_json run_scenario(const Scenario& s, Estimator estimator, int* failed_tasks);

} // namespace repemp
