#pragma once

#include <nlohmann/json.hpp>

#include "rme/types.hpp"
#include "rme/value.hpp"
#include "rme/world.hpp"

namespace rme {

using json = nlohmann::json;

json value_to_json(const Value& v);
Value value_from_json(const json& j);

json operation_to_json(const Operation& op);
Operation operation_from_json(const json& j);

json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const json& j);

json event_to_json(const Event& ev);
Event event_from_json(const json& j);

json trace_to_json(const ExecutionTrace& t);
ExecutionTrace trace_from_json(const json& j);

}  // namespace rme
