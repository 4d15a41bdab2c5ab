#include "rme/json_io.hpp"

namespace rme {

json value_to_json(const Value& v) {
  if (v.is_null()) return json{{"t", "null"}};
  if (v.is_boolean()) return json{{"t", "bool"}, {"v", v.as_boolean()}};
  if (v.is_integer()) return json{{"t", "int"}, {"v", v.as_integer()}};
  if (v.is_symbol()) return json{{"t", "sym"}, {"v", v.as_symbol()}};
  json items = json::array();
  for (const auto& item : v.as_tuple()) items.push_back(value_to_json(item));
  return json{{"t", "tup"}, {"v", std::move(items)}};
}

Value value_from_json(const json& j) {
  const std::string t = j.at("t").get<std::string>();
  if (t == "null") return Value::null();
  if (t == "bool") return Value::boolean(j.at("v").get<bool>());
  if (t == "int") return Value::integer(j.at("v").get<std::int64_t>());
  if (t == "sym") return Value::symbol(j.at("v").get<std::string>());
  if (t == "tup") {
    std::vector<Value> items;
    for (const auto& item : j.at("v")) items.push_back(value_from_json(item));
    return Value::tuple(std::move(items));
  }
  throw RmeError(ErrorCode::ParseError, "unknown value tag: " + t);
}

json operation_to_json(const Operation& op) {
  json args = json::array();
  switch (op.kind) {
    case OpKind::Read:
    case OpKind::Fai:
      break;
    case OpKind::Fas:
      args.push_back(value_to_json(op.arg0));
      break;
    case OpKind::Cas:
      args.push_back(value_to_json(op.arg0));
      args.push_back(value_to_json(op.arg1));
      break;
  }
  return json{{"kind", op_kind_name(op.kind)}, {"args", std::move(args)}};
}

Operation operation_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const json& args = j.at("args");
  if (kind == "read") return Operation::read();
  if (kind == "fai") return Operation::fai();
  if (kind == "fas") return Operation::fas(value_from_json(args.at(0)));
  if (kind == "cas") {
    return Operation::cas(value_from_json(args.at(0)), value_from_json(args.at(1)));
  }
  throw RmeError(ErrorCode::ParseError, "unknown operation kind: " + kind);
}

json schedule_to_json(const Schedule& s) {
  json out = json::array();
  for (const Step& st : s.steps) out.push_back(json{{"pid", st.pid}, {"crash", st.crash}});
  return out;
}

Schedule schedule_from_json(const json& j) {
  Schedule s;
  for (const auto& st : j) {
    s.push(Step{st.at("pid").get<ProcessId>(), st.at("crash").get<bool>()});
  }
  return s;
}

namespace {

const char* event_kind_name(Event::Kind k) {
  switch (k) {
    case Event::Kind::MemOp: return "mem";
    case Event::Kind::EnterCS: return "enter_cs";
    case Event::Kind::LeaveCS: return "leave_cs";
    case Event::Kind::Complete: return "complete";
    case Event::Kind::Crash: return "crash";
  }
  return "?";
}

Section section_from_name(const std::string& s) {
  if (s == "remainder") return Section::Remainder;
  if (s == "entry") return Section::Entry;
  if (s == "cs") return Section::CS;
  if (s == "exit") return Section::Exit;
  if (s == "recover") return Section::Recover;
  throw RmeError(ErrorCode::ParseError, "unknown section: " + s);
}

}  // namespace

json event_to_json(const Event& ev) {
  json j;
  j["pid"] = ev.pid;
  if (ev.kind == Event::Kind::MemOp) {
    j["op"] = operation_to_json(ev.op);
    j["reg"] = ev.reg;
    j["rmr"] = ev.rmr;
    j["response"] = value_to_json(ev.response);
  } else {
    j["op"] = json{{"kind", event_kind_name(ev.kind)}, {"args", json::array()}};
    j["reg"] = nullptr;
    j["rmr"] = false;
    j["response"] = nullptr;
  }
  j["section_after"] = section_name(ev.section_after);
  return j;
}

Event event_from_json(const json& j) {
  Event ev;
  ev.pid = j.at("pid").get<ProcessId>();
  const std::string kind = j.at("op").at("kind").get<std::string>();
  if (kind == "enter_cs") {
    ev.kind = Event::Kind::EnterCS;
  } else if (kind == "leave_cs") {
    ev.kind = Event::Kind::LeaveCS;
  } else if (kind == "complete") {
    ev.kind = Event::Kind::Complete;
  } else if (kind == "crash") {
    ev.kind = Event::Kind::Crash;
  } else {
    ev.kind = Event::Kind::MemOp;
    ev.op = operation_from_json(j.at("op"));
    ev.reg = j.at("reg").get<RegisterId>();
    ev.rmr = j.at("rmr").get<bool>();
    ev.response = value_from_json(j.at("response"));
  }
  ev.section_after = section_from_name(j.at("section_after").get<std::string>());
  return ev;
}

json trace_to_json(const ExecutionTrace& t) {
  json out = json::array();
  for (const Event& ev : t.events) out.push_back(event_to_json(ev));
  return out;
}

ExecutionTrace trace_from_json(const json& j) {
  ExecutionTrace t;
  for (const auto& ev : j) t.events.push_back(event_from_json(ev));
  return t;
}

}  // namespace rme
