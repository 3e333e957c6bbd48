#include "mmvm/program_file.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mmvm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ProgramFileError(msg); }

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + ": missing field '" + key + "'");
  return j.at(key);
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_string()) fail(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + ": expected a number");
  return v.get<double>();
}

OperationDef parse_operation(const json& j, std::size_t index) {
  const std::string where = "signature[" + std::to_string(index) + "]";
  OperationDef op;
  op.name = require_string(j, "name", where);
  const json& arity = require(j, "arity", where);
  if (!arity.is_number_integer()) fail(where + ": arity must be an integer");
  op.arity = arity.get<int>();
  auto kind = op_kind_from_string(require_string(j, "kind", where));
  if (!kind) fail(where + ": unknown kind");
  op.kind = *kind;
  if (j.contains("params")) {
    const json& params = j.at("params");
    if (!params.is_object()) fail(where + ": params must be an object");
    for (const auto& [k, v] : params.items()) op.params[k] = require_number(v, where + ".params." + k);
  }
  if (j.contains("rule")) {
    if (!j.at("rule").is_string()) fail(where + ": rule must be a string");
    auto rule = op_rule_from_string(j.at("rule").get<std::string>());
    if (!rule) fail(where + ": unknown rule '" + j.at("rule").get<std::string>() + "'");
    op.rule = *rule;
  } else if (op.kind == OpKind::constant) {
    op.rule = OpRule::constant;
  } else if (op.kind == OpKind::stochastic) {
    op.rule = OpRule::propagator;
  } else if (op.arity == 1) {
    op.rule = OpRule::identity;
  } else if (op.arity == 2) {
    op.rule = OpRule::product;
  } else {
    fail(where + ": cannot infer a rule; give one explicitly");
  }
  return op;
}

ElementSource parse_source(const json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) fail(where + ": source must have exactly one of const/external/node");
  if (j.contains("const")) return constant_source(require_number(j.at("const"), where + ".const"));
  if (j.contains("node")) {
    if (!j.at("node").is_string()) fail(where + ": node source must be a string");
    return node_source(j.at("node").get<std::string>());
  }
  if (j.contains("external")) {
    const json& e = j.at("external");
    Schedule s;
    auto mode = schedule_mode_from_string(require_string(e, "mode", where + ".external"));
    if (!mode) fail(where + ": schedule mode must be 'step' or 'linear'");
    s.mode = *mode;
    const json& points = require(e, "points", where + ".external");
    if (!points.is_array()) fail(where + ": points must be an array");
    for (const auto& p : points) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer()) {
        fail(where + ": each point must be [integer t, value]");
      }
      s.points.emplace_back(p[0].get<std::int64_t>(), require_number(p[1], where + ".points"));
    }
    return external_source(std::move(s));
  }
  fail(where + ": unknown source kind");
}

json source_to_json(const ElementSource& s) {
  if (const auto* c = std::get_if<ConstantSource>(&s)) return json{{"const", c->value}};
  if (const auto* n = std::get_if<NodeSource>(&s)) return json{{"node", n->node}};
  const Schedule& sched = std::get<ExternalSource>(s).schedule;
  json points = json::array();
  for (const auto& [t, v] : sched.points) points.push_back(json::array({t, v}));
  return json{{"external", {{"mode", std::string(to_string(sched.mode))}, {"points", points}}}};
}

std::vector<std::string> parse_string_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& s : j) {
    if (!s.is_string()) fail(where + " must be an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

ProgramFile parse_program_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("program document must be a JSON object");

  ProgramFile file;
  Program& prog = file.program;

  const json& sig = require(doc, "signature", "program");
  if (!sig.is_array()) fail("signature must be an array of operations");
  std::vector<OperationDef> ops;
  for (std::size_t i = 0; i < sig.size(); ++i) ops.push_back(parse_operation(sig[i], i));
  std::string identity = doc.contains("identity") ? require_string(doc, "identity", "program") : "id";
  prog.signature = Signature(std::move(ops), identity);

  const json& elements = require(doc, "elements", "program");
  if (!elements.is_array()) fail("elements must be an array");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string where = "elements[" + std::to_string(i) + "]";
    std::string column = require_string(elements[i], "column", where);
    std::string row = require_string(elements[i], "row", where);
    if (prog.matrix.find(column, row) != nullptr) fail(where + ": duplicate element (" + column + ")#(" + row + ")");
    prog.matrix.set(column, row, parse_source(require(elements[i], "source", where), where + ".source"));
  }

  if (doc.contains("policy")) {
    auto p = policy_from_string(require_string(doc, "policy", "program"));
    if (!p) fail("policy must be free, nonneg or substochastic");
    prog.policy = *p;
  }
  if (doc.contains("violation_mode")) {
    auto m = violation_mode_from_string(require_string(doc, "violation_mode", "program"));
    if (!m) fail("violation_mode must be reject or clamp");
    prog.violation_mode = *m;
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      fail("seed must be a non-negative integer");
    }
    prog.seed = s.get<std::uint64_t>();
    file.has_seed = true;
  }
  if (doc.contains("shared_input_groups")) {
    const json& groups = doc.at("shared_input_groups");
    if (!groups.is_array()) fail("shared_input_groups must be an array");
    for (const auto& g : groups) {
      auto names = parse_string_list(g, "shared input group");
      prog.shared_input_groups.emplace_back(names.begin(), names.end());
    }
  }
  if (doc.contains("watch")) file.watch = parse_string_list(doc.at("watch"), "watch");

  validate_program(prog);
  for (const auto& w : file.watch) require_node(w, prog.signature);
  return file;
}

ProgramFile load_program_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_program_file(ss.str());
}

std::string serialize_program_file(const ProgramFile& file) {
  const Program& prog = file.program;
  json doc;
  json sig = json::array();
  for (const auto& op : prog.signature.operations()) {
    json params = json::object();
    for (const auto& [k, v] : op.params) params[k] = v;
    sig.push_back({{"name", op.name},
                   {"arity", op.arity},
                   {"kind", std::string(to_string(op.kind))},
                   {"rule", std::string(to_string(op.rule))},
                   {"params", params}});
  }
  doc["signature"] = sig;
  doc["identity"] = prog.signature.identity_name();
  json elements = json::array();
  prog.matrix.for_each([&](const std::string& c, const std::string& r, const ElementSource& s) {
    elements.push_back({{"column", c}, {"row", r}, {"source", source_to_json(s)}});
  });
  doc["elements"] = elements;
  doc["policy"] = std::string(to_string(prog.policy));
  doc["violation_mode"] = std::string(to_string(prog.violation_mode));
  if (file.has_seed) doc["seed"] = prog.seed;
  if (!prog.shared_input_groups.empty()) {
    json groups = json::array();
    for (const auto& g : prog.shared_input_groups) groups.push_back(std::vector<std::string>(g.begin(), g.end()));
    doc["shared_input_groups"] = groups;
  }
  if (!file.watch.empty()) doc["watch"] = file.watch;
  return doc.dump(2) + "\n";
}

void save_program_file(const ProgramFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << serialize_program_file(file);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace mmvm
