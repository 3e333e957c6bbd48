#include "mmvm/signature.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace mmvm {

namespace {

constexpr std::string_view kArg = "arg";

bool is_printable(char c) { return c >= 0x20 && c <= 0x7e; }

/// Index one past the ')' matching the '(' at `open`, or npos.
std::size_t match_paren(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      if (--depth == 0) return i + 1;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

ParsedName invalid(std::string reason) {
  ParsedName p;
  p.error = std::move(reason);
  return p;
}

ParsedName parse_output(std::string_view s, const Signature& sig) {
  const OperationDef* found = nullptr;
  for (const auto& op : sig.operations()) {
    if (s.size() > op.name.size() && s.starts_with(op.name) && s[op.name.size()] == ' ') {
      found = &op;
      break;
    }
  }
  if (found == nullptr) {
    return invalid("'" + std::string(s) + "' does not start with an operation name and a space");
  }
  std::string_view w = s.substr(found->name.size() + 1);

  ParsedName out;
  bool plain = true;
  for (char c : w) {
    if (!is_printable(c)) {
      return invalid("non-printable character in '" + std::string(s) + "'");
    }
    if (is_reserved_char(c)) plain = false;
  }
  if (!plain) {
    std::string err;
    auto element = parse_element_name(w, sig, &err);
    if (!element) {
      return invalid("suffix of '" + std::string(s) + "' is not an element name: " + err);
    }
    out.embedded = std::move(element);
  }
  out.node = NodeName{std::string(s), NodeRole::output, found->name, std::string(w), 0};
  return out;
}

ParsedName parse_input(std::string_view s, const Signature& sig) {
  std::string_view rest = s.substr(kArg.size());
  std::size_t digits = 0;
  while (digits < rest.size() && rest[digits] >= '0' && rest[digits] <= '9') ++digits;
  if (digits == 0) return invalid("'" + std::string(s) + "': missing argument index");
  if (rest[0] == '0') return invalid("'" + std::string(s) + "': argument index has a leading zero");
  if (digits > 9) return invalid("'" + std::string(s) + "': argument index too large");
  int k = 0;
  std::from_chars(rest.data(), rest.data() + digits, k);
  if (digits >= rest.size() || rest[digits] != ' ') {
    return invalid("'" + std::string(s) + "': expected a space after the argument index");
  }
  std::string_view owner = rest.substr(digits + 1);
  if (owner.starts_with(kArg)) {
    return invalid("'" + std::string(s) + "': owner is not an output name");
  }
  ParsedName parsed = parse_output(owner, sig);
  if (!parsed.valid()) return parsed;
  const OperationDef* op = sig.find(parsed.node->op);
  if (k > op->arity) {
    return invalid("'" + std::string(s) + "': operation '" + op->name + "' has arity " +
                   std::to_string(op->arity));
  }
  NodeName& node = *parsed.node;
  node.raw = std::string(s);
  node.role = NodeRole::input;
  node.arg_index = k;
  return parsed;
}

}  // namespace

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::deterministic: return "deterministic";
    case OpKind::stochastic: return "stochastic";
    case OpKind::constant: return "constant";
  }
  return "?";
}

std::string_view to_string(OpRule rule) {
  switch (rule) {
    case OpRule::identity: return "identity";
    case OpRule::constant: return "const";
    case OpRule::propagator: return "prop";
    case OpRule::product: return "mul";
  }
  return "?";
}

std::optional<OpKind> op_kind_from_string(std::string_view s) {
  for (auto k : {OpKind::deterministic, OpKind::stochastic, OpKind::constant}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<OpRule> op_rule_from_string(std::string_view s) {
  for (auto r : {OpRule::identity, OpRule::constant, OpRule::propagator, OpRule::product}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

double OperationDef::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace ops {

OperationDef identity(std::string name) {
  return {std::move(name), 1, OpKind::deterministic, OpRule::identity, {}};
}

OperationDef constant(std::string name, double value) {
  return {std::move(name), 0, OpKind::constant, OpRule::constant, {{"value", value}}};
}

OperationDef propagator(std::string name, double p) {
  return {std::move(name), 1, OpKind::stochastic, OpRule::propagator, {{"p", p}}};
}

OperationDef product(std::string name) {
  return {std::move(name), 2, OpKind::deterministic, OpRule::product, {}};
}

}  // namespace ops

Signature::Signature(std::vector<OperationDef> operations, std::string identity_name)
    : operations_(std::move(operations)), identity_name_(std::move(identity_name)) {}

const OperationDef* Signature::find(std::string_view name) const {
  for (const auto& op : operations_) {
    if (op.name == name) return &op;
  }
  return nullptr;
}

int Signature::max_arity() const {
  int m = 0;
  for (const auto& op : operations_) m = std::max(m, op.arity);
  return m;
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.message << '\n';
  return os.str();
}

bool is_reserved_char(char c) { return c == '(' || c == ')' || c == '#'; }

bool in_alphabet(char c) { return is_printable(c) && !is_reserved_char(c); }

ValidationReport validate_signature(const Signature& sig) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string msg) {
    report.violations.push_back({kind, std::move(msg)});
  };

  std::vector<std::string> names;
  for (const auto& op : sig.operations()) {
    const std::string quoted = "'" + op.name + "'";
    if (op.name.empty()) add(ViolationKind::empty_name, "operation with an empty name");
    for (char c : op.name) {
      if (is_reserved_char(c)) {
        add(ViolationKind::reserved_character,
            "operation " + quoted + " contains reserved character '" + std::string(1, c) + "'");
        break;
      }
      if (!is_printable(c)) {
        add(ViolationKind::non_printable, "operation " + quoted + " contains a non-printable character");
        break;
      }
    }
    names.push_back(op.name);

    if (op.arity < 0) add(ViolationKind::bad_arity, "operation " + quoted + " has negative arity");
    if (op.kind == OpKind::constant && op.arity != 0) {
      add(ViolationKind::bad_arity, "constant operation " + quoted + " must have arity 0");
    }
    switch (op.rule) {
      case OpRule::identity:
        if (op.arity != 1 || op.kind != OpKind::deterministic) {
          add(ViolationKind::bad_arity, "identity rule " + quoted + " must be deterministic with arity 1");
        }
        break;
      case OpRule::constant:
        if (op.arity != 0 || op.kind != OpKind::constant) {
          add(ViolationKind::bad_arity, "const rule " + quoted + " must be of kind constant with arity 0");
        }
        if (!op.params.contains("value")) {
          add(ViolationKind::bad_params, "const rule " + quoted + " needs parameter 'value'");
        }
        break;
      case OpRule::propagator: {
        if (op.arity != 1 || op.kind != OpKind::stochastic) {
          add(ViolationKind::bad_arity, "prop rule " + quoted + " must be stochastic with arity 1");
        }
        double p = op.param("p", -1.0);
        if (!(p >= 0.0 && p <= 1.0)) {
          add(ViolationKind::bad_params, "prop rule " + quoted + " needs parameter 'p' in [0, 1]");
        }
        break;
      }
      case OpRule::product:
        if (op.arity != 2 || op.kind != OpKind::deterministic) {
          add(ViolationKind::bad_arity, "mul rule " + quoted + " must be deterministic with arity 2");
        }
        break;
    }
  }

  names.emplace_back(kArg);
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = 0; b < names.size(); ++b) {
      if (a == b || names[a].empty()) continue;
      // Report each unordered duplicate once.
      if (names[a] == names[b] && a > b) continue;
      if (names[b].starts_with(names[a])) {
        add(ViolationKind::prefix_clash, "'" + names[a] + "' is a prefix of '" + names[b] + "'");
      }
    }
  }

  const OperationDef* id = sig.find(sig.identity_name());
  if (id == nullptr) {
    add(ViolationKind::missing_identity, "identity operation '" + sig.identity_name() + "' is not in the signature");
  } else if (id->rule != OpRule::identity || id->arity != 1) {
    add(ViolationKind::bad_identity, "designated identity '" + id->name + "' is not an arity-1 identity rule");
  }
  return report;
}

std::string NodeName::owner() const {
  if (role == NodeRole::output) return raw;
  return raw.substr(raw.find(' ') + 1);
}

std::string ElementName::raw() const { return "(" + column + ")#(" + row + ")"; }

ParsedName parse_name(std::string_view s, const Signature& sig) {
  if (s.starts_with(kArg)) return parse_input(s, sig);
  return parse_output(s, sig);
}

std::optional<ElementName> parse_element_name(std::string_view s, const Signature& sig,
                                              std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<ElementName> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  if (s.size() < 6 || s.front() != '(' || s.back() != ')') {
    return fail("'" + std::string(s) + "' is not of the form (column)#(row)");
  }
  std::size_t first_end = match_paren(s, 0);
  if (first_end == std::string_view::npos || first_end + 2 >= s.size() || s[first_end] != '#' ||
      s[first_end + 1] != '(' || match_paren(s, first_end + 1) != s.size()) {
    return fail("'" + std::string(s) + "' is not of the form (column)#(row)");
  }
  std::string_view column = s.substr(1, first_end - 2);
  std::string_view row = s.substr(first_end + 2, s.size() - first_end - 3);

  ParsedName col = parse_name(column, sig);
  if (!col.valid()) return fail(col.error);
  if (!col.node->is_input()) return fail("column '" + std::string(column) + "' is not an input name");
  ParsedName r = parse_name(row, sig);
  if (!r.valid()) return fail(r.error);
  if (!r.node->is_output()) return fail("row '" + std::string(row) + "' is not an output name");
  return ElementName{std::string(column), std::string(row)};
}

NodeName output_node_name(const Signature& sig, std::string_view op_name, std::string_view w) {
  if (sig.find(op_name) == nullptr) {
    throw NameError("unknown operation '" + std::string(op_name) + "'");
  }
  std::string raw = std::string(op_name) + " " + std::string(w);
  ParsedName p = parse_name(raw, sig);
  if (!p.valid()) throw NameError(p.error);
  return *p.node;
}

NodeName input_node_name(const Signature& sig, std::string_view output, int k) {
  NodeName out = require_output(output, sig);
  const OperationDef* op = sig.find(out.op);
  if (k < 1 || k > op->arity) {
    throw NameError("argument " + std::to_string(k) + " out of range for '" + out.raw + "' (arity " +
                    std::to_string(op->arity) + ")");
  }
  return require_input(std::string(kArg) + std::to_string(k) + " " + out.raw, sig);
}

ElementName element_name(const Signature& sig, std::string_view column, std::string_view row) {
  require_input(column, sig);
  require_output(row, sig);
  return ElementName{std::string(column), std::string(row)};
}

NodeName require_node(std::string_view s, const Signature& sig) {
  ParsedName p = parse_name(s, sig);
  if (!p.valid()) throw NameError(p.error);
  return *p.node;
}

NodeName require_output(std::string_view s, const Signature& sig) {
  NodeName n = require_node(s, sig);
  if (!n.is_output()) throw NameError("'" + n.raw + "' is not an output name");
  return n;
}

NodeName require_input(std::string_view s, const Signature& sig) {
  NodeName n = require_node(s, sig);
  if (!n.is_input()) throw NameError("'" + n.raw + "' is not an input name");
  return n;
}

}  // namespace mmvm
