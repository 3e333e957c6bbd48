#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmvm {

/// Thrown when a name cannot be composed or parsed against a signature.
class NameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OpKind { deterministic, stochastic, constant };

/// Evaluation rule of a template operation. The set is closed; new rules are
/// added here and in stdlib.cpp.
enum class OpRule { identity, constant, propagator, product };

std::string_view to_string(OpKind kind);
std::string_view to_string(OpRule rule);
std::optional<OpKind> op_kind_from_string(std::string_view s);
std::optional<OpRule> op_rule_from_string(std::string_view s);

struct OperationDef {
  std::string name;
  int arity = 0;
  OpKind kind = OpKind::deterministic;
  OpRule rule = OpRule::identity;
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback = 0.0) const;

  friend bool operator==(const OperationDef&, const OperationDef&) = default;
};

namespace ops {
OperationDef identity(std::string name = "id");
OperationDef constant(std::string name, double value);
OperationDef propagator(std::string name, double p);
OperationDef product(std::string name = "mul");
}  // namespace ops

class Signature {
 public:
  Signature() = default;
  Signature(std::vector<OperationDef> operations, std::string identity_name = "id");

  const std::vector<OperationDef>& operations() const { return operations_; }
  const std::string& identity_name() const { return identity_name_; }

  /// nullptr when no operation has this name.
  const OperationDef* find(std::string_view name) const;
  int max_arity() const;

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.operations_ == b.operations_ && a.identity_name_ == b.identity_name_;
  }

 private:
  std::vector<OperationDef> operations_;
  std::string identity_name_ = "id";
};

enum class ViolationKind {
  empty_name,
  reserved_character,
  non_printable,
  prefix_clash,
  missing_identity,
  bad_identity,
  bad_arity,
  bad_params,
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string summary() const;
};

ValidationReport validate_signature(const Signature& sig);

/// Characters that may only appear as delimiters of element names.
bool is_reserved_char(char c);
/// The name alphabet: printable ASCII without the reserved characters.
bool in_alphabet(char c);

enum class NodeRole { output, input };

/// A parsed X (output) or Y (input) node name.
///
/// Outputs have the form `<op> <w>`; inputs have the form `arg<k> <output>`.
/// `op` and `suffix` always describe the owning output, so for an input
/// `arg2 mul a` they are "mul" and "a".
struct NodeName {
  std::string raw;
  NodeRole role = NodeRole::output;
  std::string op;
  std::string suffix;
  int arg_index = 0;

  bool is_output() const { return role == NodeRole::output; }
  bool is_input() const { return role == NodeRole::input; }
  /// The output this node belongs to (itself for outputs).
  std::string owner() const;
};

/// Name of the matrix cell linking column (an input) and row (an output):
/// `(<column>)#(<row>)`.
struct ElementName {
  std::string column;
  std::string row;

  std::string raw() const;

  friend bool operator==(const ElementName&, const ElementName&) = default;
  friend auto operator<=>(const ElementName&, const ElementName&) = default;
};

struct ParsedName {
  std::optional<NodeName> node;
  /// Set when the output suffix is itself an element name.
  std::optional<ElementName> embedded;
  std::string error;

  bool valid() const { return node.has_value(); }
};

ParsedName parse_name(std::string_view s, const Signature& sig);

/// Parses `(<column>)#(<row>)`, requiring column to be an input name and row
/// an output name. Returns nullopt and fills `error` otherwise.
std::optional<ElementName> parse_element_name(std::string_view s, const Signature& sig,
                                              std::string* error = nullptr);

NodeName output_node_name(const Signature& sig, std::string_view op_name, std::string_view w);
NodeName input_node_name(const Signature& sig, std::string_view output, int k);
ElementName element_name(const Signature& sig, std::string_view column, std::string_view row);

/// Parses or throws NameError.
NodeName require_node(std::string_view s, const Signature& sig);
NodeName require_output(std::string_view s, const Signature& sig);
NodeName require_input(std::string_view s, const Signature& sig);

}  // namespace mmvm
