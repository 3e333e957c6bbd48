#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mmvm/signature.hpp"

namespace mmvm {

/// Closed-form coefficient stream: a function of time only.
struct Schedule {
  enum class Mode { step, linear };

  Mode mode = Mode::step;
  /// Breakpoints (t, value) with strictly increasing t.
  std::vector<std::pair<std::int64_t, double>> points;

  /// Holds the first value before the first breakpoint and the last value
  /// after the last one.
  double value(std::int64_t t) const;
  bool valid() const;
  /// Largest |value| over all t.
  double max_abs() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

std::string_view to_string(Schedule::Mode mode);
std::optional<Schedule::Mode> schedule_mode_from_string(std::string_view s);

struct ConstantSource {
  double value = 0.0;
  friend bool operator==(const ConstantSource&, const ConstantSource&) = default;
};

struct ExternalSource {
  Schedule schedule;
  friend bool operator==(const ExternalSource&, const ExternalSource&) = default;
};

/// The coefficient is the stream of an output node.
struct NodeSource {
  std::string node;
  friend bool operator==(const NodeSource&, const NodeSource&) = default;
};

using ElementSource = std::variant<ConstantSource, ExternalSource, NodeSource>;

inline ElementSource constant_source(double c) { return ConstantSource{c}; }
inline ElementSource external_source(Schedule s) { return ExternalSource{std::move(s)}; }
inline ElementSource node_source(std::string n) { return NodeSource{std::move(n)}; }

enum class OrderClass { zero, first, sesquialteral, specialized, fully_higher_order };

std::string_view to_string(OrderClass c);

/// The identity node whose stream is this element's coefficient in the fully
/// higher-order machine: `id (<column>)#(<row>)`.
NodeName controller_node_for(const ElementName& element, const Signature& sig);
/// Its single input: `arg1 id (<column>)#(<row>)`.
NodeName controller_input_for(const ElementName& element, const Signature& sig);

/// Total: never throws, even for sources naming unparsable nodes.
OrderClass classify_element(const ElementName& element, const ElementSource* source, const Signature& sig);

struct FragmentEntry {
  std::string column;
  std::string row;
  ElementSource source;

  friend bool operator==(const FragmentEntry&, const FragmentEntry&) = default;
};

/// Matrix entries to be merged into a program; later entries override
/// earlier ones on the same cell.
struct ProgramFragment {
  std::vector<FragmentEntry> entries;
};

enum class Policy { free, nonneg, substochastic };

std::string_view to_string(Policy p);
std::optional<Policy> policy_from_string(std::string_view s);

/// Makes `element` fully higher-order with constant value c: a unit constant
/// feeds the element's controller through a first-order link of weight c.
/// The element reads 0 at t = 1 and c from t = 2 on.
///
/// Uses the first constant operation of the signature whose value is 1; the
/// constant node is named `<unit-op> <element>` so fragments for distinct
/// elements never collide.
ProgramFragment build_constant_controller(const ElementName& element, double c, const Signature& sig,
                                          Policy policy = Policy::free);

}  // namespace mmvm
