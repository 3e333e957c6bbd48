#include "mmvm/elements.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmvm {

double Schedule::value(std::int64_t t) const {
  if (points.empty()) return 0.0;
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  // First breakpoint strictly after t; the one before it is at or before t.
  auto hi = std::upper_bound(points.begin(), points.end(), t,
                             [](std::int64_t v, const auto& p) { return v < p.first; });
  auto lo = std::prev(hi);
  if (mode == Mode::step || lo->first == t) return lo->second;
  double span = static_cast<double>(hi->first - lo->first);
  double frac = static_cast<double>(t - lo->first) / span;
  return lo->second + (hi->second - lo->second) * frac;
}

bool Schedule::valid() const {
  if (points.empty()) return false;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first <= points[i - 1].first) return false;
  }
  return std::all_of(points.begin(), points.end(), [](const auto& p) { return std::isfinite(p.second); });
}

double Schedule::max_abs() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, std::abs(p.second));
  return m;
}

std::string_view to_string(Schedule::Mode mode) {
  return mode == Schedule::Mode::step ? "step" : "linear";
}

std::optional<Schedule::Mode> schedule_mode_from_string(std::string_view s) {
  if (s == "step") return Schedule::Mode::step;
  if (s == "linear") return Schedule::Mode::linear;
  return std::nullopt;
}

std::string_view to_string(OrderClass c) {
  switch (c) {
    case OrderClass::zero: return "zero";
    case OrderClass::first: return "first";
    case OrderClass::sesquialteral: return "sesquialteral";
    case OrderClass::specialized: return "specialized";
    case OrderClass::fully_higher_order: return "fully-higher-order";
  }
  return "?";
}

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::free: return "free";
    case Policy::nonneg: return "nonneg";
    case Policy::substochastic: return "substochastic";
  }
  return "?";
}

std::optional<Policy> policy_from_string(std::string_view s) {
  for (auto p : {Policy::free, Policy::nonneg, Policy::substochastic}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

NodeName controller_node_for(const ElementName& element, const Signature& sig) {
  return output_node_name(sig, sig.identity_name(), element.raw());
}

NodeName controller_input_for(const ElementName& element, const Signature& sig) {
  return input_node_name(sig, controller_node_for(element, sig).raw, 1);
}

OrderClass classify_element(const ElementName& element, const ElementSource* source, const Signature& sig) {
  if (source == nullptr) return OrderClass::zero;
  if (std::holds_alternative<ConstantSource>(*source)) return OrderClass::first;
  if (std::holds_alternative<ExternalSource>(*source)) return OrderClass::sesquialteral;

  const std::string& node = std::get<NodeSource>(*source).node;
  ParsedName parsed = parse_name(node, sig);
  if (!parsed.valid() || parsed.node->op != sig.identity_name() || !parsed.embedded) {
    return OrderClass::specialized;
  }
  return *parsed.embedded == element ? OrderClass::fully_higher_order : OrderClass::specialized;
}

ProgramFragment build_constant_controller(const ElementName& element, double c, const Signature& sig,
                                          Policy policy) {
  if (policy != Policy::free && c < 0.0) {
    throw std::invalid_argument("negative controller value under policy " + std::string(to_string(policy)));
  }
  if (policy == Policy::substochastic && c > 1.0) {
    throw std::invalid_argument("controller value above 1 under policy substochastic");
  }
  const OperationDef* unit = nullptr;
  for (const auto& op : sig.operations()) {
    if (op.rule == OpRule::constant && op.param("value") == 1.0) {
      unit = &op;
      break;
    }
  }
  if (unit == nullptr) throw std::invalid_argument("signature has no constant operation of value 1");

  // Validates the element against the signature.
  element_name(sig, element.column, element.row);
  NodeName controller = controller_node_for(element, sig);
  NodeName controller_in = controller_input_for(element, sig);
  NodeName unit_node = output_node_name(sig, unit->name, element.raw());

  ProgramFragment fragment;
  fragment.entries.push_back({controller_in.raw, unit_node.raw, constant_source(c)});
  fragment.entries.push_back({element.column, element.row, node_source(controller.raw)});
  return fragment;
}

}  // namespace mmvm
