#include "mmvm/program.hpp"

#include <cmath>

namespace mmvm {

void CoefficientMatrix::set(const std::string& column, const std::string& row, ElementSource source) {
  columns_[column][row] = std::move(source);
}

void CoefficientMatrix::erase(const std::string& column, const std::string& row) {
  auto it = columns_.find(column);
  if (it == columns_.end()) return;
  it->second.erase(row);
  if (it->second.empty()) columns_.erase(it);
}

const ElementSource* CoefficientMatrix::find(const std::string& column, const std::string& row) const {
  auto it = columns_.find(column);
  if (it == columns_.end()) return nullptr;
  auto jt = it->second.find(row);
  return jt == it->second.end() ? nullptr : &jt->second;
}

const CoefficientMatrix::Column* CoefficientMatrix::column(const std::string& name) const {
  auto it = columns_.find(name);
  return it == columns_.end() ? nullptr : &it->second;
}

std::size_t CoefficientMatrix::entry_count() const {
  std::size_t n = 0;
  for (const auto& [_, col] : columns_) n += col.size();
  return n;
}

bool CoefficientMatrix::constant_valued() const {
  for (const auto& [_, col] : columns_) {
    for (const auto& [__, src] : col) {
      if (!std::holds_alternative<ConstantSource>(src)) return false;
    }
  }
  return true;
}

void CoefficientMatrix::for_each(
    const std::function<void(const std::string&, const std::string&, const ElementSource&)>& fn) const {
  for (const auto& [c, col] : columns_) {
    for (const auto& [r, src] : col) fn(c, r, src);
  }
}

std::string_view to_string(ViolationMode m) { return m == ViolationMode::reject ? "reject" : "clamp"; }

std::optional<ViolationMode> violation_mode_from_string(std::string_view s) {
  if (s == "reject") return ViolationMode::reject;
  if (s == "clamp") return ViolationMode::clamp;
  return std::nullopt;
}

void Program::apply(const ProgramFragment& fragment) {
  for (const auto& e : fragment.entries) matrix.set(e.column, e.row, e.source);
}

void validate_program(const Program& program) {
  const Signature& sig = program.signature;
  ValidationReport report = validate_signature(sig);
  if (!report.ok()) throw ProgramError("invalid signature:\n" + report.summary());

  auto check = [&](const std::string& name, NodeRole role, const char* what) {
    ParsedName p = parse_name(name, sig);
    if (!p.valid()) throw ProgramError(std::string(what) + ": " + p.error);
    if (p.node->role != role) {
      throw ProgramError(std::string(what) + " '" + name + "' is not an " +
                         (role == NodeRole::input ? "input" : "output") + " name");
    }
  };

  for (const auto& [column, entries] : program.matrix.columns()) {
    check(column, NodeRole::input, "column");
    for (const auto& [row, source] : entries) {
      check(row, NodeRole::output, "row");
      if (const auto* n = std::get_if<NodeSource>(&source)) {
        check(n->node, NodeRole::output, "node source");
      } else if (const auto* e = std::get_if<ExternalSource>(&source)) {
        if (!e->schedule.valid()) {
          throw ProgramError("schedule of (" + column + ")#(" + row +
                             ") needs strictly increasing breakpoints with finite values");
        }
      } else if (!std::isfinite(std::get<ConstantSource>(source).value)) {
        throw ProgramError("constant of (" + column + ")#(" + row + ") is not finite");
      }
    }
  }

  std::set<std::string> grouped;
  for (const auto& group : program.shared_input_groups) {
    if (group.empty()) throw ProgramError("empty shared input group");
    const CoefficientMatrix::Column* first = nullptr;
    bool first_seen = false;
    for (const auto& name : group) {
      check(name, NodeRole::input, "shared input");
      if (!grouped.insert(name).second) {
        throw ProgramError("input '" + name + "' appears in more than one shared group");
      }
      const CoefficientMatrix::Column* col = program.matrix.column(name);
      if (!first_seen) {
        first = col;
        first_seen = true;
      } else {
        bool equal = (first == nullptr && col == nullptr) ||
                     (first != nullptr && col != nullptr && *first == *col);
        if (!equal) throw ProgramError("shared input '" + name + "' has a different column");
      }
    }
  }
}

std::set<std::string> activation_universe(const Program& program) {
  const Signature& sig = program.signature;
  std::set<std::string> out;
  auto add_instance = [&](const std::string& output) {
    NodeName n = require_output(output, sig);
    out.insert(n.raw);
    int arity = sig.find(n.op)->arity;
    for (int k = 1; k <= arity; ++k) out.insert("arg" + std::to_string(k) + " " + n.raw);
  };
  program.matrix.for_each([&](const std::string& column, const std::string& row, const ElementSource& s) {
    add_instance(require_input(column, sig).owner());
    add_instance(row);
    if (const auto* n = std::get_if<NodeSource>(&s)) add_instance(n->node);
  });
  for (const auto& group : program.shared_input_groups) {
    for (const auto& name : group) add_instance(require_input(name, sig).owner());
  }
  return out;
}

std::map<OrderClass, std::size_t> order_histogram(const Program& program) {
  std::map<OrderClass, std::size_t> hist;
  for (auto c : {OrderClass::zero, OrderClass::first, OrderClass::sesquialteral, OrderClass::specialized,
                 OrderClass::fully_higher_order}) {
    hist[c] = 0;
  }
  program.matrix.for_each([&](const std::string& column, const std::string& row, const ElementSource& s) {
    ++hist[classify_element(ElementName{column, row}, &s, program.signature)];
  });
  return hist;
}

}  // namespace mmvm
