#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmvm/elements.hpp"
#include "mmvm/signature.hpp"

namespace mmvm {

/// Thrown when a program does not satisfy its structural invariants.
class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse matrix of coefficient sources: column (input name) -> row (output
/// name) -> source. Cells that are not present are zero-order elements.
class CoefficientMatrix {
 public:
  using Column = std::map<std::string, ElementSource>;

  void set(const std::string& column, const std::string& row, ElementSource source);
  void erase(const std::string& column, const std::string& row);
  const ElementSource* find(const std::string& column, const std::string& row) const;
  const ElementSource* find(const ElementName& e) const { return find(e.column, e.row); }
  const Column* column(const std::string& name) const;

  const std::map<std::string, Column>& columns() const { return columns_; }
  std::size_t entry_count() const;
  bool empty() const { return columns_.empty(); }

  /// True when every source is a constant.
  bool constant_valued() const;

  void for_each(const std::function<void(const std::string& column, const std::string& row,
                                         const ElementSource& source)>& fn) const;

  friend bool operator==(const CoefficientMatrix&, const CoefficientMatrix&) = default;

 private:
  std::map<std::string, Column> columns_;
};

/// How constraint violations are handled when coefficients are resolved.
enum class ViolationMode { reject, clamp };

std::string_view to_string(ViolationMode m);
std::optional<ViolationMode> violation_mode_from_string(std::string_view s);

/// Tolerance on column sums under the substochastic policy.
inline constexpr double kColumnSumEpsilon = 1e-12;

struct Program {
  Signature signature;
  CoefficientMatrix matrix;
  Policy policy = Policy::free;
  ViolationMode violation_mode = ViolationMode::reject;
  std::uint64_t seed = 0;
  /// Sets of input names whose columns are constrained to be identical.
  std::vector<std::set<std::string>> shared_input_groups;

  void apply(const ProgramFragment& fragment);

  friend bool operator==(const Program&, const Program&) = default;
};

/// Throws ProgramError describing the first problem found.
void validate_program(const Program& program);

/// Every node name the program can ever activate: rows, columns, node
/// sources, and all ports of the operation instances they belong to.
std::set<std::string> activation_universe(const Program& program);

/// Order-class histogram of the present entries.
std::map<OrderClass, std::size_t> order_histogram(const Program& program);

}  // namespace mmvm
