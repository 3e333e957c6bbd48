#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmvm/program.hpp"

namespace mmvm {

/// Malformed program document (bad JSON, missing or mistyped fields).
class ProgramFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A program plus the document-level defaults that are not part of the
/// machine itself.
struct ProgramFile {
  Program program;
  std::vector<std::string> watch;
  /// False when the document had no "seed" field.
  bool has_seed = false;

  friend bool operator==(const ProgramFile&, const ProgramFile&) = default;
};

/// Parses and validates. Throws ProgramFileError for format problems and
/// ProgramError for documents that parse but describe an invalid program.
ProgramFile parse_program_file(const std::string& text);
ProgramFile load_program_file(const std::filesystem::path& path);

std::string serialize_program_file(const ProgramFile& file);
void save_program_file(const ProgramFile& file, const std::filesystem::path& path);

}  // namespace mmvm
