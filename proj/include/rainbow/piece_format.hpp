#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rainbow/piece.hpp"

namespace rainbow {

// Piece files (.rbs) are UTF-8 text:
//
//   # comment
//   @id      p01
//   @title   Morning Song
//   @tempo   72
//   @meter   4
//   C q D q E h | G q. F e E q D q |
//
// Directive lines start with '@' and may only appear before the first body
// token. The body is a sequence of (pitch, duration) pairs. Pitch letters are
// C D E F G A B; durations are w h q e s (4, 2, 1, 1/2, 1/4 beats) with an
// optional '.' suffix for x3/2. '|' asserts that the running position sits on
// a measure boundary.

struct SourceLocation {
  int line = 0;
  int column = 0;
};

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public FormatError {
public:
  ParseError(SourceLocation where, const std::string& what);
  SourceLocation where() const { return where_; }

private:
  SourceLocation where_;
};

class PieceValidationError : public FormatError {
public:
  explicit PieceValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

private:
  std::vector<Violation> violations_;
};

class SerializeError : public FormatError {
public:
  using FormatError::FormatError;
};

class CurriculumLoadError : public FormatError {
public:
  CurriculumLoadError(std::filesystem::path file, const std::string& what);
  const std::filesystem::path& file() const { return file_; }

private:
  std::filesystem::path file_;
};

Piece parse_piece(std::string_view text);
std::string serialize_piece(const Piece& piece);

/// Token for a duration in ticks, e.g. 72 -> "q.". Empty if the grammar has
/// no token for it.
std::string duration_token(Ticks duration);

Piece read_piece_file(const std::filesystem::path& path);
void write_piece_file(const std::filesystem::path& path, const Piece& piece);

struct CurriculumManifest {
  std::string curriculum_id;
  std::vector<std::filesystem::path> pieces;  // resolved against the manifest directory
};

struct Curriculum {
  std::string id;
  std::vector<Piece> pieces;
};

/// Manifest JSON: {"curriculum_id": "...", "pieces": ["01.rbs", ...]}.
CurriculumManifest read_manifest(const std::filesystem::path& manifest_path);
Curriculum load_curriculum(const CurriculumManifest& manifest);
Curriculum load_curriculum(const std::filesystem::path& manifest_path);

}  // namespace rainbow
