#include "rainbow/piece_format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rainbow/number_format.hpp"

namespace rainbow {
namespace {

struct DurationSymbol {
  char symbol;
  Ticks ticks;
};

constexpr std::array<DurationSymbol, 5> kDurations{{
    {'w', 4 * kTicksPerBeat},
    {'h', 2 * kTicksPerBeat},
    {'q', kTicksPerBeat},
    {'e', kTicksPerBeat / 2},
    {'s', kTicksPerBeat / 4},
}};

constexpr int kMaxMeter = 64;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string location_prefix(SourceLocation where) {
  return std::to_string(where.line) + ":" + std::to_string(where.column) + ": ";
}

std::string describe(const std::vector<Violation>& violations) {
  std::string msg = "invalid piece:";
  for (const auto& v : violations) {
    msg += " [note " + std::to_string(v.note_index) + "] " + v.message + ";";
  }
  return msg;
}

struct Token {
  std::string_view text;
  SourceLocation where;
};

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Piece run() {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text_.size()) {
      std::size_t eol = text_.find('\n', pos);
      if (eol == std::string_view::npos) eol = text_.size();
      ++line_no;
      handle_line(text_.substr(pos, eol - pos), line_no);
      pos = eol + 1;
    }
    if (pending_pitch_) {
      throw ParseError(pending_where_, "pitch '" + std::string(1, pending_pitch_->letter()) +
                                           "' is missing its duration");
    }
    return std::move(piece_);
  }

private:
  void handle_line(std::string_view line, int line_no) {
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') return;
    if (body.front() == '@') {
      auto col = static_cast<int>(line.find('@')) + 1;
      directive(body.substr(1), SourceLocation{line_no, col});
      return;
    }
    std::size_t i = 0;
    while (i < line.size()) {
      if (is_space(line[i])) {
        ++i;
        continue;
      }
      std::size_t start = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      Token tok{line.substr(start, i - start), SourceLocation{line_no, static_cast<int>(start) + 1}};
      if (tok.text.front() == '#') return;
      body_token(tok);
    }
  }

  void directive(std::string_view rest, SourceLocation where) {
    if (seen_body_) throw ParseError(where, "directive after the first note");
    std::size_t split = 0;
    while (split < rest.size() && !is_space(rest[split])) ++split;
    std::string_view key = rest.substr(0, split);
    std::string_view value = trim(rest.substr(split));

    if (key == "id") {
      if (value.empty() || value.find_first_of(" \t") != std::string_view::npos) {
        throw ParseError(where, "@id takes a single word");
      }
      set_once(seen_id_, where, key);
      piece_.id = std::string(value);
    } else if (key == "title") {
      set_once(seen_title_, where, key);
      piece_.title = std::string(value);
    } else if (key == "tempo") {
      set_once(seen_tempo_, where, key);
      double bpm = 0.0;
      auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), bpm);
      if (ec != std::errc{} || end != value.data() + value.size() || !(bpm > 0.0) ||
          !std::isfinite(bpm)) {
        throw ParseError(where, "@tempo needs a positive number, got '" + std::string(value) + "'");
      }
      piece_.default_tempo = bpm;
    } else if (key == "meter") {
      set_once(seen_meter_, where, key);
      int beats = 0;
      auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), beats);
      if (ec != std::errc{} || end != value.data() + value.size() || beats < 1 || beats > kMaxMeter) {
        throw ParseError(where, "@meter needs an integer in 1.." + std::to_string(kMaxMeter));
      }
      piece_.beats_per_measure = beats;
    } else {
      throw ParseError(where, "unknown directive '@" + std::string(key) + "'");
    }
  }

  void set_once(bool& flag, SourceLocation where, std::string_view key) {
    if (flag) throw ParseError(where, "duplicate @" + std::string(key));
    flag = true;
  }

  void body_token(const Token& tok) {
    seen_body_ = true;
    if (tok.text == "|") {
      if (pending_pitch_) throw ParseError(tok.where, "bar line between a pitch and its duration");
      if (position_ % piece_.measure_length() != 0) {
        throw ParseError(tok.where, "bar line misaligned: position " +
                                        std::to_string(position_ % piece_.measure_length()) +
                                        "/" + std::to_string(kTicksPerBeat) +
                                        " beats into a measure of " +
                                        std::to_string(piece_.beats_per_measure));
      }
      return;
    }
    if (!pending_pitch_) {
      if (tok.text.size() != 1 || std::string_view("CDEFGAB").find(tok.text[0]) == std::string_view::npos) {
        throw ParseError(tok.where, "expected a pitch letter C-B or '|', got '" + std::string(tok.text) + "'");
      }
      pending_pitch_ = DiatonicPitch::from_letter(tok.text[0]);
      pending_where_ = tok.where;
      return;
    }
    Ticks dur = parse_duration(tok);
    piece_.notes.push_back(Note{*pending_pitch_, position_, dur});
    position_ += dur;
    pending_pitch_.reset();
  }

  static Ticks parse_duration(const Token& tok) {
    std::string_view t = tok.text;
    bool dotted = t.size() == 2 && t[1] == '.';
    if (t.size() != 1 && !dotted) {
      throw ParseError(tok.where, "expected a duration (w h q e s, optional '.'), got '" + std::string(t) + "'");
    }
    for (const auto& d : kDurations) {
      if (d.symbol == t[0]) return dotted ? d.ticks * 3 / 2 : d.ticks;
    }
    throw ParseError(tok.where, "unknown duration '" + std::string(t) + "'");
  }

  std::string_view text_;
  Piece piece_;
  Ticks position_ = 0;
  std::optional<DiatonicPitch> pending_pitch_;
  SourceLocation pending_where_;
  bool seen_body_ = false;
  bool seen_id_ = false, seen_title_ = false, seen_tempo_ = false, seen_meter_ = false;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ParseError::ParseError(SourceLocation where, const std::string& what)
    : FormatError(location_prefix(where) + what), where_(where) {}

PieceValidationError::PieceValidationError(std::vector<Violation> violations)
    : FormatError(describe(violations)), violations_(std::move(violations)) {}

CurriculumLoadError::CurriculumLoadError(std::filesystem::path file, const std::string& what)
    : FormatError(file.string() + ": " + what), file_(std::move(file)) {}

Piece parse_piece(std::string_view text) {
  Piece piece = Parser(text).run();
  auto violations = validate_piece(piece);
  if (has_errors(violations)) {
    std::erase_if(violations, [](const Violation& v) { return v.severity != Severity::Error; });
    throw PieceValidationError(std::move(violations));
  }
  return piece;
}

std::string duration_token(Ticks duration) {
  for (const auto& d : kDurations) {
    if (d.ticks == duration) return std::string(1, d.symbol);
    if (d.ticks * 3 / 2 == duration && d.ticks % 2 == 0) return std::string(1, d.symbol) + ".";
  }
  return {};
}

std::string serialize_piece(const Piece& piece) {
  if (piece.id.find_first_of(" \t\r\n") != std::string::npos) {
    throw SerializeError("piece id must be a single word");
  }
  if (piece.title.find_first_of("\r\n") != std::string::npos || trim(piece.title) != piece.title) {
    throw SerializeError("piece title must be a single trimmed line");
  }
  if (!(piece.default_tempo > 0.0) || !std::isfinite(piece.default_tempo)) {
    throw SerializeError("tempo must be positive");
  }
  if (piece.beats_per_measure < 1 || piece.beats_per_measure > kMaxMeter) {
    throw SerializeError("meter out of range");
  }

  std::string out;
  if (!piece.id.empty()) out += "@id " + piece.id + "\n";
  if (!piece.title.empty()) out += "@title " + piece.title + "\n";
  out += "@tempo " + format_number(piece.default_tempo) + "\n";
  out += "@meter " + std::to_string(piece.beats_per_measure) + "\n";

  Ticks position = 0;
  std::string line;
  for (std::size_t i = 0; i < piece.notes.size(); ++i) {
    const Note& n = piece.notes[i];
    if (n.onset != position) {
      throw SerializeError("note " + std::to_string(i) + " does not follow its predecessor directly");
    }
    std::string tok = duration_token(n.duration);
    if (tok.empty()) {
      throw SerializeError("note " + std::to_string(i) + " has duration " + std::to_string(n.duration) +
                           "/" + std::to_string(kTicksPerBeat) + " beats, which has no token");
    }
    if (!line.empty()) line += ' ';
    line += n.pitch.letter();
    line += ' ';
    line += tok;
    position += n.duration;
    if (position % piece.measure_length() == 0) {
      out += line + " |\n";
      line.clear();
    }
  }
  if (!line.empty()) out += line + "\n";
  return out;
}

Piece read_piece_file(const std::filesystem::path& path) { return parse_piece(read_text(path)); }

void write_piece_file(const std::filesystem::path& path, const Piece& piece) {
  std::string text = serialize_piece(piece);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

CurriculumManifest read_manifest(const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(manifest_path));
  } catch (const std::exception& e) {
    throw CurriculumLoadError(manifest_path, e.what());
  }
  CurriculumManifest m;
  try {
    m.curriculum_id = j.at("curriculum_id").get<std::string>();
    for (const auto& entry : j.at("pieces")) {
      m.pieces.push_back(manifest_path.parent_path() / entry.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw CurriculumLoadError(manifest_path, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Curriculum load_curriculum(const CurriculumManifest& manifest) {
  Curriculum c{manifest.curriculum_id, {}};
  std::set<std::string> ids;
  for (const auto& path : manifest.pieces) {
    if (!std::filesystem::exists(path)) throw CurriculumLoadError(path, "file not found");
    try {
      c.pieces.push_back(read_piece_file(path));
    } catch (const std::exception& e) {
      throw CurriculumLoadError(path, e.what());
    }
    if (c.pieces.back().id.empty()) c.pieces.back().id = path.stem().string();
    if (!ids.insert(c.pieces.back().id).second) {
      throw CurriculumLoadError(path, "duplicate piece id '" + c.pieces.back().id + "'");
    }
  }
  if (c.pieces.size() < 2) {
    throw CurriculumLoadError(manifest.pieces.empty() ? std::filesystem::path{} : manifest.pieces.front(),
                              "a curriculum needs at least two pieces");
  }
  return c;
}

Curriculum load_curriculum(const std::filesystem::path& manifest_path) {
  return load_curriculum(read_manifest(manifest_path));
}

}  // namespace rainbow
