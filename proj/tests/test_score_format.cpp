#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rainbow/piece_format.hpp"
#include "support.hpp"

using namespace rainbow;
using namespace testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("rainbow_fmt_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("parse a two-measure body") {
  Piece p = parse_piece("C q D q E q F q | G q A q B q A q");
  CHECK(p.notes.size() == 8);
  CHECK(p.measure_count() == 2);
  CHECK(p.notes[4].pitch == pitches::G);
  CHECK(p.notes[4].onset == 4 * 48);
}

TEST_CASE("directives") {
  Piece p = parse_piece("# a comment\n@id p9\n@title Evening Bell\n@tempo 72.5\n@meter 3\nC h. | D q E q F q |\n");
  CHECK(p.id == "p9");
  CHECK(p.title == "Evening Bell");
  CHECK(p.default_tempo == 72.5);
  CHECK(p.beats_per_measure == 3);
  CHECK(p.notes[0].duration == 144);
}

TEST_CASE("duration tokens") {
  CHECK(parse_piece("C w").notes[0].duration == 192);
  CHECK(parse_piece("C h").notes[0].duration == 96);
  CHECK(parse_piece("C e D e").notes[1].duration == 24);
  CHECK(parse_piece("C s D s").notes[1].duration == 12);
  CHECK(parse_piece("C q. D e").notes[0].duration == 72);
  CHECK(parse_piece("C s. D s").notes[0].duration == 18);
  CHECK(duration_token(72) == "q.");
  CHECK(duration_token(288) == "w.");
  CHECK(duration_token(5).empty());
  CHECK(duration_token(60).empty());
}

TEST_CASE("representable durations are exactly the grammar's") {
  std::set<Ticks> representable;
  for (Ticks d = 1; d <= 400; ++d) {
    if (!duration_token(d).empty()) representable.insert(d);
  }
  std::set<Ticks> expected(grammar_durations().begin(), grammar_durations().end());
  CHECK(representable == expected);
}

TEST_CASE("adjacent equal pitches are a validation error") {
  try {
    parse_piece("C q C q");
    FAIL("expected a validation error");
  } catch (const PieceValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].message == "adjacent equal pitch");
  }
}

TEST_CASE("bar misalignment is reported at the bar") {
  try {
    parse_piece("C q | D q");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.where().line == 1);
    CHECK(e.where().column == 5);
    CHECK(std::string(e.what()).rfind("1:5:", 0) == 0);
  }
}

TEST_CASE("syntax errors carry line and column") {
  struct Case {
    std::string text;
    int line, column;
  };
  const std::vector<Case> cases = {
      {"C q\nD x", 2, 3},          // bad duration
      {"C q\n  H q", 2, 3},        // bad pitch
      {"C", 1, 1},                 // pitch without duration
      {"C q @tempo 60", 1, 5},     // directive after body
      {"@tempo 0\nC q", 1, 1},     // non-positive tempo
      {"@meter 0\nC q", 1, 1},     // meter out of range
      {"@id a\n@id b\nC q", 2, 1}, // duplicate
      {"@key G\nC q", 1, 1},       // unknown directive
      {"C q..", 1, 3},             // double dot
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    try {
      parse_piece(c.text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.where().line == c.line);
      CHECK(e.where().column == c.column);
    }
  }
}

TEST_CASE("serialize is canonical and round trips") {
  Piece p = parse_piece("@id x\n@title T\n@tempo 90\n@meter 2\nC q D q | E h |\n");
  CHECK(serialize_piece(p) == "@id x\n@title T\n@tempo 90\n@meter 2\nC q D q |\nE h |\n");
  CHECK(parse_piece(serialize_piece(p)) == p);
}

TEST_CASE("serialize an empty piece") {
  Piece p;
  p.id = "empty";
  const std::string text = serialize_piece(p);
  CHECK(text == "@id empty\n@tempo 80\n@meter 4\n");
  CHECK(parse_piece(text) == p);
}

TEST_CASE("serialize rejects what the grammar cannot say") {
  Piece p = quarters("CD");
  p.notes[1].duration = 5;
  CHECK_THROWS_AS(serialize_piece(p), SerializeError);
  Piece gap = quarters("CD");
  gap.notes[1].onset = 96;
  CHECK_THROWS_AS(serialize_piece(gap), SerializeError);
  Piece bad_id = quarters("CD");
  bad_id.id = "two words";
  CHECK_THROWS_AS(serialize_piece(bad_id), SerializeError);
}

TEST_CASE("every corpus piece round trips") {
  auto cur = load_curriculum(data_path("curriculum/manifest.json"));
  for (const auto& p : cur.pieces) {
    CAPTURE(p.id);
    CHECK(parse_piece(serialize_piece(p)) == p);
  }
}

TEST_CASE("round trip over generated pieces") {
  Rng rng(0x5eed);
  for (int i = 0; i < 500; ++i) {
    Piece p = random_piece(rng);
    p.title = i % 3 ? "" : "Generated " + std::to_string(i);
    CAPTURE(i);
    const std::string text = serialize_piece(p);
    CHECK(parse_piece(text) == p);
    CHECK(serialize_piece(parse_piece(text)) == text);
  }
}

TEST_CASE("arbitrary bytes never crash the parser") {
  Rng rng(99);
  const std::string alphabet = "CDEFGABwhqes.|@# \n\t0123456789idtmpoerl";
  int accepted = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const auto n = rng.below(40);
    for (std::uint64_t k = 0; k < n; ++k) {
      s += rng.below(4) == 0 ? static_cast<char>(rng.below(256)) : alphabet[rng.below(alphabet.size())];
    }
    try {
      Piece p = parse_piece(s);
      ++accepted;
      // Anything accepted must be valid and must survive a round trip.
      CHECK_FALSE(has_errors(validate_piece(p)));
      CHECK(parse_piece(serialize_piece(p)) == p);
    } catch (const FormatError&) {
    }
  }
  CHECK(accepted > 0);
}

TEST_CASE("piece files") {
  auto dir = scratch_dir("files");
  Piece p = quarters("CDEC");
  p.id = "f1";
  write_piece_file(dir / "f1.rbs", p);
  CHECK(read_piece_file(dir / "f1.rbs") == p);
  CHECK_THROWS_AS(read_piece_file(dir / "missing.rbs"), std::runtime_error);
}

TEST_CASE("shipped curriculum") {
  auto cur = load_curriculum(data_path("curriculum/manifest.json"));
  CHECK(cur.id == "folk16");
  CHECK(cur.pieces.size() == 16);
  for (const auto& p : cur.pieces) {
    CAPTURE(p.id);
    CHECK(validate_piece(p).empty());
    CHECK(p.measure_count() == 8);
  }
}

TEST_CASE("two-piece curriculum") {
  auto cur = load_curriculum(data_path("mini/manifest.json"));
  CHECK(cur.pieces.size() == 2);
}

TEST_CASE("curriculum load errors name the file") {
  auto dir = scratch_dir("manifest");
  write_text(dir / "a.rbs", "@id a\nC q D q E q F q |\n");
  write_text(dir / "bad.rbs", "@id bad\nC q C q\n");
  write_text(dir / "missing.json", R"({"curriculum_id": "m", "pieces": ["a.rbs", "nope.rbs"]})");
  write_text(dir / "invalid.json", R"({"curriculum_id": "m", "pieces": ["a.rbs", "bad.rbs"]})");
  write_text(dir / "dup.json", R"({"curriculum_id": "m", "pieces": ["a.rbs", "a.rbs"]})");
  write_text(dir / "one.json", R"({"curriculum_id": "m", "pieces": ["a.rbs"]})");
  write_text(dir / "garbage.json", "{not json");

  auto expect_file = [](const fs::path& manifest, const std::string& needle) {
    try {
      load_curriculum(manifest);
      FAIL("expected a load error");
    } catch (const CurriculumLoadError& e) {
      CHECK(e.file().filename().string() == needle);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_file(dir / "missing.json", "nope.rbs");
  expect_file(dir / "invalid.json", "bad.rbs");
  CHECK_THROWS_AS(load_curriculum(dir / "dup.json"), CurriculumLoadError);
  CHECK_THROWS_AS(load_curriculum(dir / "one.json"), CurriculumLoadError);
  CHECK_THROWS_AS(load_curriculum(dir / "garbage.json"), CurriculumLoadError);
  CHECK_THROWS_AS(load_curriculum(dir / "absent.json"), CurriculumLoadError);
}
