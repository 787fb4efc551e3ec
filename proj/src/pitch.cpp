#include "rainbow/pitch.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rainbow {
namespace {

constexpr std::string_view kLetters = "CDEFGAB";

constexpr std::array<NoteColor, DiatonicPitch::kCount> kColors{{
    {ColorId::Red, 0xE6194B},
    {ColorId::Orange, 0xF58231},
    {ColorId::Yellow, 0xFFE119},
    {ColorId::Green, 0x3CB44B},
    {ColorId::Blue, 0x4363D8},
    {ColorId::Purple, 0x911EB4},
    {ColorId::Grey, 0xA9A9A9},
}};

constexpr std::array<int, DiatonicPitch::kCount> kSemitonesAboveC{0, 2, 4, 5, 7, 9, 11};
constexpr int kMidiC5 = 72;

void check_hole(int hole) {
  if (hole < 1 || hole > FingeringState::kHoles) {
    throw std::out_of_range("finger hole index out of range: " + std::to_string(hole));
  }
}

}  // namespace

DiatonicPitch::DiatonicPitch(int degree) : degree_(degree) {
  if (degree < 0 || degree >= kCount) {
    throw std::invalid_argument("diatonic degree out of range: " + std::to_string(degree));
  }
}

DiatonicPitch DiatonicPitch::from_letter(char letter) {
  auto pos = kLetters.find(letter);
  if (pos == std::string_view::npos) {
    throw std::invalid_argument(std::string("not a pitch letter: ") + letter);
  }
  return DiatonicPitch(static_cast<int>(pos));
}

char DiatonicPitch::letter() const { return kLetters[static_cast<std::size_t>(degree_)]; }

std::string_view NoteColor::name() const {
  switch (id) {
    case ColorId::Red: return "red";
    case ColorId::Orange: return "orange";
    case ColorId::Yellow: return "yellow";
    case ColorId::Green: return "green";
    case ColorId::Blue: return "blue";
    case ColorId::Purple: return "purple";
    case ColorId::Grey: return "grey";
  }
  return "?";
}

std::string NoteColor::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%06X", static_cast<unsigned>(rgb));
  return buf;
}

FingeringState FingeringState::from_mask(std::uint8_t mask) {
  if (mask >= (1u << kHoles)) {
    throw std::invalid_argument("fingering mask has bits beyond hole 6");
  }
  FingeringState f;
  f.mask_ = mask;
  return f;
}

FingeringState FingeringState::from_string(std::string_view holes) {
  if (holes.size() != static_cast<std::size_t>(kHoles)) {
    throw std::invalid_argument("fingering must have exactly 6 holes");
  }
  FingeringState f;
  for (int i = 0; i < kHoles; ++i) {
    char c = holes[static_cast<std::size_t>(i)];
    if (c != '0' && c != '1') throw std::invalid_argument("fingering holes must be '0' or '1'");
    f.set_covered(i + 1, c == '1');
  }
  return f;
}

bool FingeringState::covered(int hole) const {
  check_hole(hole);
  return (mask_ >> (hole - 1)) & 1u;
}

void FingeringState::set_covered(int hole, bool value) {
  check_hole(hole);
  auto bit = static_cast<std::uint8_t>(1u << (hole - 1));
  mask_ = value ? static_cast<std::uint8_t>(mask_ | bit) : static_cast<std::uint8_t>(mask_ & ~bit);
}

std::string FingeringState::to_string() const {
  std::string s(kHoles, '0');
  for (int h = 1; h <= kHoles; ++h) s[static_cast<std::size_t>(h - 1)] = covered(h) ? '1' : '0';
  return s;
}

FingeringState fingering_for_pitch(DiatonicPitch p) {
  FingeringState f;
  int closed = FingeringState::kHoles - p.degree();
  for (int h = 1; h <= closed; ++h) f.set_covered(h, true);
  return f;
}

DiatonicPitch pitch_from_fingering(FingeringState f) {
  for (int h = 1; h <= FingeringState::kHoles; ++h) {
    if (!f.covered(h)) return DiatonicPitch(7 - h);
  }
  return pitches::C;
}

NoteColor color_of(DiatonicPitch p) { return kColors[static_cast<std::size_t>(p.degree())]; }

int row_of(DiatonicPitch p) { return p.degree(); }

int midi_note_of(DiatonicPitch p) {
  return kMidiC5 + kSemitonesAboveC[static_cast<std::size_t>(p.degree())];
}

double frequency_of(DiatonicPitch p) {
  return 440.0 * std::pow(2.0, (midi_note_of(p) - 69) / 12.0);
}

}  // namespace rainbow
