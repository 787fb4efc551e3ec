#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rainbow {

/// One of the seven degrees of the C major scale inside the single playable
/// octave. Degree 0 is C, degree 6 is B.
class DiatonicPitch {
public:
  static constexpr int kCount = 7;

  constexpr DiatonicPitch() = default;
  explicit DiatonicPitch(int degree);

  static DiatonicPitch from_letter(char letter);

  constexpr int degree() const { return degree_; }
  char letter() const;

  friend constexpr auto operator<=>(DiatonicPitch, DiatonicPitch) = default;

private:
  int degree_ = 0;
};

namespace pitches {
inline const DiatonicPitch C{0};
inline const DiatonicPitch D{1};
inline const DiatonicPitch E{2};
inline const DiatonicPitch F{3};
inline const DiatonicPitch G{4};
inline const DiatonicPitch A{5};
inline const DiatonicPitch B{6};
}  // namespace pitches

enum class ColorId : std::uint8_t { Red, Orange, Yellow, Green, Blue, Purple, Grey };

struct NoteColor {
  ColorId id;
  std::uint32_t rgb;  // 0xRRGGBB

  std::string_view name() const;
  std::string hex() const;  // "#RRGGBB"

  friend bool operator==(const NoteColor&, const NoteColor&) = default;
};

/// Six finger holes, hole 1 at the top of the flute and hole 6 at the bottom.
/// The blowing hole is not part of the state.
class FingeringState {
public:
  static constexpr int kHoles = 6;

  constexpr FingeringState() = default;

  /// Bit (hole - 1) set means the hole is covered.
  static FingeringState from_mask(std::uint8_t mask);
  /// Six characters, hole 1 first; '1' = covered, '0' = open.
  static FingeringState from_string(std::string_view holes);

  bool covered(int hole) const;
  void set_covered(int hole, bool value);

  std::uint8_t mask() const { return mask_; }
  std::string to_string() const;

  friend bool operator==(FingeringState, FingeringState) = default;

private:
  std::uint8_t mask_ = 0;
};

FingeringState fingering_for_pitch(DiatonicPitch p);

/// Total over all 64 patterns: the topmost open hole decides the pitch, all
/// holes covered sounds C.
DiatonicPitch pitch_from_fingering(FingeringState f);

NoteColor color_of(DiatonicPitch p);

/// Row 0 is drawn at the bottom of a band.
int row_of(DiatonicPitch p);

/// 12-TET frequency in the C5..B5 octave (A4 = 440 Hz).
double frequency_of(DiatonicPitch p);
int midi_note_of(DiatonicPitch p);

}  // namespace rainbow
