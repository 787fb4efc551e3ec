#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rainbow/pitch.hpp"

namespace rainbow {

/// Score time in ticks; one beat is 48 ticks so dotted and triplet values
/// stay integral.
using Ticks = std::int64_t;
inline constexpr Ticks kTicksPerBeat = 48;

constexpr double to_beats(Ticks t) { return static_cast<double>(t) / kTicksPerBeat; }

struct Note {
  DiatonicPitch pitch;
  Ticks onset = 0;
  Ticks duration = kTicksPerBeat;

  Ticks end() const { return onset + duration; }

  friend bool operator==(const Note&, const Note&) = default;
};

struct Piece {
  std::string id;
  std::string title;
  int beats_per_measure = 4;
  double default_tempo = 80.0;  // BPM
  std::vector<Note> notes;

  Ticks measure_length() const { return beats_per_measure * kTicksPerBeat; }
  /// End of the last note, or 0 for an empty piece.
  Ticks end() const;
  int measure_count() const;

  friend bool operator==(const Piece&, const Piece&) = default;
};

enum class Severity { Warning, Error };

enum class ViolationKind {
  NonPositiveDuration,
  NegativeOnset,
  Unsorted,
  Polyphony,
  AdjacentEqualPitch,
  BadMeter,
  BadTempo,
  LongerThanEightMeasures,
};

struct Violation {
  ViolationKind kind;
  Severity severity;
  std::size_t note_index;  // first offending note; 0 for piece-level issues
  std::string message;
};

std::vector<Violation> validate_piece(const Piece& piece);

bool has_errors(std::span<const Violation> violations);

/// Raw inputs to the difficulty metric.
struct DifficultyFeatures {
  double density;        // notes per beat
  double mean_interval;  // mean |degree step| between consecutive notes
};

DifficultyFeatures difficulty_features(const Piece& piece);

/// Difficulty of every piece relative to the given curriculum: the sum of the
/// standardized note density and standardized mean interval. Values are
/// centred on zero, so easy pieces come out negative. Throws
/// std::invalid_argument if any piece has fewer than two notes.
std::vector<double> difficulty(std::span<const Piece> curriculum);

}  // namespace rainbow
