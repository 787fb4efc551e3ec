#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rainbow/performance.hpp"
#include "rainbow/piece.hpp"

namespace rainbow {

/// A note counts as played correctly when the right pitch sounds for at least
/// this fraction of its duration (inclusive).
inline constexpr double kCorrectCoverage = 0.7;

struct NoteCoverage {
  std::size_t note_index = 0;
  double correct_ms = 0.0;
  double total_ms = 0.0;
  double ratio = 0.0;

  bool correct() const { return ratio >= kCorrectCoverage; }
};

/// Overlap of each note's wall-clock window with the piecewise-constant
/// played pitch. Time before the first event and after the record's end is
/// silent.
std::vector<NoteCoverage> compute_coverage(const Piece& piece, const PerformanceRecord& record, double tempo);

/// Fraction of notes played correctly. Throws std::invalid_argument on an
/// empty list.
double score_performance(std::span<const NoteCoverage> coverages);

struct TrackSegment {
  double start_ms = 0.0;
  double end_ms = 0.0;
  std::optional<DiatonicPitch> pitch;  // nullopt = silence

  double start_beats(double tempo) const { return start_ms / beat_ms(tempo); }
  double end_beats(double tempo) const { return end_ms / beat_ms(tempo); }

  friend bool operator==(const TrackSegment&, const TrackSegment&) = default;
};

/// Offline review: the ground truth and what was played, on one time axis.
struct ReviewDocument {
  std::string piece_id;
  double tempo = 0.0;
  std::vector<TrackSegment> ground_truth;
  std::vector<TrackSegment> played;
  std::vector<bool> note_correct;
};

/// Throws std::logic_error if the record is unfinished.
ReviewDocument build_review(const Piece& piece, const PerformanceRecord& record, double tempo);

/// Sounding (non-silent) segments only; adjacent equal pitches merged.
std::vector<TrackSegment> sounding(std::span<const TrackSegment> track);

}  // namespace rainbow
