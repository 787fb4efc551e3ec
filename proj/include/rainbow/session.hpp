#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rainbow/performance.hpp"
#include "rainbow/piece.hpp"
#include "rainbow/scoring.hpp"

namespace rainbow {

enum class NoteStatus : std::uint8_t { Pending, InProgress, Correct, Incorrect };

enum class Arrow : std::uint8_t { None, Up, Down };

Arrow arrow_between(int played_row, int target_row);

/// White mask drawn at the played row, pointing toward the target row.
struct FeedbackMask {
  int played_row = 0;
  int target_row = 0;
  Arrow arrow = Arrow::None;
  double span_begin_beats = 0.0;
  double span_end_beats = 0.0;

  friend bool operator==(const FeedbackMask&, const FeedbackMask&) = default;
};

struct FeedbackFrame {
  double t_ms = 0.0;
  std::optional<double> playhead_beats;  // absent in mode D
  std::vector<NoteStatus> statuses;      // empty when feedback is hidden (mode C, D)
  std::optional<FeedbackMask> mask;
};

struct MetronomeClick {
  int beat = 0;
  double t_ms = 0.0;
  bool downbeat = false;
};

struct ClockUpdate {
  std::vector<FeedbackFrame> frames;
  std::vector<MetronomeClick> clicks;
  bool finished = false;
};

/// One decision of the mode-B gate: a revealed mistake or a matched note.
struct GateDecision {
  std::size_t note_index = 0;
  Millis t = 0;
  DiatonicPitch played;
  bool correct = false;
};

struct SessionConfig {
  Millis hold_ms = 30;        // mode B debounce before a note counts as matched
  double frame_rate = 30.0;   // mode A/C frames per second
};

class InvalidModeError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class TimeRegressionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Single-owner state machine for one practice or exam session. Copies are
/// independent snapshots.
class Session {
public:
  /// Throws std::invalid_argument for a non-positive tempo or an invalid piece.
  static Session start(ModeId mode, Piece piece, double tempo, SessionConfig config = {});

  ModeId mode() const { return record_.mode; }
  const Piece& piece() const { return *piece_; }
  double tempo() const { return record_.tempo; }
  const SessionConfig& config() const { return config_; }
  Millis now() const { return now_; }
  bool finished() const { return record_.finished(); }
  const PerformanceRecord& record() const { return record_; }

  /// Beats: linear in time for A/C, the gated note's onset for B, absent for D.
  std::optional<double> playhead_beats() const;
  /// Mode B only: index of the note the playhead waits on.
  std::optional<std::size_t> gate_index() const;
  const std::vector<GateDecision>& gate_log() const { return gate_log_; }
  /// Mode A/C only.
  double metronome_period_ms() const;
  /// Wall-clock end of the last note for A/C.
  double timed_end_ms() const;

  /// Mode A/C. Moves the playhead to t, emitting feedback frames at the
  /// configured frame rate and metronome clicks on each beat.
  ClockUpdate advance_clock(Millis t);

  /// Records a fingering change. Mode A returns a frame with the live mask;
  /// mode B returns the frame after the gate decision; C and D return nothing.
  std::optional<FeedbackFrame> on_fingering(const PerformanceEvent& event);

  /// Mode B: settle a pending hold at time t.
  std::optional<FeedbackFrame> poll(Millis t);

  /// Ends the session at t (stop button, practice budget, or mode D).
  void finish(Millis t);

  /// Frame describing the state at the current time.
  FeedbackFrame snapshot() const;

  ReviewDocument review() const;

private:
  Session(ModeId mode, std::shared_ptr<const Piece> piece, double tempo, SessionConfig config);

  void require_time(Millis t) const;
  FeedbackFrame timed_frame(double t) const;
  FeedbackFrame gated_frame(double t, std::optional<FeedbackMask> mask) const;
  NoteStatus judge_closed(std::size_t i) const;
  bool settle_hold(Millis t);

  std::shared_ptr<const Piece> piece_;
  SessionConfig config_;
  PerformanceRecord record_;
  Millis now_ = 0;

  // Mode A/C.
  long next_frame_ = 0;
  int next_click_ = 0;
  mutable std::vector<std::optional<NoteStatus>> closed_;

  // Mode B.
  std::size_t gate_ = 0;
  std::optional<Millis> hold_start_;
  std::optional<DiatonicPitch> last_played_;
  std::vector<NoteStatus> gate_status_;
  std::vector<GateDecision> gate_log_;
};

/// Feeds a persisted record through a fresh session and scores it. Only
/// timed modes (A, C) are scored.
double replay_score(const Piece& piece, const PerformanceRecord& record, SessionConfig config = {});

}  // namespace rainbow
