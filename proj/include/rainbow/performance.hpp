#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rainbow/piece.hpp"
#include "rainbow/pitch.hpp"

namespace rainbow {

/// Wall-clock milliseconds since session start.
using Millis = std::int64_t;

enum class ModeId : std::uint8_t {
  A,  // constant playhead, frame-wise feedback
  B,  // playhead waits for the correct note, note-wise feedback
  C,  // constant playhead, no feedback
  D,  // free practice, no playhead
};

inline constexpr ModeId kAllModes[] = {ModeId::A, ModeId::B, ModeId::C, ModeId::D};

constexpr bool is_interactive(ModeId m) { return m == ModeId::A || m == ModeId::B; }
constexpr bool is_timed(ModeId m) { return m == ModeId::A || m == ModeId::C; }

char to_char(ModeId m);
ModeId mode_from_string(std::string_view s);

struct PerformanceEvent {
  Millis t = 0;
  FingeringState fingering;

  friend bool operator==(const PerformanceEvent&, const PerformanceEvent&) = default;
};

struct PerformanceRecord {
  std::string piece_id;
  ModeId mode = ModeId::C;
  double tempo = 80.0;
  std::vector<PerformanceEvent> events;
  std::optional<Millis> end_t;  // unset while the session is running

  bool finished() const { return end_t.has_value(); }

  friend bool operator==(const PerformanceRecord&, const PerformanceRecord&) = default;
};

/// Milliseconds per beat at the given tempo.
constexpr double beat_ms(double tempo) { return 60000.0 / tempo; }
constexpr double ticks_to_ms(Ticks t, double tempo) {
  return static_cast<double>(t) * 60000.0 / (static_cast<double>(kTicksPerBeat) * tempo);
}

/// Pitch sounding at time t, or nullopt before the first event and after the
/// end of the record.
std::optional<DiatonicPitch> played_at(const PerformanceRecord& record, double t);

// Persistence: one JSON header line followed by one line per event.
void write_record(std::ostream& out, const PerformanceRecord& record);
PerformanceRecord read_record(std::istream& in);
std::string record_to_jsonl(const PerformanceRecord& record);
PerformanceRecord record_from_jsonl(std::string_view text);

}  // namespace rainbow
