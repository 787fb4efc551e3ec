#pragma once

// Helpers shared by the test binaries: small piece builders, random
// generators for property tests, and a brute-force coverage oracle that does
// not use the library's scoring code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rainbow/performance.hpp"
#include "rainbow/piece.hpp"
#include "rainbow/piece_format.hpp"
#include "rainbow/random.hpp"

namespace testing {

using namespace rainbow;

inline std::string data_path(const std::string& rel) { return std::string(RAINBOW_DATA_DIR) + "/" + rel; }

inline Piece piece_from_body(const std::string& body, double tempo = 60.0, int meter = 4,
                             const std::string& id = "t") {
  return parse_piece("@id " + id + "\n@tempo " + std::to_string(tempo) + "\n@meter " + std::to_string(meter) +
                     "\n" + body + "\n");
}

/// Unvalidated piece of quarter notes from letters, e.g. "CDEFGE".
inline Piece quarters(const std::string& letters, double tempo = 60.0) {
  Piece p;
  p.id = "q";
  p.default_tempo = tempo;
  Ticks t = 0;
  for (char c : letters) {
    p.notes.push_back(Note{DiatonicPitch::from_letter(c), t, kTicksPerBeat});
    t += kTicksPerBeat;
  }
  return p;
}

inline PerformanceEvent ev(Millis t, DiatonicPitch p) { return PerformanceEvent{t, fingering_for_pitch(p)}; }

/// Every event of the record plays exactly its note from onset on: a perfect
/// timed performance.
inline PerformanceRecord perfect_record(const Piece& piece, ModeId mode, double tempo) {
  PerformanceRecord r;
  r.piece_id = piece.id;
  r.mode = mode;
  r.tempo = tempo;
  for (const auto& n : piece.notes) r.events.push_back(ev(static_cast<Millis>(ticks_to_ms(n.onset, tempo)), n.pitch));
  r.end_t = static_cast<Millis>(ticks_to_ms(piece.end(), tempo));
  return r;
}

/// Durations representable by the text grammar.
inline const std::vector<Ticks>& grammar_durations() {
  static const std::vector<Ticks> d = {192, 288, 96, 144, 48, 72, 24, 36, 12, 18};
  return d;
}

/// Random piece obeying every invariant: contiguous notes, grammar durations,
/// no adjacent repeats, fits in `max_measures` measures.
inline Piece random_piece(Rng& rng, int max_notes = 24, int max_measures = 8) {
  Piece p;
  p.id = "g" + std::to_string(rng.below(1000));
  p.beats_per_measure = static_cast<int>(2 + rng.below(3));
  p.default_tempo = 40.0 + static_cast<double>(rng.below(101));
  const Ticks limit = p.measure_length() * max_measures;
  const int n = static_cast<int>(2 + rng.below(static_cast<std::uint64_t>(max_notes - 1)));
  Ticks t = 0;
  std::optional<int> prev;
  for (int i = 0; i < n; ++i) {
    const auto& durs = grammar_durations();
    Ticks d = durs[rng.below(durs.size())];
    if (t + d > limit) break;
    int deg;
    do {
      deg = static_cast<int>(rng.below(7));
    } while (prev && *prev == deg);
    p.notes.push_back(Note{DiatonicPitch(deg), t, d});
    prev = deg;
    t += d;
  }
  if (p.notes.size() < 2) {
    p.notes = {Note{pitches::C, 0, 48}, Note{pitches::D, 48, 48}};
  }
  return p;
}

/// Random finished record with integer-ms events over [0, horizon).
inline PerformanceRecord random_record(Rng& rng, const Piece& piece, ModeId mode, double tempo, Millis horizon,
                                       int max_events = 40) {
  PerformanceRecord r;
  r.piece_id = piece.id;
  r.mode = mode;
  r.tempo = tempo;
  const int n = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_events + 1)));
  std::vector<Millis> times;
  for (int i = 0; i < n; ++i) times.push_back(static_cast<Millis>(rng.below(static_cast<std::uint64_t>(horizon))));
  std::sort(times.begin(), times.end());
  for (Millis t : times) {
    // Bias toward the written note so correct notes are common.
    FingeringState f = FingeringState::from_mask(static_cast<std::uint8_t>(rng.below(64)));
    if (rng.below(2) == 0) {
      for (const auto& note : piece.notes) {
        if (ticks_to_ms(note.onset, tempo) <= static_cast<double>(t) &&
            static_cast<double>(t) < ticks_to_ms(note.end(), tempo)) {
          f = fingering_for_pitch(note.pitch);
        }
      }
    }
    r.events.push_back(PerformanceEvent{t, f});
  }
  Millis end = horizon;
  if (!times.empty()) end = std::max(end, times.back());
  r.end_t = end;
  return r;
}

/// 1 ms sampling oracle. Exact when note boundaries and event times are
/// whole milliseconds. Returns correct-ms per note.
inline std::vector<Millis> brute_force_correct_ms(const Piece& piece, const PerformanceRecord& r, double tempo) {
  std::vector<Millis> out;
  for (const auto& n : piece.notes) {
    const auto a = static_cast<Millis>(ticks_to_ms(n.onset, tempo));
    const auto b = static_cast<Millis>(ticks_to_ms(n.end(), tempo));
    Millis hits = 0;
    for (Millis m = a; m < b; ++m) {
      if (r.end_t && m >= *r.end_t) break;
      const PerformanceEvent* cur = nullptr;
      for (const auto& e : r.events) {
        if (e.t <= m) cur = &e;
      }
      if (!cur) continue;
      // Topmost open hole, written out independently of the library.
      int degree = 0;
      for (int hole = 1; hole <= 6; ++hole) {
        if (!(cur->fingering.mask() & (1u << (hole - 1)))) {
          degree = 7 - hole;
          break;
        }
      }
      if (degree == n.pitch.degree()) ++hits;
    }
    out.push_back(hits);
  }
  return out;
}

inline std::size_t brute_force_correct_notes(const Piece& piece, const PerformanceRecord& r, double tempo) {
  const auto hits = brute_force_correct_ms(piece, r, tempo);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < piece.notes.size(); ++i) {
    const auto total = static_cast<Millis>(ticks_to_ms(piece.notes[i].end(), tempo)) -
                       static_cast<Millis>(ticks_to_ms(piece.notes[i].onset, tempo));
    // ratio >= 0.7 in integers
    if (10 * hits[i] >= 7 * total) ++correct;
  }
  return correct;
}

/// Chi-square survival function for 6 degrees of freedom (closed form).
inline double chi_square_6_upper(double x) {
  const double y = x / 2.0;
  return std::exp(-y) * (1.0 + y + y * y / 2.0);
}

}  // namespace testing
