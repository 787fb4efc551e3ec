#include "rainbow/scoring.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace rainbow {
namespace {

// Played signal as consecutive segments starting at the first event.
std::vector<TrackSegment> played_segments(const PerformanceRecord& record) {
  std::vector<TrackSegment> segs;
  const double horizon =
      record.end_t ? static_cast<double>(*record.end_t) : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < record.events.size(); ++i) {
    double start = static_cast<double>(record.events[i].t);
    double end = i + 1 < record.events.size() ? static_cast<double>(record.events[i + 1].t) : horizon;
    end = std::min(end, horizon);
    if (end <= start) continue;
    segs.push_back(TrackSegment{start, end, pitch_from_fingering(record.events[i].fingering)});
  }
  return segs;
}

void append_merged(std::vector<TrackSegment>& track, TrackSegment seg) {
  if (seg.end_ms <= seg.start_ms) return;
  if (!track.empty() && track.back().pitch == seg.pitch && track.back().end_ms == seg.start_ms) {
    track.back().end_ms = seg.end_ms;
    return;
  }
  track.push_back(seg);
}

}  // namespace

std::vector<NoteCoverage> compute_coverage(const Piece& piece, const PerformanceRecord& record, double tempo) {
  if (!(tempo > 0.0)) throw std::invalid_argument("tempo must be positive");
  auto segs = played_segments(record);
  std::vector<NoteCoverage> out;
  out.reserve(piece.notes.size());
  std::size_t first = 0;
  for (std::size_t i = 0; i < piece.notes.size(); ++i) {
    const Note& n = piece.notes[i];
    double a = ticks_to_ms(n.onset, tempo);
    double b = ticks_to_ms(n.end(), tempo);
    while (first < segs.size() && segs[first].end_ms <= a) ++first;
    double correct = 0.0;
    for (std::size_t s = first; s < segs.size() && segs[s].start_ms < b; ++s) {
      if (segs[s].pitch != n.pitch) continue;
      correct += std::max(0.0, std::min(b, segs[s].end_ms) - std::max(a, segs[s].start_ms));
    }
    double total = b - a;
    out.push_back(NoteCoverage{i, correct, total, std::clamp(correct / total, 0.0, 1.0)});
  }
  return out;
}

double score_performance(std::span<const NoteCoverage> coverages) {
  if (coverages.empty()) throw std::invalid_argument("cannot score an empty performance");
  auto hits = std::count_if(coverages.begin(), coverages.end(), [](const NoteCoverage& c) { return c.correct(); });
  return static_cast<double>(hits) / static_cast<double>(coverages.size());
}

ReviewDocument build_review(const Piece& piece, const PerformanceRecord& record, double tempo) {
  if (!record.finished()) throw std::logic_error("cannot review an unfinished session");
  ReviewDocument doc;
  doc.piece_id = piece.id;
  doc.tempo = tempo;

  double cursor = 0.0;
  for (const Note& n : piece.notes) {
    double a = ticks_to_ms(n.onset, tempo);
    double b = ticks_to_ms(n.end(), tempo);
    append_merged(doc.ground_truth, TrackSegment{cursor, a, std::nullopt});
    append_merged(doc.ground_truth, TrackSegment{a, b, n.pitch});
    cursor = b;
  }

  const double end = static_cast<double>(*record.end_t);
  cursor = 0.0;
  for (const auto& seg : played_segments(record)) {
    append_merged(doc.played, TrackSegment{cursor, seg.start_ms, std::nullopt});
    append_merged(doc.played, seg);
    cursor = seg.end_ms;
  }
  append_merged(doc.played, TrackSegment{cursor, end, std::nullopt});
  if (doc.played.empty()) doc.played.push_back(TrackSegment{0.0, end, std::nullopt});

  for (const auto& c : compute_coverage(piece, record, tempo)) doc.note_correct.push_back(c.correct());
  return doc;
}

std::vector<TrackSegment> sounding(std::span<const TrackSegment> track) {
  std::vector<TrackSegment> out;
  for (const auto& s : track) {
    if (s.pitch) append_merged(out, s);
  }
  return out;
}

}  // namespace rainbow
