#include "rainbow/piece.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace rainbow {

Ticks Piece::end() const { return notes.empty() ? 0 : notes.back().end(); }

int Piece::measure_count() const {
  Ticks len = measure_length();
  if (len <= 0) return 0;
  return static_cast<int>((end() + len - 1) / len);
}

std::vector<Violation> validate_piece(const Piece& piece) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind kind, Severity sev, std::size_t idx, std::string msg) {
    out.push_back(Violation{kind, sev, idx, std::move(msg)});
  };

  if (piece.beats_per_measure <= 0) {
    add(ViolationKind::BadMeter, Severity::Error, 0, "beats per measure must be positive");
  }
  if (!(piece.default_tempo > 0.0) || !std::isfinite(piece.default_tempo)) {
    add(ViolationKind::BadTempo, Severity::Error, 0, "tempo must be positive");
  }

  for (std::size_t i = 0; i < piece.notes.size(); ++i) {
    const Note& n = piece.notes[i];
    if (n.duration <= 0) {
      add(ViolationKind::NonPositiveDuration, Severity::Error, i, "note duration must be positive");
    }
    if (n.onset < 0) {
      add(ViolationKind::NegativeOnset, Severity::Error, i, "note onset must be non-negative");
    }
    if (i == 0) continue;
    const Note& prev = piece.notes[i - 1];
    if (n.onset < prev.onset) {
      add(ViolationKind::Unsorted, Severity::Error, i, "notes are not sorted by onset");
    } else if (n.onset < prev.end()) {
      add(ViolationKind::Polyphony, Severity::Error, i, "polyphony: note overlaps its predecessor");
    }
    if (n.pitch == prev.pitch) {
      add(ViolationKind::AdjacentEqualPitch, Severity::Error, i, "adjacent equal pitch");
    }
  }

  if (piece.beats_per_measure > 0 && piece.measure_count() > 8) {
    add(ViolationKind::LongerThanEightMeasures, Severity::Warning, 0,
        "piece spans " + std::to_string(piece.measure_count()) + " measures (more than 8)");
  }
  return out;
}

bool has_errors(std::span<const Violation> violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.severity == Severity::Error; });
}

DifficultyFeatures difficulty_features(const Piece& piece) {
  if (piece.notes.size() < 2) {
    throw std::invalid_argument("difficulty needs at least two notes (piece '" + piece.id + "')");
  }
  double beats = to_beats(piece.end());
  double steps = 0.0;
  for (std::size_t i = 1; i < piece.notes.size(); ++i) {
    steps += std::abs(piece.notes[i].pitch.degree() - piece.notes[i - 1].pitch.degree());
  }
  return DifficultyFeatures{
      static_cast<double>(piece.notes.size()) / beats,
      steps / static_cast<double>(piece.notes.size() - 1),
  };
}

namespace {

// Population z-scores; a zero spread maps every value to 0.
std::vector<double> standardize(const std::vector<double>& xs) {
  double n = static_cast<double>(xs.size());
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / n);
  std::vector<double> z(xs.size(), 0.0);
  if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
    for (std::size_t i = 0; i < xs.size(); ++i) z[i] = (xs[i] - mean) / sd;
  }
  return z;
}

}  // namespace

std::vector<double> difficulty(std::span<const Piece> curriculum) {
  std::vector<double> density, interval;
  density.reserve(curriculum.size());
  interval.reserve(curriculum.size());
  for (const Piece& p : curriculum) {
    auto f = difficulty_features(p);
    density.push_back(f.density);
    interval.push_back(f.mean_interval);
  }
  if (curriculum.empty()) return {};
  auto zd = standardize(density);
  auto zi = standardize(interval);
  std::vector<double> out(curriculum.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = zd[i] + zi[i];
  return out;
}

}  // namespace rainbow
