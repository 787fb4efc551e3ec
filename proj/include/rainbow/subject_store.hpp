#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rainbow/analytics.hpp"
#include "rainbow/curriculum.hpp"
#include "rainbow/performance.hpp"

namespace rainbow {

/// Letters, digits, '-' and '_', at most 64 characters.
bool valid_subject_id(std::string_view id);

/// One directory per subject under the data dir:
///   <id>/events.jsonl     append-only log, one JSON object per line
///   <id>/sessions/N.jsonl performance records referenced from the log
/// All calls are serialized through one mutex.
class SubjectStore {
public:
  explicit SubjectStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  std::vector<nlohmann::json> events(const std::string& subject_id) const;
  void append(const std::string& subject_id, const nlohmann::json& event);

  /// Writes the record under a fresh name and returns the name relative to
  /// the subject directory.
  std::string save_session(const std::string& subject_id, const PerformanceRecord& record);
  PerformanceRecord load_session(const std::string& subject_id, const std::string& name) const;

private:
  std::filesystem::path dir(const std::string& subject_id) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

/// Where a subject stands within the current song.
enum class SongPhase : std::uint8_t {
  NeedPreExam,
  AfterPreExam,  // practice, skip (if passed), quit, or the randomized exam
  Done,
};

/// Curriculum progress rebuilt from the event log. Every curriculum change
/// goes through step_song (or quit before the pre-exam).
class SubjectProgress {
public:
  SubjectProgress(std::string subject_id, std::vector<std::string> piece_order);

  static SubjectProgress replay(std::string subject_id, std::vector<std::string> piece_order,
                                const std::vector<nlohmann::json>& events);

  /// Applies one log event. Throws std::invalid_argument on an event that is
  /// not legal in the current phase.
  void apply(const nlohmann::json& event);

  const std::string& subject_id() const { return id_; }
  std::optional<Group> group() const { return group_; }
  SongPhase phase() const;
  /// Song-boundary state plus the pending pre-exam, if any.
  CurriculumState view() const;
  std::size_t position() const { return state_.position(); }
  std::optional<double> pre_score() const;
  Millis practice_ms() const { return practice_ms_; }
  const std::optional<nlohmann::json>& interrupted() const { return interrupted_; }

  nlohmann::json to_json() const;

private:
  void commit();

  std::string id_;
  std::optional<Group> group_;
  CurriculumState state_;  // as of the start of the current song
  std::optional<SongStep> pending_;
  Millis practice_ms_ = 0;
  std::optional<nlohmann::json> interrupted_;
};

}  // namespace rainbow
