#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rainbow/performance.hpp"
#include "rainbow/piece.hpp"

namespace rainbow {

inline constexpr double kPassScore = 0.8;
inline constexpr int kPassesToAchieve = 3;
inline constexpr Millis kPracticeBudgetMs = 15 * 60 * 1000;
inline constexpr ModeId kExamMode = ModeId::C;

enum class ExamKind : std::uint8_t { Pre, Randomized };

std::string_view to_string(ExamKind kind);
ExamKind exam_kind_from_string(std::string_view s);

struct ExamResult {
  std::string piece_id;
  ExamKind kind = ExamKind::Pre;
  double score = 0.0;
  int exam_index = 0;  // 1-based across the whole curriculum

  friend bool operator==(const ExamResult&, const ExamResult&) = default;
};

enum class CurriculumStatus : std::uint8_t {
  Running,
  Achieved,
  Quit,
  Exhausted,  // every song done without three consecutive passes
};

std::string_view to_string(CurriculumStatus status);
CurriculumStatus curriculum_status_from_string(std::string_view s);

/// What happened while working through one song.
struct SongStep {
  double pre_score = 0.0;
  bool skip = false;                  // honoured only when pre_score >= 0.8
  bool quit = false;                  // subject left after the pre-exam
  std::optional<double> exam_score;   // randomized exam; needed unless skipped, quit, or achieved at the pre-exam
};

class CurriculumState {
public:
  CurriculumState() = default;
  explicit CurriculumState(std::vector<std::string> piece_order);

  const std::vector<std::string>& piece_order() const { return order_; }
  std::size_t position() const { return position_; }
  const std::vector<ExamResult>& history() const { return history_; }
  int consecutive_pass_count() const { return consecutive_; }
  CurriculumStatus status() const { return status_; }
  bool running() const { return status_ == CurriculumStatus::Running; }

  /// Appends an exam and updates the pass run. Returns true once achieved.
  bool record_exam(ExamKind kind, double score);
  void advance();
  void quit();

  friend bool operator==(const CurriculumState&, const CurriculumState&) = default;

private:
  std::vector<std::string> order_;
  std::size_t position_ = 0;
  std::vector<ExamResult> history_;
  int consecutive_ = 0;
  CurriculumStatus status_ = CurriculumStatus::Running;
};

class CurriculumError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Pre-exam, optional randomized exam, then the next song. Stops as soon as
/// the third consecutive pass is recorded.
CurriculumState step_song(CurriculumState state, const SongStep& step);

/// 1 / number of exams taken up to and including the achieving one.
double learning_efficiency(const CurriculumState& state);

bool practice_budget(Millis elapsed);

/// Stable sort by difficulty, then interleave easy and hard halves:
/// E1 H1 E2 H2 ... (the easy half takes the odd piece out). Returns indices.
std::vector<std::size_t> alternating_order(std::span<const double> difficulties);
std::vector<Piece> arrange_alternating(std::span<const Piece> pieces);

/// Same rhythm, new pitches: each drawn uniformly from the seven degrees
/// minus the previous note's pitch.
Piece randomize_pitches(const Piece& piece, std::uint64_t seed);

void write_exam_csv_header(std::ostream& out);
void write_exam_csv_rows(std::ostream& out, std::string_view subject_id, std::span<const ExamResult> history);

}  // namespace rainbow
