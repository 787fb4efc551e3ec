#include "rainbow/curriculum.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "rainbow/number_format.hpp"
#include "rainbow/random.hpp"

namespace rainbow {

std::string_view to_string(ExamKind kind) { return kind == ExamKind::Pre ? "pre" : "randomized"; }

ExamKind exam_kind_from_string(std::string_view s) {
  if (s == "pre") return ExamKind::Pre;
  if (s == "randomized") return ExamKind::Randomized;
  throw std::invalid_argument("unknown exam kind '" + std::string(s) + "'");
}

std::string_view to_string(CurriculumStatus status) {
  switch (status) {
    case CurriculumStatus::Running: return "running";
    case CurriculumStatus::Achieved: return "achieved";
    case CurriculumStatus::Quit: return "quit";
    case CurriculumStatus::Exhausted: return "exhausted";
  }
  return "?";
}

CurriculumStatus curriculum_status_from_string(std::string_view s) {
  for (auto st : {CurriculumStatus::Running, CurriculumStatus::Achieved, CurriculumStatus::Quit,
                  CurriculumStatus::Exhausted}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown curriculum status '" + std::string(s) + "'");
}

CurriculumState::CurriculumState(std::vector<std::string> piece_order) : order_(std::move(piece_order)) {
  if (order_.empty()) throw std::invalid_argument("curriculum has no pieces");
}

bool CurriculumState::record_exam(ExamKind kind, double score) {
  if (!running()) throw CurriculumError("curriculum already terminated");
  if (position_ >= order_.size()) throw CurriculumError("no song at the current position");
  if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("exam score outside [0, 1]");
  history_.push_back(ExamResult{order_[position_], kind, score, static_cast<int>(history_.size()) + 1});
  consecutive_ = score >= kPassScore ? consecutive_ + 1 : 0;
  if (consecutive_ >= kPassesToAchieve) status_ = CurriculumStatus::Achieved;
  return status_ == CurriculumStatus::Achieved;
}

void CurriculumState::advance() {
  ++position_;
  if (running() && position_ >= order_.size()) status_ = CurriculumStatus::Exhausted;
}

void CurriculumState::quit() {
  if (!running()) throw CurriculumError("curriculum already terminated");
  status_ = CurriculumStatus::Quit;
}

CurriculumState step_song(CurriculumState state, const SongStep& step) {
  if (!state.running()) throw CurriculumError("cannot step a terminated curriculum");
  const bool skipping = step.skip && step.pre_score >= kPassScore;
  if (state.record_exam(ExamKind::Pre, step.pre_score)) {
    state.advance();
    return state;
  }
  if (step.quit) {
    state.quit();
    return state;
  }
  if (!skipping) {
    if (!step.exam_score) throw std::invalid_argument("randomized exam score missing for a song that was not skipped");
    state.record_exam(ExamKind::Randomized, *step.exam_score);
  }
  state.advance();
  return state;
}

double learning_efficiency(const CurriculumState& state) {
  if (state.status() != CurriculumStatus::Achieved) {
    throw CurriculumError("learning efficiency is defined only for achieved curricula");
  }
  return 1.0 / static_cast<double>(state.history().size());
}

bool practice_budget(Millis elapsed) { return elapsed <= kPracticeBudgetMs; }

std::vector<std::size_t> alternating_order(std::span<const double> difficulties) {
  if (difficulties.size() < 2) throw std::invalid_argument("alternating order needs at least two pieces");
  std::vector<std::size_t> idx(difficulties.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return difficulties[a] < difficulties[b]; });
  const std::size_t easy = (idx.size() + 1) / 2;
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (std::size_t k = 0; k < easy; ++k) {
    out.push_back(idx[k]);
    if (easy + k < idx.size()) out.push_back(idx[easy + k]);
  }
  return out;
}

std::vector<Piece> arrange_alternating(std::span<const Piece> pieces) {
  auto d = difficulty(pieces);
  std::vector<Piece> out;
  for (std::size_t i : alternating_order(d)) out.push_back(pieces[i]);
  return out;
}

Piece randomize_pitches(const Piece& piece, std::uint64_t seed) {
  Rng rng(seed);
  Piece out = piece;
  std::optional<int> prev;
  for (Note& n : out.notes) {
    int degree;
    if (!prev) {
      degree = static_cast<int>(rng.below(DiatonicPitch::kCount));
    } else {
      degree = static_cast<int>(rng.below(DiatonicPitch::kCount - 1));
      if (degree >= *prev) ++degree;
    }
    n.pitch = DiatonicPitch(degree);
    prev = degree;
  }
  return out;
}

void write_exam_csv_header(std::ostream& out) { out << "subject_id,exam_index,piece_id,kind,score\n"; }

void write_exam_csv_rows(std::ostream& out, std::string_view subject_id, std::span<const ExamResult> history) {
  for (const auto& r : history) {
    out << subject_id << ',' << r.exam_index << ',' << r.piece_id << ',' << to_string(r.kind) << ','
        << format_number(r.score) << '\n';
  }
}

}  // namespace rainbow
