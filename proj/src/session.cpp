#include "rainbow/session.hpp"

#include <algorithm>
#include <cmath>

namespace rainbow {

Arrow arrow_between(int played_row, int target_row) {
  if (target_row > played_row) return Arrow::Up;
  if (target_row < played_row) return Arrow::Down;
  return Arrow::None;
}

Session::Session(ModeId mode, std::shared_ptr<const Piece> piece, double tempo, SessionConfig config)
    : piece_(std::move(piece)), config_(config) {
  record_.piece_id = piece_->id;
  record_.mode = mode;
  record_.tempo = tempo;
  closed_.assign(piece_->notes.size(), std::nullopt);
  if (mode == ModeId::B) {
    gate_status_.assign(piece_->notes.size(), NoteStatus::Pending);
    gate_status_.front() = NoteStatus::InProgress;
  }
}

Session Session::start(ModeId mode, Piece piece, double tempo, SessionConfig config) {
  if (!(tempo > 0.0) || !std::isfinite(tempo)) throw std::invalid_argument("tempo must be positive");
  if (piece.notes.empty()) throw std::invalid_argument("cannot start a session on an empty piece");
  if (has_errors(validate_piece(piece))) throw std::invalid_argument("piece '" + piece.id + "' is invalid");
  if (!(config.frame_rate > 0.0)) throw std::invalid_argument("frame rate must be positive");
  if (config.hold_ms < 0) throw std::invalid_argument("hold time must be non-negative");
  return Session(mode, std::make_shared<const Piece>(std::move(piece)), tempo, config);
}

std::optional<double> Session::playhead_beats() const {
  switch (mode()) {
    case ModeId::A:
    case ModeId::C:
      return std::min(static_cast<double>(now_), timed_end_ms()) * tempo() / 60000.0;
    case ModeId::B:
      if (gate_ >= piece_->notes.size()) return to_beats(piece_->end());
      return to_beats(piece_->notes[gate_].onset);
    case ModeId::D:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::size_t> Session::gate_index() const {
  if (mode() != ModeId::B) return std::nullopt;
  return gate_;
}

double Session::metronome_period_ms() const {
  if (!is_timed(mode())) throw InvalidModeError("metronome runs only in modes A and C");
  return beat_ms(tempo());
}

double Session::timed_end_ms() const { return ticks_to_ms(piece_->end(), tempo()); }

void Session::require_time(Millis t) const {
  if (t < now_) {
    throw TimeRegressionError("time went backwards: " + std::to_string(t) + " < " + std::to_string(now_));
  }
}

ClockUpdate Session::advance_clock(Millis t) {
  if (!is_timed(mode())) throw InvalidModeError("advance_clock is only valid in modes A and C");
  require_time(t);
  ClockUpdate update;
  if (finished()) {
    now_ = t;
    update.finished = true;
    return update;
  }

  const double end = timed_end_ms();
  const double limit = std::min(static_cast<double>(t), end);
  // k * 1000 / rate rather than k * period: exact on whole milliseconds.
  auto frame_time = [&](long k) { return static_cast<double>(k) * 1000.0 / config_.frame_rate; };
  double last_frame = -1.0;
  while (frame_time(next_frame_) <= limit) {
    last_frame = frame_time(next_frame_);
    update.frames.push_back(timed_frame(last_frame));
    ++next_frame_;
  }
  const double beat = beat_ms(tempo());
  while (static_cast<double>(next_click_) * beat <= limit && static_cast<double>(next_click_) * beat < end) {
    update.clicks.push_back(MetronomeClick{next_click_, static_cast<double>(next_click_) * beat,
                                           next_click_ % piece_->beats_per_measure == 0});
    ++next_click_;
  }
  now_ = t;

  if (static_cast<double>(t) >= end) {
    if (last_frame < end) update.frames.push_back(timed_frame(end));
    record_.end_t = static_cast<Millis>(std::ceil(end));
    update.finished = true;
  }
  return update;
}

NoteStatus Session::judge_closed(std::size_t i) const {
  if (!closed_[i]) {
    auto cov = compute_coverage(*piece_, record_, tempo());
    closed_[i] = cov[i].correct() ? NoteStatus::Correct : NoteStatus::Incorrect;
  }
  return *closed_[i];
}

FeedbackFrame Session::timed_frame(double t) const {
  FeedbackFrame frame;
  frame.t_ms = t;
  frame.playhead_beats = t * tempo() / 60000.0;
  if (mode() != ModeId::A) return frame;

  const auto& notes = piece_->notes;
  frame.statuses.reserve(notes.size());
  std::optional<std::size_t> current;
  for (std::size_t i = 0; i < notes.size(); ++i) {
    double a = ticks_to_ms(notes[i].onset, tempo());
    double b = ticks_to_ms(notes[i].end(), tempo());
    if (t < a) {
      frame.statuses.push_back(NoteStatus::Pending);
    } else if (t < b) {
      frame.statuses.push_back(NoteStatus::InProgress);
      current = i;
    } else {
      frame.statuses.push_back(judge_closed(i));
    }
  }
  if (!current) return frame;

  const Note& target = notes[*current];
  auto played = played_at(record_, t);
  if (!played || *played == target.pitch) return frame;

  // Start of the run of events that have sounded the current wrong pitch.
  const auto& ev = record_.events;
  auto it = std::upper_bound(ev.begin(), ev.end(), t,
                             [](double v, const PerformanceEvent& e) { return v < static_cast<double>(e.t); });
  std::size_t k = static_cast<std::size_t>(std::distance(ev.begin(), it)) - 1;
  while (k > 0 && pitch_from_fingering(ev[k - 1].fingering) == *played) --k;
  double seg_start = std::max(static_cast<double>(ev[k].t), ticks_to_ms(target.onset, tempo()));

  frame.mask = FeedbackMask{row_of(*played), row_of(target.pitch),
                            arrow_between(row_of(*played), row_of(target.pitch)),
                            seg_start * tempo() / 60000.0, t * tempo() / 60000.0};
  return frame;
}

FeedbackFrame Session::gated_frame(double t, std::optional<FeedbackMask> mask) const {
  FeedbackFrame frame;
  frame.t_ms = t;
  frame.playhead_beats = playhead_beats();
  frame.statuses = gate_status_;
  frame.mask = mask;
  return frame;
}

bool Session::settle_hold(Millis t) {
  if (!hold_start_ || t - *hold_start_ < config_.hold_ms) return false;
  Millis matched_at = *hold_start_ + config_.hold_ms;
  const Note& n = piece_->notes[gate_];
  gate_status_[gate_] = NoteStatus::Correct;
  gate_log_.push_back(GateDecision{gate_, matched_at, n.pitch, true});
  hold_start_.reset();
  ++gate_;
  if (gate_ < piece_->notes.size()) {
    gate_status_[gate_] = NoteStatus::InProgress;
  } else {
    record_.end_t = matched_at;
  }
  return true;
}

std::optional<FeedbackFrame> Session::on_fingering(const PerformanceEvent& event) {
  require_time(event.t);
  if (finished()) throw std::logic_error("session already finished");

  if (is_timed(mode()) && static_cast<double>(event.t) >= timed_end_ms()) {
    advance_clock(event.t);
    return std::nullopt;
  }

  if (mode() == ModeId::B) {
    settle_hold(event.t);
    if (finished()) {
      now_ = event.t;
      return gated_frame(static_cast<double>(*record_.end_t), std::nullopt);
    }
  }

  record_.events.push_back(event);
  now_ = event.t;
  DiatonicPitch played = pitch_from_fingering(event.fingering);

  switch (mode()) {
    case ModeId::A:
      return timed_frame(static_cast<double>(event.t));
    case ModeId::C:
    case ModeId::D:
      last_played_ = played;
      return std::nullopt;
    case ModeId::B:
      break;
  }

  const Note& target = piece_->notes[gate_];
  std::optional<FeedbackMask> mask;
  if (played == target.pitch) {
    if (!hold_start_) hold_start_ = event.t;
    last_played_ = played;
    if (settle_hold(event.t)) return gated_frame(static_cast<double>(event.t), std::nullopt);
  } else {
    hold_start_.reset();
    if (last_played_ != played) gate_log_.push_back(GateDecision{gate_, event.t, played, false});
    last_played_ = played;
    mask = FeedbackMask{row_of(played), row_of(target.pitch), arrow_between(row_of(played), row_of(target.pitch)),
                        to_beats(target.onset), to_beats(target.end())};
  }
  return gated_frame(static_cast<double>(event.t), mask);
}

std::optional<FeedbackFrame> Session::poll(Millis t) {
  if (mode() != ModeId::B) throw InvalidModeError("poll is only valid in mode B");
  require_time(t);
  if (finished()) {
    now_ = t;
    return std::nullopt;
  }
  bool matched = settle_hold(t);
  now_ = t;
  if (!matched) return std::nullopt;
  return gated_frame(static_cast<double>(t), std::nullopt);
}

void Session::finish(Millis t) {
  require_time(t);
  if (finished()) return;
  if (mode() == ModeId::B) settle_hold(t);
  if (finished()) {
    now_ = t;
    return;
  }
  if (is_timed(mode()) && static_cast<double>(t) >= timed_end_ms()) {
    advance_clock(t);
    return;
  }
  now_ = t;
  record_.end_t = t;
}

FeedbackFrame Session::snapshot() const {
  switch (mode()) {
    case ModeId::A:
    case ModeId::C:
      return timed_frame(std::min(static_cast<double>(now_), timed_end_ms()));
    case ModeId::B: {
      std::optional<FeedbackMask> mask;
      if (gate_ < piece_->notes.size() && last_played_ && *last_played_ != piece_->notes[gate_].pitch) {
        const Note& target = piece_->notes[gate_];
        mask = FeedbackMask{row_of(*last_played_), row_of(target.pitch),
                            arrow_between(row_of(*last_played_), row_of(target.pitch)), to_beats(target.onset),
                            to_beats(target.end())};
      }
      return gated_frame(static_cast<double>(now_), mask);
    }
    case ModeId::D:
      break;
  }
  FeedbackFrame frame;
  frame.t_ms = static_cast<double>(now_);
  return frame;
}

ReviewDocument Session::review() const { return build_review(*piece_, record_, tempo()); }

double replay_score(const Piece& piece, const PerformanceRecord& record, SessionConfig config) {
  if (!is_timed(record.mode)) throw InvalidModeError("only mode A and C performances are scored");
  if (!record.finished()) throw std::logic_error("cannot score an unfinished record");
  Session s = Session::start(record.mode, piece, record.tempo, config);
  for (const auto& e : record.events) {
    if (s.finished()) break;
    s.advance_clock(e.t);
    if (!s.finished()) s.on_fingering(e);
  }
  if (!s.finished()) s.finish(std::max(*record.end_t, s.now()));
  return score_performance(compute_coverage(piece, s.record(), s.tempo()));
}

}  // namespace rainbow
