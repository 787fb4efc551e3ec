#include "rainbow/service.hpp"

#include <algorithm>
#include <cmath>

#include "rainbow/random.hpp"

namespace rainbow {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string_view purpose_name(SessionPurpose p) { return p == SessionPurpose::Practice ? "practice" : "exam"; }

}  // namespace

ServiceContext::ServiceContext(Curriculum curriculum, std::filesystem::path data_dir, std::uint64_t seed,
                               SessionConfig session)
    : curriculum_id_(std::move(curriculum.id)),
      pieces_(arrange_alternating(curriculum.pieces)),
      store_(std::move(data_dir)),
      seed_(seed),
      session_(session) {}

std::vector<std::string> ServiceContext::piece_order() const {
  std::vector<std::string> ids;
  for (const auto& p : pieces_) ids.push_back(p.id);
  return ids;
}

const Piece& ServiceContext::piece(const std::string& id) const {
  for (const auto& p : pieces_) {
    if (p.id == id) return p;
  }
  throw std::invalid_argument("no piece '" + id + "' in the curriculum");
}

Piece ServiceContext::randomized_exam(const std::string& subject_id, std::size_t position) const {
  return randomize_pitches(pieces_.at(position), derive_seed(seed_, fnv1a(subject_id), position));
}

bool ServiceContext::claim(const std::string& subject_id) {
  std::lock_guard lock(mu_);
  return active_.insert(subject_id).second;
}

void ServiceContext::release(const std::string& subject_id) {
  std::lock_guard lock(mu_);
  active_.erase(subject_id);
}

Connection::Connection(ServiceContext& ctx) : ctx_(ctx) {}

Connection::~Connection() {
  if (progress_) ctx_.release(progress_->subject_id());
}

Message Connection::make(MessageKind kind, json payload) { return Message{kind, ++seq_out_, std::move(payload)}; }

Message Connection::error(const std::string& what, std::optional<std::int64_t> ref) {
  json p = {{"message", what}};
  p["ref_seq"] = ref ? json(*ref) : json(nullptr);
  return make(MessageKind::Error, std::move(p));
}

json Connection::hello_payload() const {
  json pieces = json::array();
  for (const auto& p : ctx_.pieces()) pieces.push_back(piece_to_json(p));
  const auto& cfg = ctx_.session_config();
  return {{"protocol_version", kProtocolVersion},
          {"curriculum_id", ctx_.curriculum_id()},
          {"pieces", pieces},
          {"modes", {"A", "B", "C", "D"}},
          {"exam_mode", "C"},
          {"frame_rate", cfg.frame_rate},
          {"hold_ms", cfg.hold_ms},
          {"pass_score", kPassScore},
          {"practice_budget_ms", kPracticeBudgetMs}};
}

std::vector<Message> Connection::open(Millis) { return {make(MessageKind::Hello, hello_payload())}; }

std::vector<Message> Connection::receive(std::string_view text, Millis now) {
  std::vector<Message> out;
  for (const auto& line : split_lines(text)) {
    Message m;
    try {
      m = decode(line);
    } catch (const ProtocolError& e) {
      out.push_back(error(e.what()));
      continue;
    }
    auto r = handle(m, now);
    out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return out;
}

std::vector<Message> Connection::handle(const Message& m, Millis now) {
  std::vector<Message> out;
  if (seq_in_ && m.seq <= *seq_in_) {
    out.push_back(error("seq " + std::to_string(m.seq) + " does not increase", m.seq));
    return out;
  }
  seq_in_ = m.seq;
  if (!client_may_send(m.kind)) {
    out.push_back(error("clients may not send '" + std::string(to_string(m.kind)) + "'", m.seq));
    return out;
  }
  try {
    switch (m.kind) {
      case MessageKind::Hello: on_hello(m, out); break;
      case MessageKind::Start: on_start(m, now, out); break;
      case MessageKind::Fingering: on_fingering(m, now, out); break;
      case MessageKind::Control: on_control(m, now, out); break;
      default: break;
    }
  } catch (const std::exception& e) {
    out.push_back(error(e.what(), m.seq));
  }
  return out;
}

void Connection::on_hello(const Message& m, std::vector<Message>& out) {
  if (progress_) throw std::invalid_argument("hello already received on this connection");
  const auto id = m.payload.at("subject_id").get<std::string>();
  if (!valid_subject_id(id)) throw std::invalid_argument("invalid subject id '" + id + "'");
  std::optional<Group> group;
  if (auto g = m.payload.find("group"); g != m.payload.end() && !g->is_null()) {
    group = group_from_string(g->get<std::string>());
  }
  if (!ctx_.claim(id)) throw std::invalid_argument("subject '" + id + "' is already connected");
  try {
    progress_ = SubjectProgress::replay(id, ctx_.piece_order(), ctx_.store().events(id));
    if (group) {
      if (!progress_->group()) {
        log({{"type", "subject"}, {"group", to_string(*group)}});
      } else if (*progress_->group() != *group) {
        throw std::invalid_argument("subject '" + id + "' is in the " + std::string(to_string(*progress_->group())) +
                                    " group");
      }
    }
  } catch (...) {
    progress_.reset();
    ctx_.release(id);
    throw;
  }
  json p = hello_payload();
  p["subject"] = progress_->to_json();
  out.push_back(make(MessageKind::Hello, std::move(p)));
}

void Connection::on_start(const Message& m, Millis now, std::vector<Message>& out) {
  if (!progress_) throw std::invalid_argument("send hello first");
  if (live_) throw std::invalid_argument("a session is already running");
  if (progress_->phase() == SongPhase::Done) throw std::invalid_argument("the curriculum is finished");

  const auto purpose_s = m.payload.at("purpose").get<std::string>();
  const std::string song = ctx_.piece_order().at(progress_->position());
  const Piece& piece = ctx_.piece(song);

  if (purpose_s == "practice") {
    if (progress_->phase() != SongPhase::AfterPreExam) throw std::invalid_argument("take the pre-exam before practising");
    const ModeId mode = mode_from_string(m.payload.at("mode").get<std::string>());
    if (auto g = progress_->group()) {
      auto allowed = allowed_modes(*g);
      if (std::find(allowed.begin(), allowed.end(), mode) == allowed.end()) {
        throw std::invalid_argument("mode " + std::string(1, to_char(mode)) + " is not open to the " +
                                    std::string(to_string(*g)) + " group");
      }
    }
    const Millis left = kPracticeBudgetMs - progress_->practice_ms();
    if (left <= 0) throw std::invalid_argument("the practice budget for this song is used up");
    const double tempo = m.payload.value("tempo", piece.default_tempo);
    if (!(tempo > 0.0) || !std::isfinite(tempo)) throw std::invalid_argument("tempo must be positive");
    live_.emplace(Live{Session::start(mode, piece, tempo, ctx_.session_config()), SessionPurpose::Practice,
                       ExamKind::Pre, now, std::nullopt, left, 0});
  } else if (purpose_s == "exam") {
    const bool pre = progress_->phase() == SongPhase::NeedPreExam;
    Piece exam = pre ? piece : ctx_.randomized_exam(progress_->subject_id(), progress_->position());
    const double tempo = exam.default_tempo;
    live_.emplace(Live{Session::start(kExamMode, std::move(exam), tempo, ctx_.session_config()),
                       SessionPurpose::Exam, pre ? ExamKind::Pre : ExamKind::Randomized, now, std::nullopt, 0, 0});
  } else {
    throw std::invalid_argument("purpose must be 'practice' or 'exam'");
  }

  const Session& s = live_->session;
  json p = {{"purpose", purpose_name(live_->purpose)},
            {"mode", std::string(1, to_char(s.mode()))},
            {"tempo", s.tempo()},
            {"song_id", song},
            {"piece", piece_to_json(s.piece())},
            {"frame_rate", ctx_.session_config().frame_rate}};
  p["metronome_period_ms"] = is_timed(s.mode()) ? json(s.metronome_period_ms()) : json(nullptr);
  p["exam_kind"] = live_->purpose == SessionPurpose::Exam ? json(to_string(live_->exam_kind)) : json(nullptr);
  p["budget_ms"] = live_->purpose == SessionPurpose::Practice ? json(live_->budget_ms) : json(nullptr);
  out.push_back(make(MessageKind::Start, std::move(p)));
  advance(0, out);
}

Millis Connection::session_time(Millis now) const { return std::max<Millis>(0, now - live_->started_at); }

void Connection::on_fingering(const Message& m, Millis now, std::vector<Message>& out) {
  if (!live_) throw std::invalid_argument("no session is running");
  const Millis client_t = m.payload.at("t").get<Millis>();
  const FingeringState fingering = FingeringState::from_string(m.payload.at("holes").get<std::string>());
  const Millis server_t = session_time(now);
  if (!live_->client_offset) live_->client_offset = server_t - client_t;
  Millis t = std::min(client_t + *live_->client_offset, server_t);
  t = std::max(t, live_->session.now());

  Session& s = live_->session;
  const bool over_budget = live_->purpose == SessionPurpose::Practice && t >= live_->budget_ms;
  if (over_budget || (is_timed(s.mode()) && static_cast<double>(t) >= s.timed_end_ms())) {
    advance(t, out);
    return;
  }
  if (is_timed(s.mode())) emit_clock(s.advance_clock(t), out);
  if (auto f = s.on_fingering({t, fingering})) out.push_back(make(MessageKind::Frame, frame_to_json(*f)));
  emit_gate(out);
  if (s.finished()) finalize(out);
}

void Connection::on_control(const Message& m, Millis now, std::vector<Message>& out) {
  if (!progress_) throw std::invalid_argument("send hello first");
  const auto action = m.payload.at("action").get<std::string>();
  if (action == "stop") {
    if (!live_) throw std::invalid_argument("no session is running");
    const Millis t = std::max(session_time(now), live_->session.now());
    advance(t, out);
    if (live_) {
      live_->session.finish(t);
      emit_gate(out);
      finalize(out);
    }
  } else if (action == "skip" || action == "quit") {
    if (live_) throw std::invalid_argument("stop the running session first");
    log({{"type", action}});
  } else {
    throw std::invalid_argument("unknown control action '" + action + "'");
  }
  out.push_back(make(MessageKind::Control, {{"action", action}, {"subject", progress_->to_json()}}));
}

std::vector<Message> Connection::tick(Millis now) {
  std::vector<Message> out;
  if (live_) {
    try {
      advance(session_time(now), out);
    } catch (const std::exception& e) {
      out.push_back(error(e.what()));
    }
  }
  return out;
}

void Connection::emit_clock(const ClockUpdate& u, std::vector<Message>& out) {
  if (u.frames.empty() && u.clicks.empty()) return;
  json clicks = json::array();
  for (const auto& c : u.clicks) clicks.push_back(click_to_json(c));
  for (std::size_t i = 0; i < u.frames.size(); ++i) {
    json p = frame_to_json(u.frames[i]);
    p["clicks"] = i + 1 == u.frames.size() ? clicks : json::array();
    out.push_back(make(MessageKind::Frame, std::move(p)));
  }
  if (u.frames.empty()) {
    json p = frame_to_json(live_->session.snapshot());
    p["clicks"] = clicks;
    out.push_back(make(MessageKind::Frame, std::move(p)));
  }
}

void Connection::emit_gate(std::vector<Message>& out) {
  const Session& s = live_->session;
  const auto& log = s.gate_log();
  for (; live_->gate_seen < log.size(); ++live_->gate_seen) {
    const GateDecision& d = log[live_->gate_seen];
    json p = gate_decision_to_json(d);
    p["target"] = std::string(1, s.piece().notes.at(d.note_index).pitch.letter());
    out.push_back(make(MessageKind::NoteResult, std::move(p)));
  }
}

void Connection::advance(Millis t, std::vector<Message>& out) {
  Session& s = live_->session;
  if (s.finished()) {
    finalize(out);
    return;
  }
  const bool over_budget = live_->purpose == SessionPurpose::Practice && t >= live_->budget_ms;
  if (over_budget) t = live_->budget_ms;
  t = std::max(t, s.now());
  switch (s.mode()) {
    case ModeId::A:
    case ModeId::C:
      emit_clock(s.advance_clock(t), out);
      break;
    case ModeId::B:
      if (auto f = s.poll(t)) out.push_back(make(MessageKind::Frame, frame_to_json(*f)));
      emit_gate(out);
      break;
    case ModeId::D:
      break;
  }
  if (over_budget && !s.finished()) s.finish(t);
  if (s.finished()) finalize(out);
}

void Connection::finalize(std::vector<Message>& out) {
  const Session& s = live_->session;
  const PerformanceRecord& record = s.record();
  const std::string song = ctx_.piece_order().at(progress_->position());
  const std::string session_name = ctx_.store().save_session(progress_->subject_id(), record);

  std::optional<double> score;
  if (is_timed(s.mode())) score = score_performance(compute_coverage(s.piece(), record, s.tempo()));

  if (live_->purpose == SessionPurpose::Exam) {
    log({{"type", "exam"},
         {"kind", to_string(live_->exam_kind)},
         {"piece_id", song},
         {"score", *score},
         {"session", session_name}});
    const CurriculumState v = progress_->view();
    json p = {{"piece_id", song}, {"kind", to_string(live_->exam_kind)}, {"score", *score}};
    p["exam_index"] = v.history().empty() ? 0 : v.history().back().exam_index;
    p["subject"] = progress_->to_json();
    out.push_back(make(MessageKind::ExamResult, std::move(p)));
  } else {
    log({{"type", "practice"},
         {"piece_id", song},
         {"mode", std::string(1, to_char(s.mode()))},
         {"tempo", s.tempo()},
         {"duration_ms", *record.end_t},
         {"session", session_name}});
  }

  json review = review_to_json(s.review());
  review["purpose"] = purpose_name(live_->purpose);
  review["mode"] = std::string(1, to_char(s.mode()));
  review["score"] = score ? json(*score) : json(nullptr);
  review["session"] = session_name;
  out.push_back(make(MessageKind::Review, std::move(review)));
  live_.reset();
}

void Connection::log(const json& event) {
  SubjectProgress next = *progress_;
  next.apply(event);  // reject before anything is written
  ctx_.store().append(progress_->subject_id(), event);
  progress_ = std::move(next);
}

void Connection::close(Millis now) {
  if (live_ && progress_) {
    const Session& s = live_->session;
    const std::string song = ctx_.piece_order().at(progress_->position());
    const std::string name = ctx_.store().save_session(progress_->subject_id(), s.record());
    json e = {{"type", "interrupted"},
              {"purpose", purpose_name(live_->purpose)},
              {"piece_id", song},
              {"mode", std::string(1, to_char(s.mode()))},
              {"at_ms", session_time(now)},
              {"session", name}};
    e["exam_kind"] = live_->purpose == SessionPurpose::Exam ? json(to_string(live_->exam_kind)) : json(nullptr);
    log(e);
  }
  live_.reset();
  if (progress_) ctx_.release(progress_->subject_id());
  progress_.reset();
}

}  // namespace rainbow
