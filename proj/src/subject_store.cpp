#include "rainbow/subject_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rainbow {

using nlohmann::json;
namespace fs = std::filesystem;

bool valid_subject_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
}

SubjectStore::SubjectStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path SubjectStore::dir(const std::string& subject_id) const {
  if (!valid_subject_id(subject_id)) throw std::invalid_argument("invalid subject id '" + subject_id + "'");
  return root_ / subject_id;
}

std::vector<json> SubjectStore::events(const std::string& subject_id) const {
  std::lock_guard lock(mu_);
  std::vector<json> out;
  std::ifstream in(dir(subject_id) / "events.jsonl");
  if (!in) return out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error(subject_id + "/events.jsonl:" + std::to_string(lineno) + ": corrupt event");
    }
    out.push_back(std::move(j));
  }
  return out;
}

void SubjectStore::append(const std::string& subject_id, const json& event) {
  std::lock_guard lock(mu_);
  fs::path d = dir(subject_id);
  fs::create_directories(d);
  std::ofstream out(d / "events.jsonl", std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + (d / "events.jsonl").string());
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + (d / "events.jsonl").string());
}

std::string SubjectStore::save_session(const std::string& subject_id, const PerformanceRecord& record) {
  std::lock_guard lock(mu_);
  fs::path d = dir(subject_id) / "sessions";
  fs::create_directories(d);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(d)) {
    if (e.path().extension() == ".jsonl") ++n;
  }
  char name[32];
  std::snprintf(name, sizeof name, "%06zu.jsonl", n + 1);
  std::ofstream out(d / name);
  if (!out) throw std::runtime_error("cannot write " + (d / name).string());
  write_record(out, record);
  return std::string("sessions/") + name;
}

PerformanceRecord SubjectStore::load_session(const std::string& subject_id, const std::string& name) const {
  std::lock_guard lock(mu_);
  if (name.find("..") != std::string::npos) throw std::invalid_argument("bad session name '" + name + "'");
  std::ifstream in(dir(subject_id) / name);
  if (!in) throw std::runtime_error("cannot open session " + name);
  return read_record(in);
}

SubjectProgress::SubjectProgress(std::string subject_id, std::vector<std::string> piece_order)
    : id_(std::move(subject_id)), state_(std::move(piece_order)) {}

SubjectProgress SubjectProgress::replay(std::string subject_id, std::vector<std::string> piece_order,
                                        const std::vector<json>& events) {
  SubjectProgress p(std::move(subject_id), std::move(piece_order));
  for (const auto& e : events) p.apply(e);
  return p;
}

SongPhase SubjectProgress::phase() const {
  if (!state_.running()) return SongPhase::Done;
  return pending_ ? SongPhase::AfterPreExam : SongPhase::NeedPreExam;
}

CurriculumState SubjectProgress::view() const {
  CurriculumState v = state_;
  if (pending_) v.record_exam(ExamKind::Pre, pending_->pre_score);
  return v;
}

std::optional<double> SubjectProgress::pre_score() const {
  if (!pending_) return std::nullopt;
  return pending_->pre_score;
}

void SubjectProgress::commit() {
  state_ = step_song(std::move(state_), *pending_);
  pending_.reset();
  practice_ms_ = 0;
}

void SubjectProgress::apply(const json& event) {
  const std::string type = event.at("type").get<std::string>();
  auto current_piece = [&] {
    if (!state_.running()) throw std::invalid_argument(type + " event after the curriculum ended");
    return state_.piece_order().at(state_.position());
  };
  auto require_piece = [&] {
    const auto expected = current_piece();
    if (event.at("piece_id").get<std::string>() != expected) {
      throw std::invalid_argument(type + " event for a piece other than the current song '" + expected + "'");
    }
  };

  if (type == "subject") {
    if (event.contains("group") && !event["group"].is_null()) group_ = group_from_string(event["group"].get<std::string>());
    return;
  }
  if (type == "interrupted") {
    interrupted_ = event;
    return;
  }
  interrupted_.reset();

  if (type == "exam") {
    require_piece();
    const double score = event.at("score").get<double>();
    const ExamKind kind = exam_kind_from_string(event.at("kind").get<std::string>());
    if (kind == ExamKind::Pre) {
      if (pending_) throw std::invalid_argument("pre-exam already taken for this song");
      pending_ = SongStep{score, false, false, std::nullopt};
      if (view().status() == CurriculumStatus::Achieved) commit();
    } else {
      if (!pending_) throw std::invalid_argument("randomized exam before the pre-exam");
      pending_->exam_score = score;
      commit();
    }
  } else if (type == "practice") {
    require_piece();
    practice_ms_ += event.at("duration_ms").get<Millis>();
  } else if (type == "skip") {
    current_piece();
    if (!pending_ || pending_->pre_score < kPassScore) throw std::invalid_argument("skip needs a passed pre-exam");
    pending_->skip = true;
    commit();
  } else if (type == "quit") {
    current_piece();
    if (pending_) {
      pending_->quit = true;
      commit();
    } else {
      state_.quit();
    }
  } else {
    throw std::invalid_argument("unknown event type '" + type + "'");
  }
}

json SubjectProgress::to_json() const {
  const CurriculumState v = view();
  json history = json::array();
  for (const auto& r : v.history()) history.push_back(exam_to_json(r));
  const char* phase_name = "done";
  switch (phase()) {
    case SongPhase::NeedPreExam: phase_name = "pre-exam"; break;
    case SongPhase::AfterPreExam: phase_name = "after-pre-exam"; break;
    case SongPhase::Done: break;
  }
  json j = {{"subject_id", id_},
            {"group", group_ ? json(to_string(*group_)) : json(nullptr)},
            {"status", to_string(v.status())},
            {"position", v.position()},
            {"current_piece", state_.running() ? json(state_.piece_order().at(state_.position())) : json(nullptr)},
            {"phase", phase_name},
            {"consecutive_passes", v.consecutive_pass_count()},
            {"practice_ms", practice_ms_},
            {"practice_budget_ms", kPracticeBudgetMs},
            {"history", history},
            {"interrupted", interrupted_ ? *interrupted_ : json(nullptr)}};
  if (v.status() == CurriculumStatus::Achieved) j["efficiency"] = learning_efficiency(v);
  return j;
}

}  // namespace rainbow
