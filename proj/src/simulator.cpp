#include "rainbow/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

namespace rainbow {
namespace {

constexpr std::uint64_t kTalentStream = 1;
constexpr std::uint64_t kExamStream = 2;

struct NoteIntent {
  DiatonicPitch played;
  double latency_ms;
  bool correct;
};

std::optional<std::size_t> in_progress_note(const FeedbackFrame& f) {
  auto it = std::find(f.statuses.begin(), f.statuses.end(), NoteStatus::InProgress);
  if (it == f.statuses.end()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(f.statuses.begin(), it));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double exam_score(Learner& learner, const Piece& piece, const SessionConfig& session) {
  auto result = learner.perform(piece, kExamMode, piece.default_tempo, session);
  return score_performance(compute_coverage(piece, result.record, piece.default_tempo));
}

std::string subject_id(Group g, int index) {
  std::ostringstream ss;
  ss << (g == Group::Interactive ? 'I' : 'S');
  if (index + 1 < 10) ss << '0';
  ss << index + 1;
  return ss.str();
}

}  // namespace

Learner::Learner(LearnerParams params, std::uint64_t seed) : params_(params), rng_(seed) {
  Rng talent(derive_seed(seed, kTalentStream, 0));
  const double offset = params_.talent_spread * (2.0 * talent.uniform() - 1.0);
  strength_.fill(clamp01(params_.initial_strength + offset));
}

Learner::Learner(LearnerParams params, std::array<double, DiatonicPitch::kCount> strength, std::uint64_t seed)
    : params_(params), strength_(strength), rng_(seed) {
  for (double& s : strength_) s = clamp01(s);
}

PerformanceResult Learner::perform(const Piece& piece, ModeId mode, double tempo, SessionConfig config) {
  std::vector<NoteIntent> intents;
  intents.reserve(piece.notes.size());
  for (const Note& n : piece.notes) {
    const double u_correct = rng_.uniform();
    const double u_direction = rng_.uniform();
    const double u_latency = rng_.uniform();
    const double p_ok = strength_[static_cast<std::size_t>(n.pitch.degree())] * (1.0 - params_.base_error_rate);
    const bool correct = u_correct < p_ok;
    int wrong = n.pitch.degree() + (u_direction < 0.5 ? -1 : 1);
    if (wrong < 0 || wrong >= DiatonicPitch::kCount) wrong = 2 * n.pitch.degree() - wrong;
    const double latency =
        std::max(0.0, params_.latency_mean_ms + params_.latency_jitter_ms * (2.0 * u_latency - 1.0));
    intents.push_back(NoteIntent{correct ? n.pitch : DiatonicPitch(wrong), latency, correct});
  }

  Session session = Session::start(mode, piece, tempo, config);
  std::vector<bool> masked(piece.notes.size(), false);
  // Only the frame answering a fingering counts: clock frames can still show
  // the previous note's pitch against the next target.
  auto note_mask = [&](const std::optional<FeedbackFrame>& f) {
    if (!f || !f->mask) return;
    if (auto k = in_progress_note(*f)) masked[*k] = true;
  };

  if (mode == ModeId::B) {
    Millis t = 0;
    for (std::size_t i = 0; i < piece.notes.size(); ++i) {
      const auto& in = intents[i];
      t += std::llround(in.latency_ms);
      note_mask(session.on_fingering({t, fingering_for_pitch(in.played)}));
      if (!in.correct) {
        // Follow the arrows back to the written note.
        t += std::llround(in.latency_ms);
        session.on_fingering({t, fingering_for_pitch(piece.notes[i].pitch)});
      }
      t += config.hold_ms;
      session.poll(t);
    }
    if (!session.finished()) session.finish(t);
  } else {
    for (std::size_t i = 0; i < piece.notes.size(); ++i) {
      Millis t = std::llround(ticks_to_ms(piece.notes[i].onset, tempo) + intents[i].latency_ms);
      t = std::max(t, session.now());
      if (session.finished()) break;
      if (is_timed(mode)) {
        session.advance_clock(t);
        if (session.finished()) break;
      }
      note_mask(session.on_fingering({t, fingering_for_pitch(intents[i].played)}));
    }
    const auto end = std::max(static_cast<Millis>(std::ceil(session.timed_end_ms())), session.now());
    if (is_timed(mode)) {
      session.advance_clock(end);
    } else {
      session.finish(end);
    }
  }

  PerformanceResult result;
  result.record = session.record();
  result.duration_ms = result.record.end_t.value_or(session.now());
  for (std::size_t i = 0; i < piece.notes.size(); ++i) {
    auto p = static_cast<std::size_t>(piece.notes[i].pitch.degree());
    if (intents[i].correct) {
      ++result.outcome.correct[p];
    } else if (masked[i]) {
      ++result.outcome.revealed_mistakes[p];
    }
  }
  return result;
}

void Learner::practice_update(const PracticeOutcome& outcome, ModeId mode) {
  for (std::size_t p = 0; p < strength_.size(); ++p) {
    double s = strength_[p] + params_.lambda_correct * outcome.correct[p];
    if (is_interactive(mode)) s += params_.lambda_feedback * outcome.revealed_mistakes[p];
    strength_[p] = clamp01(s);
  }
}

PerformanceResult perform(Learner& learner, const Piece& piece, ModeId mode, double tempo, SessionConfig config) {
  return learner.perform(piece, mode, tempo, config);
}

void practice_update(Learner& learner, const PracticeOutcome& outcome, ModeId mode) {
  learner.practice_update(outcome, mode);
}

CohortConfig read_cohort_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  CohortConfig c;
  try {
    c.curriculum = path.parent_path() / j.at("curriculum").get<std::string>();
    const auto& groups = j.at("groups");
    c.interactive_subjects = groups.at("interactive").get<int>();
    c.static_subjects = groups.at("static").get<int>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("learner")) {
      const auto& l = j["learner"];
      LearnerParams& p = c.learner;
      p.initial_strength = l.value("initial_strength", p.initial_strength);
      p.talent_spread = l.value("talent_spread", p.talent_spread);
      p.base_error_rate = l.value("base_error_rate", p.base_error_rate);
      p.lambda_correct = l.value("lambda_correct", p.lambda_correct);
      p.lambda_feedback = l.value("lambda_feedback", p.lambda_feedback);
      p.latency_mean_ms = l.value("latency_mean_ms", p.latency_mean_ms);
      p.latency_jitter_ms = l.value("latency_jitter_ms", p.latency_jitter_ms);
      p.quit_probability = l.value("quit_probability", p.quit_probability);
      p.practice_passes = l.value("practice_passes", p.practice_passes);
      p.skip_when_eligible = l.value("skip_when_eligible", p.skip_when_eligible);
    }
    c.session.hold_ms = j.value("hold_ms", c.session.hold_ms);
    c.session.frame_rate = j.value("frame_rate", c.session.frame_rate);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": malformed cohort config: " + e.what());
  }

  const auto& p = c.learner;
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (c.interactive_subjects < 0 || c.static_subjects < 0) throw std::runtime_error("group sizes must be >= 0");
  if (!prob(p.initial_strength) || !prob(p.base_error_rate) || !prob(p.quit_probability) || p.talent_spread < 0.0 ||
      p.lambda_correct < 0.0 || p.lambda_feedback < 0.0 || p.latency_mean_ms < 0.0 || p.latency_jitter_ms < 0.0 ||
      p.practice_passes < 0) {
    throw std::runtime_error(path.string() + ": learner parameters out of range");
  }
  return c;
}

std::uint64_t subject_seed(std::uint64_t master_seed, int index_in_group) {
  return derive_seed(master_seed, 0, static_cast<std::uint64_t>(index_in_group));
}

SubjectRecord run_subject(const std::vector<Piece>& ordered, const std::string& curriculum_id, Group group,
                          int index_in_group, const CohortConfig& config) {
  (void)curriculum_id;
  const std::uint64_t seed = subject_seed(config.master_seed, index_in_group);
  Learner learner(config.learner, seed);
  const auto modes = allowed_modes(group);

  std::vector<std::string> ids;
  for (const auto& p : ordered) ids.push_back(p.id);
  CurriculumState state(ids);

  while (state.running()) {
    const std::size_t pos = state.position();
    const Piece& piece = ordered[pos];
    SongStep step;
    step.quit = learner.rng().bernoulli(config.learner.quit_probability);
    step.pre_score = exam_score(learner, piece, config.session);
    step.skip = config.learner.skip_when_eligible && step.pre_score >= kPassScore;

    const bool achieves_now =
        step.pre_score >= kPassScore && state.consecutive_pass_count() + 1 >= kPassesToAchieve;
    if (!achieves_now && !step.quit && !step.skip) {
      Millis practiced = 0;
      for (int k = 0; k < config.learner.practice_passes && practice_budget(practiced); ++k) {
        ModeId mode = modes[static_cast<std::size_t>(k) % modes.size()];
        auto result = learner.perform(piece, mode, piece.default_tempo, config.session);
        practiced += result.duration_ms;
        learner.practice_update(result.outcome, mode);
      }
      Piece exam = randomize_pitches(piece, derive_seed(seed, kExamStream, pos));
      step.exam_score = exam_score(learner, exam, config.session);
    }
    state = step_song(std::move(state), step);
  }

  SubjectRecord rec;
  rec.subject_id = subject_id(group, index_in_group);
  rec.group = group;
  rec.status = state.status();
  rec.history = state.history();
  if (state.status() == CurriculumStatus::Achieved) {
    rec.efficiency = learning_efficiency(state);
  } else if (state.status() == CurriculumStatus::Exhausted) {
    rec.efficiency = 1.0 / static_cast<double>(kSeriesLength);
  }
  return rec;
}

StudyDataset run_cohort(const CohortConfig& config, const Curriculum& curriculum) {
  const std::vector<Piece> ordered = arrange_alternating(curriculum.pieces);
  if (2 * ordered.size() > kSeriesLength) {
    throw std::invalid_argument("curriculum has more songs than the learning curve can hold");
  }

  std::vector<std::future<SubjectRecord>> jobs;
  auto launch = [&](Group g, int count) {
    for (int i = 0; i < count; ++i) {
      jobs.push_back(std::async(std::launch::async, [&ordered, &curriculum, &config, g, i] {
        return run_subject(ordered, curriculum.id, g, i, config);
      }));
    }
  };
  launch(Group::Interactive, config.interactive_subjects);
  launch(Group::Static, config.static_subjects);

  StudyDataset data;
  data.curriculum_id = curriculum.id;
  data.master_seed = config.master_seed;
  for (auto& j : jobs) data.subjects.push_back(j.get());
  return data;
}

StudyDataset run_cohort(const CohortConfig& config) { return run_cohort(config, load_curriculum(config.curriculum)); }

}  // namespace rainbow
