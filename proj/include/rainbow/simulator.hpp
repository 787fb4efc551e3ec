#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rainbow/analytics.hpp"
#include "rainbow/piece_format.hpp"
#include "rainbow/random.hpp"
#include "rainbow/session.hpp"

namespace rainbow {

// A synthetic learner for headless end-to-end runs. It is a test instrument,
// not a cognitive model.

struct LearnerParams {
  double initial_strength = 0.3;
  double talent_spread = 0.1;      // per-subject offset drawn from +/- spread
  double base_error_rate = 0.02;   // slips independent of association strength
  double lambda_correct = 0.02;
  double lambda_feedback = 0.02;
  double latency_mean_ms = 120.0;
  double latency_jitter_ms = 40.0;
  double quit_probability = 0.0;   // per song
  int practice_passes = 4;         // practice runs per song, within the 15-minute budget
  bool skip_when_eligible = true;
};

/// Per-pitch counts gathered from one practice session.
struct PracticeOutcome {
  std::array<int, DiatonicPitch::kCount> correct{};
  std::array<int, DiatonicPitch::kCount> revealed_mistakes{};
};

struct PerformanceResult {
  PerformanceRecord record;
  PracticeOutcome outcome;
  Millis duration_ms = 0;
};

class Learner {
public:
  Learner(LearnerParams params, std::uint64_t seed);
  /// Explicit strengths, for tests.
  Learner(LearnerParams params, std::array<double, DiatonicPitch::kCount> strength, std::uint64_t seed);

  const LearnerParams& params() const { return params_; }
  const std::array<double, DiatonicPitch::kCount>& strength() const { return strength_; }
  Rng& rng() { return rng_; }

  /// Plays one session through the engine. Every note consumes the same
  /// random draws whatever the mode, so matched seeds stay aligned.
  PerformanceResult perform(const Piece& piece, ModeId mode, double tempo, SessionConfig config = {});

  /// s_p += lambda_correct per correct production of p, plus
  /// lambda_feedback per revealed mistake on p in interactive modes; clamped
  /// to [0, 1].
  void practice_update(const PracticeOutcome& outcome, ModeId mode);

private:
  LearnerParams params_;
  std::array<double, DiatonicPitch::kCount> strength_{};
  Rng rng_;
};

/// Free-function forms of the two learner operations.
PerformanceResult perform(Learner& learner, const Piece& piece, ModeId mode, double tempo, SessionConfig config = {});
void practice_update(Learner& learner, const PracticeOutcome& outcome, ModeId mode);

struct CohortConfig {
  std::filesystem::path curriculum;  // manifest path
  int interactive_subjects = 8;
  int static_subjects = 8;
  std::uint64_t master_seed = 0;
  LearnerParams learner;
  SessionConfig session;
};

/// Reads the cohort JSON; the curriculum path is resolved against the
/// config file's directory.
CohortConfig read_cohort_config(const std::filesystem::path& path);

/// Subject seeds depend on (master seed, index within group), so subject k
/// of each group starts from the same talent and draws.
std::uint64_t subject_seed(std::uint64_t master_seed, int index_in_group);

/// Runs one subject through the full curriculum procedure.
SubjectRecord run_subject(const std::vector<Piece>& ordered, const std::string& curriculum_id, Group group,
                          int index_in_group, const CohortConfig& config);

StudyDataset run_cohort(const CohortConfig& config, const Curriculum& curriculum);
StudyDataset run_cohort(const CohortConfig& config);

}  // namespace rainbow
