#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rainbow/curriculum.hpp"
#include "rainbow/stats.hpp"

namespace rainbow {

/// Learning curves have one slot per possible exam: two per song of the
/// 16-piece curriculum.
inline constexpr std::size_t kSeriesLength = 32;

enum class Group : std::uint8_t { Interactive, Static };

std::string_view to_string(Group g);
Group group_from_string(std::string_view s);
/// Interactive -> {A, B}; Static -> {C, D}.
std::vector<ModeId> allowed_modes(Group g);

struct SubjectSeries {
  std::string subject_id;
  Group group = Group::Interactive;
  std::vector<double> scores;  // kSeriesLength entries after fill rules
  std::size_t raw_length = 0;
};

/// Pads an exam history to kSeriesLength. Achieved: pad with 1.0. Quit or
/// exhausted: repeat the last score (0 if there is none). Running: error.
std::vector<double> fill_series(std::span<const double> history, CurriculumStatus status,
                                std::size_t length = kSeriesLength);

struct GroupCurves {
  std::vector<double> interactive;
  std::vector<double> static_;
};

GroupCurves group_curves(std::span<const SubjectSeries> series);

/// Prefix sums of (interactive mean - static mean).
std::vector<double> accumulated_difference(const GroupCurves& curves);

/// At each index k, t-test between groups on each subject's accumulated
/// score through k.
std::vector<TTestResult> per_index_t_tests(std::span<const SubjectSeries> series,
                                           TTestKind kind = TTestKind::Pooled);
std::vector<double> per_index_p_values(std::span<const SubjectSeries> series, TTestKind kind = TTestKind::Pooled);

enum class TalentAxis { FirstExam, FirstTwoExams };
enum class OverallAxis { FullCurriculum, FirstHalf };

std::string_view to_string(TalentAxis a);
std::string_view to_string(OverallAxis a);

struct ScatterPoint {
  std::string subject_id;
  Group group = Group::Interactive;
  double x = 0.0;
  double y = 0.0;
};

std::vector<ScatterPoint> talent_scatter(std::span<const SubjectSeries> series, TalentAxis x_axis,
                                         OverallAxis y_axis);

// ---------------------------------------------------------------------------
// Study datasets (simulator output, analyzer input).

struct SubjectRecord {
  std::string subject_id;
  Group group = Group::Interactive;
  CurriculumStatus status = CurriculumStatus::Running;
  std::vector<ExamResult> history;
  /// Null for subjects that quit; 1/kSeriesLength floor for exhausted ones.
  std::optional<double> efficiency;

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

struct StudyDataset {
  std::string curriculum_id;
  std::uint64_t master_seed = 0;
  std::vector<SubjectRecord> subjects;

  friend bool operator==(const StudyDataset&, const StudyDataset&) = default;
};

SubjectSeries series_of(const SubjectRecord& subject);

nlohmann::json exam_to_json(const ExamResult& r);
ExamResult exam_from_json(const nlohmann::json& j);

struct EfficiencyComparison {
  double interactive_mean = 0.0;
  double static_mean = 0.0;
  double improvement = 0.0;  // interactive / static - 1
  std::size_t interactive_n = 0;
  std::size_t static_n = 0;
  std::optional<TTestResult> test;  // needs >= 2 subjects per group
};

EfficiencyComparison compare_efficiency(const StudyDataset& data, TTestKind kind = TTestKind::Pooled);

struct GroupStats {
  GroupCurves curves;
  std::vector<double> accumulated;
  std::vector<double> p_values;
  EfficiencyComparison efficiency;
};

GroupStats compute_group_stats(const StudyDataset& data, TTestKind kind = TTestKind::Pooled);

std::string dataset_to_json(const StudyDataset& data);
StudyDataset dataset_from_json(std::string_view text);
void write_dataset(const std::filesystem::path& path, const StudyDataset& data);
StudyDataset read_dataset(const std::filesystem::path& path);

struct AnalysisOutputs {
  std::filesystem::path curves;
  std::filesystem::path accdiff;
  std::filesystem::path scatter;
  std::filesystem::path efficiency;
};

/// Writes curves.csv, accdiff.csv, scatter.csv and efficiency.csv into dir.
AnalysisOutputs write_analysis(const StudyDataset& data, const std::filesystem::path& dir,
                               TTestKind kind = TTestKind::Pooled);

}  // namespace rainbow
