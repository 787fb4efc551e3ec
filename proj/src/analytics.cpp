#include "rainbow/analytics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rainbow/number_format.hpp"

namespace rainbow {

using nlohmann::json;

std::string_view to_string(Group g) { return g == Group::Interactive ? "interactive" : "static"; }

Group group_from_string(std::string_view s) {
  if (s == "interactive") return Group::Interactive;
  if (s == "static") return Group::Static;
  throw std::invalid_argument("unknown group '" + std::string(s) + "'");
}

std::vector<ModeId> allowed_modes(Group g) {
  if (g == Group::Interactive) return {ModeId::A, ModeId::B};
  return {ModeId::C, ModeId::D};
}

std::vector<double> fill_series(std::span<const double> history, CurriculumStatus status, std::size_t length) {
  if (status == CurriculumStatus::Running) throw std::invalid_argument("cannot fill the series of an unfinished subject");
  if (history.size() > length) throw std::invalid_argument("exam history longer than the series");
  std::vector<double> out(history.begin(), history.end());
  double pad = 1.0;
  if (status != CurriculumStatus::Achieved) pad = history.empty() ? 0.0 : history.back();
  out.resize(length, pad);
  return out;
}

namespace {

std::vector<const SubjectSeries*> members(std::span<const SubjectSeries> series, Group g) {
  std::vector<const SubjectSeries*> out;
  for (const auto& s : series) {
    if (s.group == g) out.push_back(&s);
  }
  return out;
}

std::vector<double> mean_curve(const std::vector<const SubjectSeries*>& group, std::string_view name) {
  if (group.empty()) throw std::invalid_argument("group '" + std::string(name) + "' has no subjects");
  const std::size_t len = group.front()->scores.size();
  std::vector<double> m(len, 0.0);
  for (const auto* s : group) {
    if (s->scores.size() != len) throw std::invalid_argument("series lengths differ");
    for (std::size_t i = 0; i < len; ++i) m[i] += s->scores[i];
  }
  for (double& v : m) v /= static_cast<double>(group.size());
  return m;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

json exam_to_json(const ExamResult& r) {
  return {{"piece_id", r.piece_id}, {"kind", to_string(r.kind)}, {"score", r.score}, {"exam_index", r.exam_index}};
}

ExamResult exam_from_json(const json& j) {
  return ExamResult{j.at("piece_id").get<std::string>(), exam_kind_from_string(j.at("kind").get<std::string>()),
                    j.at("score").get<double>(), j.at("exam_index").get<int>()};
}

GroupCurves group_curves(std::span<const SubjectSeries> series) {
  return GroupCurves{mean_curve(members(series, Group::Interactive), "interactive"),
                     mean_curve(members(series, Group::Static), "static")};
}

std::vector<double> accumulated_difference(const GroupCurves& curves) {
  if (curves.interactive.size() != curves.static_.size()) throw std::invalid_argument("curve lengths differ");
  std::vector<double> acc(curves.interactive.size());
  double running = 0.0;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    running += curves.interactive[i] - curves.static_[i];
    acc[i] = running;
  }
  return acc;
}

std::vector<TTestResult> per_index_t_tests(std::span<const SubjectSeries> series, TTestKind kind) {
  auto gi = members(series, Group::Interactive);
  auto gs = members(series, Group::Static);
  if (gi.size() < 2 || gs.size() < 2) throw std::invalid_argument("per-index tests need two subjects per group");
  const std::size_t len = gi.front()->scores.size();
  std::vector<double> acc_i(gi.size(), 0.0), acc_s(gs.size(), 0.0);
  std::vector<TTestResult> out;
  out.reserve(len);
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t j = 0; j < gi.size(); ++j) acc_i[j] += gi[j]->scores.at(k);
    for (std::size_t j = 0; j < gs.size(); ++j) acc_s[j] += gs[j]->scores.at(k);
    out.push_back(t_test_independent(acc_i, acc_s, kind));
  }
  return out;
}

std::vector<double> per_index_p_values(std::span<const SubjectSeries> series, TTestKind kind) {
  std::vector<double> p;
  for (const auto& r : per_index_t_tests(series, kind)) p.push_back(r.p);
  return p;
}

std::string_view to_string(TalentAxis a) { return a == TalentAxis::FirstExam ? "exam1" : "exam1+2"; }
std::string_view to_string(OverallAxis a) { return a == OverallAxis::FullCurriculum ? "full" : "first_half"; }

std::vector<ScatterPoint> talent_scatter(std::span<const SubjectSeries> series, TalentAxis x_axis,
                                         OverallAxis y_axis) {
  std::vector<ScatterPoint> out;
  for (const auto& s : series) {
    if (s.scores.size() < 2) throw std::invalid_argument("series too short for a talent scatter");
    double x = s.scores[0] + (x_axis == TalentAxis::FirstTwoExams ? s.scores[1] : 0.0);
    std::size_t upto = y_axis == OverallAxis::FullCurriculum ? s.scores.size() : s.scores.size() / 2;
    double y = std::accumulate(s.scores.begin(), s.scores.begin() + static_cast<std::ptrdiff_t>(upto), 0.0);
    out.push_back(ScatterPoint{s.subject_id, s.group, x, y});
  }
  return out;
}

SubjectSeries series_of(const SubjectRecord& subject) {
  std::vector<double> raw;
  for (const auto& r : subject.history) raw.push_back(r.score);
  return SubjectSeries{subject.subject_id, subject.group, fill_series(raw, subject.status), raw.size()};
}

EfficiencyComparison compare_efficiency(const StudyDataset& data, TTestKind kind) {
  std::vector<double> ei, es;
  for (const auto& s : data.subjects) {
    if (!s.efficiency) continue;
    (s.group == Group::Interactive ? ei : es).push_back(*s.efficiency);
  }
  EfficiencyComparison c;
  c.interactive_n = ei.size();
  c.static_n = es.size();
  if (!ei.empty()) c.interactive_mean = mean(ei);
  if (!es.empty()) c.static_mean = mean(es);
  if (c.static_mean > 0.0) c.improvement = c.interactive_mean / c.static_mean - 1.0;
  if (ei.size() >= 2 && es.size() >= 2) c.test = t_test_independent(ei, es, kind);
  return c;
}

GroupStats compute_group_stats(const StudyDataset& data, TTestKind kind) {
  std::vector<SubjectSeries> series;
  for (const auto& s : data.subjects) series.push_back(series_of(s));
  GroupStats st;
  st.curves = group_curves(series);
  st.accumulated = accumulated_difference(st.curves);
  auto count = [&](Group g) {
    return std::count_if(series.begin(), series.end(), [g](const SubjectSeries& s) { return s.group == g; });
  };
  if (count(Group::Interactive) >= 2 && count(Group::Static) >= 2) st.p_values = per_index_p_values(series, kind);
  st.efficiency = compare_efficiency(data, kind);
  return st;
}

std::string dataset_to_json(const StudyDataset& data) {
  json subjects = json::array();
  for (const auto& s : data.subjects) {
    json hist = json::array();
    for (const auto& r : s.history) hist.push_back(exam_to_json(r));
    subjects.push_back({{"subject_id", s.subject_id},
                        {"group", to_string(s.group)},
                        {"status", to_string(s.status)},
                        {"efficiency", s.efficiency ? json(*s.efficiency) : json(nullptr)},
                        {"history", hist}});
  }
  json j = {{"curriculum_id", data.curriculum_id},
            {"master_seed", data.master_seed},
            {"series_length", kSeriesLength},
            {"subjects", subjects}};
  return j.dump(2) + "\n";
}

StudyDataset dataset_from_json(std::string_view text) {
  json j = json::parse(text);
  StudyDataset d;
  d.curriculum_id = j.at("curriculum_id").get<std::string>();
  d.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.value("series_length", kSeriesLength) != kSeriesLength) {
    throw std::runtime_error("dataset series length does not match " + std::to_string(kSeriesLength));
  }
  for (const auto& s : j.at("subjects")) {
    SubjectRecord r;
    r.subject_id = s.at("subject_id").get<std::string>();
    r.group = group_from_string(s.at("group").get<std::string>());
    r.status = curriculum_status_from_string(s.at("status").get<std::string>());
    if (!s.at("efficiency").is_null()) r.efficiency = s.at("efficiency").get<double>();
    for (const auto& h : s.at("history")) r.history.push_back(exam_from_json(h));
    d.subjects.push_back(std::move(r));
  }
  return d;
}

void write_dataset(const std::filesystem::path& path, const StudyDataset& data) {
  auto out = open_out(path);
  out << dataset_to_json(data);
}

StudyDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return dataset_from_json(ss.str());
}

AnalysisOutputs write_analysis(const StudyDataset& data, const std::filesystem::path& dir, TTestKind kind) {
  std::filesystem::create_directories(dir);
  AnalysisOutputs paths{dir / "curves.csv", dir / "accdiff.csv", dir / "scatter.csv", dir / "efficiency.csv"};
  GroupStats st = compute_group_stats(data, kind);

  {
    auto out = open_out(paths.curves);
    out << "exam_index,group,mean_score\n";
    for (std::size_t i = 0; i < st.curves.interactive.size(); ++i) {
      out << i + 1 << ",interactive," << format_number(st.curves.interactive[i]) << '\n';
      out << i + 1 << ",static," << format_number(st.curves.static_[i]) << '\n';
    }
  }
  {
    auto out = open_out(paths.accdiff);
    out << "exam_index,accumulated_difference,p_value\n";
    for (std::size_t i = 0; i < st.accumulated.size(); ++i) {
      out << i + 1 << ',' << format_number(st.accumulated[i]) << ','
          << (st.p_values.empty() ? std::string("NA") : format_number(st.p_values[i])) << '\n';
    }
  }
  {
    std::vector<SubjectSeries> series;
    for (const auto& s : data.subjects) series.push_back(series_of(s));
    auto out = open_out(paths.scatter);
    out << "subject_id,group,talent,overall,x,y\n";
    for (auto xa : {TalentAxis::FirstExam, TalentAxis::FirstTwoExams}) {
      for (auto ya : {OverallAxis::FullCurriculum, OverallAxis::FirstHalf}) {
        for (const auto& p : talent_scatter(series, xa, ya)) {
          out << p.subject_id << ',' << to_string(p.group) << ',' << to_string(xa) << ',' << to_string(ya) << ','
              << format_number(p.x) << ',' << format_number(p.y) << '\n';
        }
      }
    }
  }
  {
    auto out = open_out(paths.efficiency);
    const auto& e = st.efficiency;
    out << "statistic,value\n";
    out << "interactive_n," << e.interactive_n << '\n';
    out << "interactive_mean," << format_number(e.interactive_mean) << '\n';
    out << "static_n," << e.static_n << '\n';
    out << "static_mean," << format_number(e.static_mean) << '\n';
    out << "improvement," << format_number(e.improvement) << '\n';
    if (e.test) {
      out << "t," << format_number(e.test->t) << '\n';
      out << "p," << format_number(e.test->p) << '\n';
    }
  }
  return paths;
}

}  // namespace rainbow
