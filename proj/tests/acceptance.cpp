// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "rainbow/analytics.hpp"
#include "rainbow/curriculum.hpp"
#include "rainbow/scoring.hpp"
#include "rainbow/service.hpp"
#include "rainbow/simulator.hpp"
#include "rainbow/stats.hpp"
#include "support.hpp"

using namespace rainbow;
using namespace testing;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

struct Criterion {
  std::string name;
  double limit_s;  // 0: no time limit
  std::function<std::string()> body;
};

// ---------------------------------------------------------------------------

std::string trinity() {
  // Written out by hand: holes covered from the top, color, row.
  const struct {
    char letter;
    const char* holes;
    std::uint32_t rgb;
    int row;
  } table[] = {
      {'C', "111111", 0xE6194B, 0}, {'D', "111110", 0xF58231, 1}, {'E', "111100", 0xFFE119, 2},
      {'F', "111000", 0x3CB44B, 3}, {'G', "110000", 0x4363D8, 4}, {'A', "100000", 0x911EB4, 5},
      {'B', "000000", 0xA9A9A9, 6},
  };
  for (const auto& r : table) {
    const auto p = DiatonicPitch::from_letter(r.letter);
    expect(fingering_for_pitch(p).to_string() == r.holes, std::string("fingering of ") + r.letter);
    expect(pitch_from_fingering(FingeringState::from_string(r.holes)) == p, std::string("pitch of ") + r.holes);
    expect(color_of(p).rgb == r.rgb, std::string("color of ") + r.letter);
    expect(row_of(p) == r.row, std::string("row of ") + r.letter);
  }
  for (int mask = 0; mask < 64; ++mask) {
    int expected = 0;
    for (int hole = 1; hole <= 6; ++hole) {
      if (!((mask >> (hole - 1)) & 1)) {
        expected = 7 - hole;
        break;
      }
    }
    expect(pitch_from_fingering(FingeringState::from_mask(static_cast<std::uint8_t>(mask))).degree() == expected,
           "pattern " + std::to_string(mask));
  }
  return "7 mappings, 64 patterns";
}

std::string scoring_boundary() {
  // One 1000 ms note: correct for 699 / 700 / 701 ms.
  auto one_note = [](Millis correct_ms) {
    Piece p = quarters("CD", 60.0);
    PerformanceRecord r;
    r.piece_id = p.id;
    r.tempo = 60;
    r.events = {ev(0, pitches::C), ev(correct_ms, pitches::G)};
    r.end_t = 2000;
    return compute_coverage(p, r, 60.0)[0];
  };
  expect(!one_note(699).correct(), "0.699 counted correct");
  expect(one_note(700).correct(), "0.700 counted incorrect");
  expect(one_note(701).correct(), "0.701 counted incorrect");

  Rng rng(20240601);
  const double tempos[] = {50, 60, 75, 100, 125, 150};
  int exact = 0;
  for (int i = 0; i < 200; ++i) {
    Piece p = random_piece(rng, 16, 4);
    const double tempo = tempos[rng.below(6)];
    const auto horizon = static_cast<Millis>(ticks_to_ms(p.end(), tempo)) + 300;
    auto r = random_record(rng, p, ModeId::C, tempo, horizon, 60);
    const double got = score_performance(compute_coverage(p, r, tempo));
    const double want =
        static_cast<double>(brute_force_correct_notes(p, r, tempo)) / static_cast<double>(p.notes.size());
    expect(got == want, "record " + std::to_string(i) + ": " + std::to_string(got) + " vs " + std::to_string(want));
    ++exact;
  }
  return "boundary ok, " + std::to_string(exact) + "/200 records exact";
}

std::string d_for_e() {
  Piece p = quarters("CDEFGE", 60.0);
  auto s = Session::start(ModeId::A, p, 60);
  const char played[] = "CDEFGD";
  std::optional<FeedbackFrame> last;
  for (int i = 0; i < 6; ++i) {
    s.advance_clock(i * 1000);
    last = s.on_fingering(ev(i * 1000, DiatonicPitch::from_letter(played[i])));
  }
  expect(last && last->mask, "no mask on the wrong note");
  expect(last->mask->played_row == 1, "mask row " + std::to_string(last->mask->played_row));
  expect(last->mask->arrow == Arrow::Up, "arrow is not up");
  s.advance_clock(6000);
  const double score = score_performance(compute_coverage(p, s.record(), 60));
  expect(std::abs(score - 5.0 / 6.0) <= 1e-12, "score " + std::to_string(score));
  return "score 5/6, mask row 1, arrow up";
}

std::string randomized_exam() {
  auto cur = load_curriculum(data_path("curriculum/manifest.json"));
  std::array<int, 7> first{};
  const int n = 1000;
  for (int g = 0; g < n; ++g) {
    const Piece& src = cur.pieces[static_cast<std::size_t>(g) % cur.pieces.size()];
    Piece e = randomize_pitches(src, derive_seed(555, 0, static_cast<std::uint64_t>(g)));
    expect(e.notes.size() == src.notes.size(), "note count changed");
    for (std::size_t i = 0; i < e.notes.size(); ++i) {
      expect(e.notes[i].onset == src.notes[i].onset && e.notes[i].duration == src.notes[i].duration,
             "rhythm changed");
      expect(i == 0 || e.notes[i].pitch != e.notes[i - 1].pitch, "adjacent equal pitch");
    }
    ++first[static_cast<std::size_t>(e.notes[0].pitch.degree())];
  }
  double chi = 0;
  for (int c : first) chi += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  const double p = chi_square_6_upper(chi);
  expect(p > 0.01, "first-note chi-square p = " + std::to_string(p));
  std::ostringstream ss;
  ss << "1000 generations, chi2 = " << chi << ", p = " << p;
  return ss.str();
}

std::string termination() {
  auto ids = [](int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("s" + std::to_string(i));
    return v;
  };
  // pass-pass-pass through skips: three exams
  CurriculumState a(ids(16));
  for (int i = 0; i < 3; ++i) a = step_song(a, SongStep{0.9, true, false, std::nullopt});
  expect(a.status() == CurriculumStatus::Achieved && a.history().size() == 3, "pass-pass-pass");
  expect(learning_efficiency(a) == 1.0 / 3.0, "efficiency 1/3");

  // pass-pass-fail-pass-pass-pass: six exams
  CurriculumState b(ids(16));
  b = step_song(b, SongStep{0.9, false, false, 0.9});
  b = step_song(b, SongStep{0.5, false, false, 0.9});
  b = step_song(b, SongStep{0.9, false, false, 0.9});
  expect(b.status() == CurriculumStatus::Achieved && b.history().size() == 6, "pass-pass-fail-pass-pass-pass");
  expect(learning_efficiency(b) == 1.0 / 6.0, "efficiency 1/6");

  // a skip request below the pass mark does not skip
  CurriculumState c(ids(16));
  c = step_song(c, SongStep{0.7, true, false, 0.9});
  expect(c.history().size() == 2, "skip below pass mark");

  // every history of a four-song curriculum with exam scores in {0.5, 0.9}
  int achieved = 0;
  double lo = 1, hi = 0;
  std::function<void(CurriculumState, int)> walk = [&](CurriculumState s, int depth) {
    for (double pre : {0.5, 0.9}) {
      for (double rnd : {0.5, 0.9}) {
        for (bool skip : {false, true}) {
          auto next = step_song(s, SongStep{pre, skip, false, rnd});
          if (next.status() == CurriculumStatus::Achieved) {
            // oracle: index of the first run of three passes
            int run = 0, idx = 0;
            for (const auto& r : next.history()) {
              ++idx;
              run = r.score >= 0.8 ? run + 1 : 0;
              if (run == 3) break;
            }
            expect(idx == static_cast<int>(next.history().size()), "termination index");
            const double e = learning_efficiency(next);
            lo = std::min(lo, e);
            hi = std::max(hi, e);
            ++achieved;
          } else if (next.running()) {
            walk(next, depth + 1);
          }
        }
      }
    }
  };
  walk(CurriculumState(ids(4)), 0);
  expect(lo >= 1.0 / 32.0 && hi <= 1.0 / 3.0, "efficiency bounds");
  // A 16-song run that never passes ends after 32 exams.
  CurriculumState x(ids(16));
  while (x.running()) x = step_song(x, SongStep{0.1, false, false, 0.1});
  expect(x.status() == CurriculumStatus::Exhausted && x.history().size() == 32, "exhaustion after 32 exams");

  std::ostringstream ss;
  ss << "hand traces ok, " << achieved << " achieved histories, e in [" << lo << ", " << hi << "]";
  return ss.str();
}

std::string directionality() {
  CohortConfig base = read_cohort_config(data_path("cohort_example.json"));
  const Curriculum cur = load_curriculum(base.curriculum);
  auto group_means = [&](const StudyDataset& d) {
    auto e = compare_efficiency(d);
    return std::pair{e.interactive_mean, e.static_mean};
  };

  int wins = 0;
  const int seeds = 20;
  for (int k = 0; k < seeds; ++k) {
    CohortConfig c = base;
    c.master_seed = 1000 + static_cast<std::uint64_t>(k);
    auto [mi, ms] = group_means(run_cohort(c, cur));
    wins += mi > ms;
  }
  const double p_sign = sign_test_upper_p(wins, seeds);
  expect(p_sign < 0.05, "sign test " + std::to_string(wins) + "/20, p = " + std::to_string(p_sign));

  std::vector<double> ei, es;
  for (int k = 0; k < 50; ++k) {
    CohortConfig c = base;
    c.master_seed = 5000 + static_cast<std::uint64_t>(k);
    c.learner.lambda_feedback = 0.0;
    for (const auto& s : run_cohort(c, cur).subjects) {
      if (s.efficiency) (s.group == Group::Interactive ? ei : es).push_back(*s.efficiency);
    }
  }
  const auto t = t_test_independent(ei, es);
  expect(t.p > 0.2, "feedback-free t-test p = " + std::to_string(t.p));

  std::ostringstream ss;
  ss << "interactive ahead in " << wins << "/20 seeds (sign p = " << p_sign << "); without feedback p = " << t.p;
  return ss.str();
}

std::string stats_kernel() {
  // Frozen 50-digit values (tests/oracle/ttest_oracle.py).
  struct Case {
    std::vector<double> a, b;
    TTestKind kind;
    double p;
  };
  const std::vector<Case> cases = {
      {{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}, TTestKind::Pooled, 0.34659350708733424783},
      {{1, 2}, {3, 5}, TTestKind::Pooled, 0.15484574527148342249},
      {{0.5, 0.6, 0.7}, {0.9, 0.8, 1.0}, TTestKind::Pooled, 0.021311641128756700375},
      {{10, 12, 9, 11, 14, 13}, {8, 7, 9, 10, 6, 8}, TTestKind::Pooled, 0.0044209195669813283327},
      {{0.1, 0.2, 0.15, 0.3}, {0.12, 0.18, 0.22, 0.25, 0.16}, TTestKind::Pooled, 0.97461770014428326752},
      {{1.5, 2.5}, {1, 2, 3, 4}, TTestKind::Pooled, 0.64826129496730701452},
      {{3, 3.1, 2.9, 3.05}, {3.2, 3.3, 3.1, 3.25}, TTestKind::Pooled, 0.016158115402361097659},
      {{0, 1, 0, 1, 0, 1}, {1, 1, 0, 1, 1, 1}, TTestKind::Pooled, 0.25957293190510391553},
      {{5, 6, 7, 8, 9, 10, 11, 12}, {4, 6, 8, 10, 12, 14, 16, 18}, TTestKind::Pooled, 0.21761697475187344499},
      {{0.059, 0.05, 0.07, 0.062}, {0.045, 0.04, 0.052, 0.043}, TTestKind::Pooled, 0.020025635079653894392},
      {{2.2, 2.4, 2.6, 2.8, 3.0}, {1.0, 1.1, 1.2}, TTestKind::Pooled, 0.00024028246415605598163},
      {{-1, -2, -3}, {1, 2, 3}, TTestKind::Pooled, 0.0080498931008377197501},
      {{0.001, 0.002, 0.003}, {0.004, 0.005, 0.006, 0.007}, TTestKind::Pooled, 0.011724811003954637785},
      {{1, 1, 1, 2}, {2, 2, 2, 3}, TTestKind::Pooled, 0.030019745287544411791},
      {{0.8, 0.9, 1.0, 0.85, 0.95, 0.75, 0.9, 0.8}, {0.6, 0.7, 0.65, 0.8, 0.5, 0.7, 0.75, 0.6}, TTestKind::Pooled,
       0.00042637575734322461733},
      {{0, 0.25, 0.5}, {0.5, 0.75, 1.0}, TTestKind::Pooled, 0.070483996910219947557},
      {{4, 5}, {4.5, 5.5}, TTestKind::Pooled, 0.55278640450004206072},
      {{1, 3, 2, 5, 4, 6, 8}, {2, 1}, TTestKind::Pooled, 0.18590398915022175379},
      {{1, 2}, {3, 5}, TTestKind::Welch, 0.19872738893452614424},
      {{10, 12, 9, 11, 14, 13}, {8, 7, 9, 10, 6, 8}, TTestKind::Welch, 0.0049815366938710407524},
      {{1.5, 2.5}, {1, 2, 3, 4}, TTestKind::Welch, 0.57598131439955877881},
      {{0.059, 0.05, 0.07, 0.062}, {0.045, 0.04, 0.052, 0.043}, TTestKind::Welch, 0.025646094267093306765},
      {{2.2, 2.4, 2.6, 2.8, 3.0}, {1.0, 1.1, 1.2}, TTestKind::Welch, 0.00015660252093008234563},
      {{1, 3, 2, 5, 4, 6, 8}, {2, 1}, TTestKind::Welch, 0.040548733895536896185},
  };
  double worst = 0;
  for (const auto& c : cases) worst = std::max(worst, std::abs(t_test_independent(c.a, c.b, c.kind).p - c.p));
  expect(worst <= 1e-9, "t-test |dp| = " + std::to_string(worst));

  Rng rng(77);
  double worst_acc = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SubjectSeries> s;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> sc(32);
      for (auto& x : sc) x = rng.uniform();
      s.push_back(SubjectSeries{"x", i < 5 ? Group::Interactive : Group::Static, sc, 32});
    }
    auto acc = accumulated_difference(group_curves(s));
    for (std::size_t k = 0; k < 32; ++k) {
      double ti = 0, ts = 0;
      for (const auto& x : s) {
        for (std::size_t j = 0; j <= k; ++j) (x.group == Group::Interactive ? ti : ts) += x.scores[j];
      }
      worst_acc = std::max(worst_acc, std::abs(acc[k] - (ti / 5 - ts / 5)));
    }
  }
  expect(worst_acc <= 1e-12, "accumulated difference off by " + std::to_string(worst_acc));

  // Achievers count as perfect afterwards; quitters keep their last score.
  const std::vector<double> h = {0.4, 0.9, 0.85, 0.95};
  auto done = fill_series(h, CurriculumStatus::Achieved);
  expect(done.size() == 32 && done[4] == 1.0 && done[31] == 1.0 && done[3] == 0.95, "achieved fill");
  auto quit = fill_series(h, CurriculumStatus::Quit);
  expect(quit.size() == 32 && quit[4] == 0.95 && quit[31] == 0.95, "quit fill");

  std::ostringstream ss;
  ss << cases.size() << " t-test cases, max |dp| = " << worst << "; accdiff max err = " << worst_acc;
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RAINBOW_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string replay_determinism() {
  // Scores logged by the service equal a replay of the stored session.
  fs::path dir = fs::temp_directory_path() / "rainbow_accept_replay";
  fs::remove_all(dir);
  ServiceContext ctx(load_curriculum(data_path("curriculum/manifest.json")), dir, 99);
  Rng rng(3);
  int checked = 0;
  for (int subj = 0; subj < 4; ++subj) {
    const std::string id = "R" + std::to_string(subj);
    Connection c(ctx);
    std::int64_t seq = 0;
    c.handle(Message{MessageKind::Hello, ++seq, {{"subject_id", id}, {"group", "static"}}}, 0);
    c.handle(Message{MessageKind::Start, ++seq, {{"purpose", "exam"}}}, 0);
    const Piece& song = ctx.pieces()[0];
    const auto end = static_cast<Millis>(std::ceil(ticks_to_ms(song.end(), song.default_tempo)));
    for (Millis t = 0; t < end; t += 50 + static_cast<Millis>(rng.below(400))) {
      FingeringState f = FingeringState::from_mask(static_cast<std::uint8_t>(rng.below(64)));
      c.handle(Message{MessageKind::Fingering, ++seq, {{"t", t}, {"holes", f.to_string()}}}, t);
    }
    c.tick(end + 100);
    for (const auto& e : ctx.store().events(id)) {
      if (e["type"] != "exam") continue;
      auto record = ctx.store().load_session(id, e["session"].get<std::string>());
      expect(replay_score(song, record) == e["score"].get<double>(), "replayed score differs for " + id);
      ++checked;
    }
  }
  expect(checked == 4, "expected 4 logged exams, got " + std::to_string(checked));

  fs::path out = fs::temp_directory_path() / "rainbow_accept_sim";
  fs::remove_all(out);
  fs::create_directories(out);
  const std::string cohort = data_path("cohort_example.json");
  expect(run_cli("simulate " + cohort + " --out " + (out / "a.json").string()) == 0, "simulate failed");
  expect(run_cli("simulate " + cohort + " --out " + (out / "b.json").string()) == 0, "simulate failed");
  expect(slurp(out / "a.json") == slurp(out / "b.json"), "simulate output differs between runs");
  return "4 sessions replay exactly; simulate output byte-identical";
}

std::string full_pipeline() {
  fs::path out = fs::temp_directory_path() / "rainbow_accept_pipeline";
  fs::remove_all(out);
  fs::create_directories(out);
  const auto ds = (out / "dataset.json").string();
  expect(run_cli("simulate " + data_path("cohort_mini.json") + " --out " + ds) == 0, "simulate failed");
  const auto data = read_dataset(ds);
  expect(data.subjects.size() == 16, "cohort size");
  expect(run_cli("analyze " + ds + " --out " + (out / "analysis").string()) == 0, "analyze failed");

  auto curves = lines_of(out / "analysis" / "curves.csv");
  expect(curves.size() == 1 + 64, "curves.csv rows");
  std::map<std::string, std::set<int>> idx;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    std::istringstream row(curves[i]);
    std::string k, g;
    std::getline(row, k, ',');
    std::getline(row, g, ',');
    idx[g].insert(std::stoi(k));
  }
  expect(idx.size() == 2 && idx.count("interactive") && idx.count("static"), "curve group labels");
  for (const auto& [g, ks] : idx) expect(ks.size() == 32 && *ks.begin() == 1 && *ks.rbegin() == 32, "indices for " + g);

  auto acc = lines_of(out / "analysis" / "accdiff.csv");
  expect(acc.size() == 33, "accdiff.csv rows");
  for (std::size_t i = 1; i < acc.size(); ++i) {
    expect(acc[i].rfind(std::to_string(i) + ",", 0) == 0, "accdiff index " + std::to_string(i));
    expect(acc[i].find("NA") == std::string::npos, "accdiff p-value missing");
  }

  auto scatter = lines_of(out / "analysis" / "scatter.csv");
  expect(scatter.size() == 1 + 4 * 16, "scatter.csv rows");
  for (std::size_t i = 1; i < scatter.size(); ++i) {
    const bool inter = scatter[i].rfind("I", 0) == 0;
    const std::string label = inter ? ",interactive," : ",static,";
    expect(scatter[i].find(label) != std::string::npos, "scatter group label: " + scatter[i]);
  }
  return "16 subjects, 32 indices per group, labels ok";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"pitch, fingering, color and row mappings", 1.0, trinity},
      {"scoring boundary and brute-force agreement", 10.0, scoring_boundary},
      {"five correct then D for E: score 5/6, mask row 1, arrow up", 0.0, d_for_e},
      {"randomized exam rhythm, repeats and first-note uniformity", 0.0, randomized_exam},
      {"termination index, efficiency and bounds", 0.0, termination},
      {"simulator directionality", 0.0, directionality},
      {"statistics kernel", 0.0, stats_kernel},
      {"replay determinism", 0.0, replay_determinism},
      {"full pipeline on the two-piece curriculum, 8+8", 60.0, full_pipeline},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.body();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && c.limit_s > 0 && secs >= c.limit_s) {
      ok = false;
      detail += " (too slow)";
    }
    failed += !ok;
    std::printf("%s  [%zu] %s: %s (%.3f s%s)\n", ok ? "PASS" : "FAIL", i + 1, c.name.c_str(), detail.c_str(), secs,
                c.limit_s > 0 ? (", limit " + std::to_string(static_cast<int>(c.limit_s)) + " s").c_str() : "");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
