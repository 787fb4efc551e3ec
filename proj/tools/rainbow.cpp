#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "rainbow/analytics.hpp"
#include "rainbow/curriculum.hpp"
#include "rainbow/number_format.hpp"
#include "rainbow/piece_format.hpp"
#include "rainbow/server.hpp"
#include "rainbow/simulator.hpp"

namespace fs = std::filesystem;
using namespace rainbow;

namespace {

int cmd_serve(int port, const fs::path& curriculum, const fs::path& data_dir, std::uint64_t seed) {
  // Block the stop signals before any thread starts; one thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServiceContext ctx(load_curriculum(curriculum), data_dir, seed);
  Server server(ctx, static_cast<std::uint16_t>(port));
  std::cout << "listening on ws://127.0.0.1:" << server.port() << "  curriculum " << ctx.curriculum_id() << " ("
            << ctx.pieces().size() << " pieces), data in " << data_dir.string() << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  // run() only returns after stop(), which only the waiter calls.
  waiter.join();
  std::cout << "stopped" << std::endl;
  return 0;
}

int cmd_simulate(const fs::path& cohort, const fs::path& out, std::optional<std::uint64_t> seed,
                 const std::string& exam_csv) {
  CohortConfig config = read_cohort_config(cohort);
  if (seed) config.master_seed = *seed;
  StudyDataset data = run_cohort(config);
  write_dataset(out, data);
  if (!exam_csv.empty()) {
    std::ofstream csv(exam_csv);
    if (!csv) throw std::runtime_error("cannot write " + exam_csv);
    write_exam_csv_header(csv);
    for (const auto& s : data.subjects) write_exam_csv_rows(csv, s.subject_id, s.history);
  }
  int achieved = 0;
  for (const auto& s : data.subjects) achieved += s.status == CurriculumStatus::Achieved;
  std::cout << data.subjects.size() << " subjects (" << achieved << " achieved) -> " << out.string() << '\n';
  return 0;
}

int cmd_analyze(const fs::path& dataset, const fs::path& out_dir, bool welch) {
  StudyDataset data = read_dataset(dataset);
  const auto kind = welch ? TTestKind::Welch : TTestKind::Pooled;
  AnalysisOutputs paths = write_analysis(data, out_dir, kind);
  EfficiencyComparison e = compare_efficiency(data, kind);
  std::cout << "efficiency interactive " << format_number(e.interactive_mean) << " (n=" << e.interactive_n
            << "), static " << format_number(e.static_mean) << " (n=" << e.static_n << ")";
  if (e.test) std::cout << ", p=" << format_number(e.test->p);
  std::cout << '\n';
  for (const auto& p : {paths.curves, paths.accdiff, paths.scatter, paths.efficiency}) {
    std::cout << "wrote " << p.string() << '\n';
  }
  return 0;
}

int cmd_validate(const std::vector<fs::path>& files) {
  int status = 0;
  for (const auto& f : files) {
    try {
      Piece p = read_piece_file(f);
      for (const auto& v : validate_piece(p)) std::cerr << f.string() << ": warning: " << v.message << '\n';
      std::cout << f.string() << ": ok (" << p.notes.size() << " notes, " << p.measure_count() << " measures)\n";
    } catch (const PieceValidationError& e) {
      for (const auto& v : e.violations()) {
        std::cerr << f.string() << ": " << (v.severity == Severity::Error ? "error" : "warning") << ": "
                  << v.message << '\n';
      }
      status = 1;
    } catch (const std::exception& e) {
      std::cerr << f.string() << ": " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

int cmd_exam_gen(const fs::path& piece_file, std::uint64_t seed, const std::string& out) {
  Piece exam = randomize_pitches(read_piece_file(piece_file), seed);
  if (out.empty() || out == "-") {
    std::cout << serialize_piece(exam);
  } else {
    write_piece_file(out, exam);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rainbow Score sight-playing tutor"};
  app.require_subcommand(1);

  int port = 8765;
  std::string curriculum = "data/curriculum/manifest.json";
  std::string data_dir = "rainbow-data";
  std::uint64_t serve_seed = 0;
  auto* serve = app.add_subcommand("serve", "Run the WebSocket session service");
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--curriculum", curriculum, "Curriculum manifest")->check(CLI::ExistingFile);
  serve->add_option("--data-dir", data_dir, "Where subject logs and sessions are kept");
  serve->add_option("--seed", serve_seed, "Seed for randomized exams");

  std::string cohort, dataset_out = "dataset.json", exam_csv;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Run a synthetic cohort through the curriculum");
  simulate->add_option("cohort", cohort, "Cohort config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", dataset_out, "Dataset JSON to write");
  simulate->add_option("--seed", sim_seed, "Override the master seed");
  simulate->add_option("--exam-csv", exam_csv, "Also write the exam history as CSV");

  std::string dataset, analysis_dir = "analysis";
  bool welch = false;
  auto* analyze = app.add_subcommand("analyze", "Group curves, accumulated difference, scatter, efficiency");
  analyze->add_option("dataset", dataset, "Dataset JSON from simulate")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", analysis_dir, "Output directory for the CSV files");
  analyze->add_flag("--welch", welch, "Welch t-test instead of pooled variance");

  std::vector<std::string> pieces;
  auto* validate = app.add_subcommand("validate", "Parse and validate piece files");
  validate->add_option("pieces", pieces, "Piece files (.rbs)")->required();

  std::string exam_piece, exam_out;
  std::uint64_t exam_seed = 0;
  auto* exam_gen = app.add_subcommand("exam-gen", "Write a randomized exam for a piece");
  exam_gen->add_option("piece", exam_piece, "Piece file (.rbs)")->required();
  exam_gen->add_option("--seed", exam_seed, "Generator seed")->required();
  exam_gen->add_option("--out", exam_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*serve) return cmd_serve(port, curriculum, data_dir, serve_seed);
    if (*simulate) return cmd_simulate(cohort, dataset_out, sim_seed, exam_csv);
    if (*analyze) return cmd_analyze(dataset, analysis_dir, welch);
    if (*validate) return cmd_validate({pieces.begin(), pieces.end()});
    if (*exam_gen) return cmd_exam_gen(exam_piece, exam_seed, exam_out);
  } catch (const std::exception& e) {
    std::cerr << "rainbow: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
