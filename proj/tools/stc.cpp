// Command-line driver: run, check, bench and dot subcommands.
//
// Exit codes: 0 success, 1 check failure, 2 validation error, 3 runtime error.
// Machine-readable output goes to stdout, diagnostics to stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stc/stc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

stc::Program load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw stc::Error(stc::ErrorKind::ParseError, "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return stc::parse_program(text.str());
}

int cmd_run(const std::string& path, const std::string& mode, std::size_t workers) {
  stc::Program prog = load_program(path);
  stc::StateStore init = stc::init_state(prog.graph);
  stc::ExecOptions opts;
  opts.workers = workers;

  std::pair<std::vector<stc::Value>, stc::StateStore> result;
  if (prog.is_branch()) {
    if (mode == "seq")
      result = stc::eval_branch_ref(prog.graph, prog.branch(), prog.input, init);
    else if (mode == "pipeline" || mode == "auto")
      result = stc::run_task_parallel_branch(prog.graph, prog.branch(), prog.input, init, opts);
    else
      throw stc::Error(stc::ErrorKind::ValidationError, "mode " + mode + " is not defined for branch programs");
  } else if (mode == "seq") {
    result = stc::eval_psi_ref(prog.graph, prog.word(), prog.input, init);
  } else if (mode == "interleaved") {
    result = stc::eval_interleaved(prog.graph, prog.word(), prog.input, init);
  } else if (mode == "pipeline") {
    result = stc::run_pipeline(prog.graph, prog.word(), prog.input, init, opts);
  } else {
    result = stc::run_auto(prog.graph, prog.word(), prog.input, init, opts);
  }
  std::cout << stc::result_json(result.first, result.second).dump() << '\n';
  return kExitOk;
}

void dump_failures(const stc::EquivReport& report, const std::string& dir) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  for (const auto& t : report.trials) {
    if (t.equal) continue;
    auto path = std::filesystem::path(dir) / ("trial-" + std::to_string(t.trial) + ".json");
    std::ofstream(path) << stc::Json::parse(t.program).dump(2) << '\n';
    std::cerr << "wrote failing program to " << path.string() << '\n';
  }
}

int cmd_check_file(const std::string& path, const stc::CheckOptions& opts) {
  stc::Program prog = load_program(path);
  stc::TrialRecord rec = stc::check_program(prog, opts);
  std::cout << std::left << std::setw(28) << "mode" << "result\n";
  for (const auto& mode : rec.modes) {
    bool bad = rec.first && rec.first->mode == mode;
    std::cout << std::setw(28) << mode << (bad ? "DIVERGED" : "equal") << '\n';
  }
  if (!rec.equal) {
    std::cerr << "first divergence in " << rec.first->mode << ": " << rec.first->detail << '\n';
    return kExitCheckFailed;
  }
  std::cout << rec.modes.size() << "/" << rec.modes.size() << " modes equal\n";
  return kExitOk;
}

int cmd_check_fuzz(const stc::FuzzConfig& cfg, const stc::CheckOptions& opts, bool fail_fast, bool verbose,
                   const std::string& dump_dir) {
  stc::EquivReport report = stc::check_fuzz(cfg, opts, fail_fast);
  std::cout << report.to_json(verbose).dump(verbose ? 2 : -1) << '\n';
  dump_failures(report, dump_dir);
  if (!report.all_equal()) {
    for (const auto& t : report.trials) {
      if (t.equal) continue;
      std::cerr << "trial " << t.trial << " diverged in " << t.first->mode << ": " << t.first->detail << '\n';
      break;
    }
    return kExitCheckFailed;
  }
  std::cerr << report.passed() << "/" << report.trials.size() << " equal\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stc: deterministic stateful dataflow engine"};
  app.require_subcommand(1);

  std::string run_path, run_mode = "seq";
  std::size_t run_workers = 4;
  auto* run = app.add_subcommand("run", "Evaluate a program file and print the result as JSON");
  run->add_option("file", run_path, "Program file")->required();
  run->add_option("--mode", run_mode, "Executor")->check(CLI::IsMember({"seq", "interleaved", "pipeline", "auto"}));
  run->add_option("--workers", run_workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string check_path, mutation_name = "none", dump_dir;
  bool fuzz = false, fail_fast = false, verbose = false;
  stc::FuzzConfig fuzz_cfg;
  auto* check = app.add_subcommand("check", "Compare every executor against the sequential reference");
  check->add_option("file", check_path, "Program file");
  check->add_flag("--fuzz", fuzz, "Check generated programs instead of a file");
  check->add_option("--seed", fuzz_cfg.seed, "Generator seed");
  check->add_option("--trials", fuzz_cfg.trials, "Number of generated programs");
  check->add_option("--max-edges", fuzz_cfg.max_edges)->check(CLI::PositiveNumber);
  check->add_option("--max-word-len", fuzz_cfg.max_word_len)->check(CLI::PositiveNumber);
  check->add_option("--max-list-len", fuzz_cfg.max_list_len);
  check->add_option("--mutation", mutation_name, "Inject an executor fault (mutation testing)");
  check->add_flag("--fail-fast", fail_fast, "Stop at the first failing trial");
  check->add_flag("--verbose", verbose, "Include passing trials in the report");
  check->add_option("--dump-dir", dump_dir, "Write failing programs here");

  stc::BenchConfig bench_cfg;
  std::string bench_modes = "seq,pipeline";
  auto* bench = app.add_subcommand("bench", "Time sequential vs pipelined execution of a delay chain; prints CSV");
  bench->add_option("--stages", bench_cfg.stages)->required()->check(CLI::PositiveNumber);
  bench->add_option("--list-len", bench_cfg.list_len)->required()->check(CLI::PositiveNumber);
  bench->add_option("--delay-ms", bench_cfg.delay_ms)->required()->check(CLI::PositiveNumber);
  bench->add_option("--workers", bench_cfg.workers, "Worker threads (default: one per stage)");
  bench->add_option("--repeats", bench_cfg.repeats, "Runs per mode; the median is reported")->check(CLI::PositiveNumber);
  bench->add_option("--modes", bench_modes, "Comma-separated subset of seq,pipeline");

  std::string dot_path;
  bool extended = false;
  auto* dot = app.add_subcommand("dot", "Render the thread multigraph as Graphviz DOT");
  dot->add_option("file", dot_path, "Program file")->required();
  dot->add_flag("--extended", extended, "Label with global-state forms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_path, run_mode, run_workers);
    if (*check) {
      stc::CheckOptions opts;
      auto m = stc::parse_mutation(mutation_name);
      if (!m) throw stc::Error(stc::ErrorKind::ValidationError, "unknown mutation \"" + mutation_name + "\"");
      opts.mutation = *m;
      if (fuzz) return cmd_check_fuzz(fuzz_cfg, opts, fail_fast, verbose, dump_dir);
      if (check_path.empty()) throw stc::Error(stc::ErrorKind::ValidationError, "check needs a file or --fuzz");
      return cmd_check_file(check_path, opts);
    }
    if (*bench) {
      bench_cfg.modes.clear();
      std::stringstream ss(bench_modes);
      for (std::string m; std::getline(ss, m, ',');)
        if (!m.empty()) bench_cfg.modes.push_back(m);
      std::cout << stc::bench_csv(stc::run_bench(bench_cfg));
      return kExitOk;
    }
    if (*dot) {
      std::cout << stc::export_dot(load_program(dot_path).graph, extended);
      return kExitOk;
    }
  } catch (const stc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_validation() ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
