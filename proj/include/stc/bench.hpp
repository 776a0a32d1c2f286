#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "stc/composition.hpp"
#include "stc/core_model.hpp"
#include "stc/parallel_exec.hpp"

namespace stc {

struct BenchConfig {
  std::size_t stages = 2;
  std::size_t list_len = 10;
  std::int64_t delay_ms = 10;
  std::size_t workers = 0;  // 0: one worker per stage
  std::size_t repeats = 5;
  std::vector<std::string> modes{"seq", "pipeline"};
};

struct BenchRow {
  std::string mode;
  std::size_t stages = 0;
  std::size_t list_len = 0;
  std::int64_t delay_ms = 0;
  double wall_ms = 0;  // median over the repeats
};

/// A chain of `stages` delay_identity_ms threads on int, ids 1..stages.
inline Multigraph delay_chain(std::size_t stages, std::int64_t delay_ms) {
  Multigraph g;
  BuiltinParams params{delay_ms, TypeDesc::integer()};
  for (std::size_t i = 1; i <= stages; ++i) g = register_thread(make_thread(i, "delay_identity_ms", {}, params), std::move(g));
  return g;
}

inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  if (cfg.stages == 0 || cfg.list_len == 0 || cfg.delay_ms <= 0 || cfg.repeats == 0)
    throw Error(ErrorKind::ValidationError, "bench parameters must be positive");
  Multigraph g = delay_chain(cfg.stages, cfg.delay_ms);
  Word w;
  for (std::size_t i = 1; i <= cfg.stages; ++i) w.letters.push_back(ThreadId{i});
  std::vector<Value> xs;
  for (std::size_t i = 0; i < cfg.list_len; ++i) xs.push_back(Value::integer(static_cast<std::int64_t>(i)));
  const StateStore init = init_state(g);
  ExecOptions opts;
  opts.workers = cfg.workers == 0 ? cfg.stages : cfg.workers;

  std::vector<BenchRow> rows;
  for (const std::string& mode : cfg.modes) {
    std::vector<double> times;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      auto start = std::chrono::steady_clock::now();
      if (mode == "seq")
        eval_psi_ref(g, w, xs, init);
      else if (mode == "pipeline")
        run_pipeline(g, w, xs, init, opts);
      else
        throw Error(ErrorKind::ValidationError, "unknown bench mode \"" + mode + "\"");
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(times.begin(), times.end());
    rows.push_back({mode, cfg.stages, cfg.list_len, cfg.delay_ms, times[times.size() / 2]});
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "mode,stages,list_len,delay_ms,wall_ms\n";
  for (const auto& r : rows)
    os << r.mode << ',' << r.stages << ',' << r.list_len << ',' << r.delay_ms << ',' << std::fixed
       << std::setprecision(3) << r.wall_ms << '\n';
  return os.str();
}

}  // namespace stc
