// Times the Monte Carlo worker pool against the serial reference driver on
// the same batch and checks that both produce identical summaries.
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "galins/montecarlo.hpp"

using namespace galins;

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo pool vs serial reference"};
  int runs = 8;
  double duration = 20.0;
  int threads = 0;
  app.add_option("--runs", runs, "runs per delay")->capture_default_str();
  app.add_option("--duration", duration, "trajectory length [s]")
      ->capture_default_str();
  app.add_option("--threads", threads, "pool size (0 = runtime default)")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  cfg.runs = runs;
  cfg.traj.duration = duration;
  cfg.delaysMs = {100.0, 300.0};
  cfg.filters = {"eqf", "ekf-online"};
  cfg.emitRuns = false;
  cfg.threads = threads;

  std::printf("batch: %zu delays x %d runs x %zu filters, %.0f s each\n",
              cfg.delaysMs.size(), cfg.runs, cfg.filters.size(),
              cfg.traj.duration);

  const MonteCarloResult serial = runMonteCarloSerial(cfg);
  std::printf("%-22s %8.2f s\n", "serial reference", serial.wallSeconds);

  const MonteCarloResult pooled = runMonteCarlo(cfg);
  std::printf("%-22s %8.2f s  (%d workers)\n", "worker pool",
              pooled.wallSeconds, effectiveThreads(cfg.threads));
  std::printf("speedup: %.2fx\n", serial.wallSeconds / pooled.wallSeconds);

  const std::string a = summaryToJson(cfg, serial, /*includeWall=*/false);
  const std::string b = summaryToJson(cfg, pooled, /*includeWall=*/false);
  if (a != b) {
    std::cerr << "MISMATCH: pool and serial reference disagree\n";
    return 1;
  }
  std::printf("pool output matches the serial reference\n");
  return 0;
}
