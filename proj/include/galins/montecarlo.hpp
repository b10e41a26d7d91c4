#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "galins/config.hpp"
#include "galins/rundriver.hpp"

namespace galins {

struct RunMeta {
  int run = 0;
  uint64_t seed = 0;
  bool diverged = false;
  double divergedAt = 0.0;
  std::string reason;
};

/// Aggregates for one (delay, filter) cell of a Monte Carlo batch. RMSEs
/// pool the per-step errors of the non-diverged runs; NEES quantiles pool
/// the update-instant values of every run. Empty pools yield NaN, emitted
/// as null in JSON.
struct CellSummary {
  double delayMs = 0.0;
  std::string filter;
  int runs = 0;
  int diverged = 0;
  double rmseRotDeg = 0.0;
  double rmseVel = 0.0;
  double rmsePos = 0.0;
  double rmseDelayMs = 0.0;
  double neesMedian = 0.0;
  double neesP25 = 0.0;
  double neesP75 = 0.0;
  /// Median over the trailing window (30 s, or half the run when shorter).
  double neesMedianFinal = 0.0;
  /// Median delay error over the same trailing window, non-diverged runs.
  double adeMedianFinalMs = 0.0;
  double wallSeconds = 0.0;
  std::vector<RunMeta> runMeta;
};

struct MonteCarloResult {
  std::vector<CellSummary> cells;  ///< delay-major, filters in config order
  double wallSeconds = 0.0;
};

/// Worker count: the requested value (0 means the runtime default), capped
/// by the GALINS_THREADS environment variable when set.
int effectiveThreads(int requested);

/// Subdirectory of one run inside the output tree, e.g. "delay_100ms/run_007".
std::string runDirName(double delayMs, int run);

/// Filter name as a file-name stem (':' is not portable in paths).
std::string filterFileStem(const std::string& filter);

/// Seeded batch over cfg.delaysMs x cfg.runs x cfg.filters. Runs execute on
/// an OpenMP pool sized by effectiveThreads(cfg.threads); every run re-seeds
/// from (base_seed, run index) and owns its filter and buffers, so the
/// result is identical for any worker count. With emit_runs set, each run
/// writes estimate_<filter>.csv and error_<filter>.csv under
/// out_dir/runDirName(...). The initial estimate of every run is drawn about
/// the truth from the tuning priors.
MonteCarloResult runMonteCarlo(const RunConfig& cfg);

/// Reference driver: the identical task list on a plain loop, no worker
/// pool. Kept for testing the pool and for the benchmark target.
MonteCarloResult runMonteCarloSerial(const RunConfig& cfg);

/// Stable JSON document: config echo, per-cell aggregates, per-run seeds and
/// divergence flags. Wall-time fields are the only content excluded by
/// includeWall, so byte comparisons of deterministic output strip them by
/// printing with includeWall = false.
std::string summaryToJson(const RunConfig& cfg, const MonteCarloResult& res,
                          bool includeWall);

/// Parse a summaryToJson document. Returns the aggregates and, when cfgOut
/// is non-null, the echoed config. Throws std::invalid_argument.
MonteCarloResult summaryFromJson(const std::string& text, RunConfig* cfgOut);

/// Rebuild the numeric aggregates of a summary from the per-run error CSVs
/// under baseDir, keeping the run metadata (seeds, divergence flags) from
/// `meta`. Throws CsvError when a referenced file is missing or malformed.
MonteCarloResult recomputeAggregates(const RunConfig& cfg,
                                     const MonteCarloResult& meta,
                                     const std::string& baseDir);

/// Numeric agreement of two summaries (same shape, aggregates within
/// tolerance; wall times ignored). CSV round-trips quantize at nine
/// decimals, so recomputed aggregates match only to that precision.
bool summariesClose(const MonteCarloResult& a, const MonteCarloResult& b,
                    double relTol = 1e-6, double absTol = 1e-9);

}  // namespace galins
