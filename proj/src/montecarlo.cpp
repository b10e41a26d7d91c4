#include "galins/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "galins/csv_io.hpp"
#include "json.hpp"

namespace galins {

namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double quantileSorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNan;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double finalWindowStart(double duration) {
  return duration > 30.0 ? duration - 30.0 : 0.5 * duration;
}

/// Per-run slice of a cell's aggregates; reduced in run order afterwards so
/// the result does not depend on the worker schedule.
struct RunSlice {
  double s2[4] = {0.0, 0.0, 0.0, 0.0};  // rot, vel, pos, delay
  size_t steps = 0;
  std::vector<double> neesAll;
  std::vector<double> neesFinal;
  std::vector<double> adeFinal;
  RunMeta meta;
  double wallSeconds = 0.0;
};

RunSlice sliceFromSeries(const ErrorSeries& errors, const RunMeta& meta,
                         double wallSeconds, double tFinal) {
  RunSlice slice;
  slice.meta = meta;
  slice.wallSeconds = wallSeconds;
  if (!meta.diverged) {
    for (const ErrorRecord& e : errors.steps) {
      slice.s2[0] += e.are * e.are;
      slice.s2[1] += e.ave * e.ave;
      slice.s2[2] += e.ape * e.ape;
      slice.s2[3] += e.ade * e.ade;
      if (e.t >= tFinal) slice.adeFinal.push_back(e.ade);
    }
    slice.steps = errors.steps.size();
  }
  slice.neesAll.reserve(errors.neesAtUpdates.size());
  for (const auto& [t, v] : errors.neesAtUpdates) {
    slice.neesAll.push_back(v);
    if (t >= tFinal) slice.neesFinal.push_back(v);
  }
  return slice;
}

CellSummary reduceCell(double delayMs, const std::string& filter,
                       std::vector<RunSlice>& slices) {
  CellSummary cell;
  cell.delayMs = delayMs;
  cell.filter = filter;
  cell.runs = static_cast<int>(slices.size());

  double s2[4] = {0.0, 0.0, 0.0, 0.0};
  size_t steps = 0;
  std::vector<double> neesAll;
  std::vector<double> neesFinal;
  std::vector<double> adeFinal;
  for (RunSlice& slice : slices) {
    for (int i = 0; i < 4; ++i) s2[i] += slice.s2[i];
    steps += slice.steps;
    neesAll.insert(neesAll.end(), slice.neesAll.begin(), slice.neesAll.end());
    neesFinal.insert(neesFinal.end(), slice.neesFinal.begin(),
                     slice.neesFinal.end());
    adeFinal.insert(adeFinal.end(), slice.adeFinal.begin(),
                    slice.adeFinal.end());
    cell.wallSeconds += slice.wallSeconds;
    if (slice.meta.diverged) ++cell.diverged;
    cell.runMeta.push_back(slice.meta);
  }

  if (steps > 0) {
    const double n = static_cast<double>(steps);
    cell.rmseRotDeg = std::sqrt(s2[0] / n) * 180.0 / M_PI;
    cell.rmseVel = std::sqrt(s2[1] / n);
    cell.rmsePos = std::sqrt(s2[2] / n);
    cell.rmseDelayMs = std::sqrt(s2[3] / n) * 1000.0;
  } else {
    cell.rmseRotDeg = cell.rmseVel = cell.rmsePos = cell.rmseDelayMs = kNan;
  }
  std::sort(neesAll.begin(), neesAll.end());
  std::sort(neesFinal.begin(), neesFinal.end());
  std::sort(adeFinal.begin(), adeFinal.end());
  cell.neesMedian = quantileSorted(neesAll, 0.5);
  cell.neesP25 = quantileSorted(neesAll, 0.25);
  cell.neesP75 = quantileSorted(neesAll, 0.75);
  cell.neesMedianFinal = quantileSorted(neesFinal, 0.5);
  cell.adeMedianFinalMs = quantileSorted(adeFinal, 0.5) * 1000.0;
  return cell;
}

json numberOrNull(double v) { return std::isnan(v) ? json() : json(v); }

double numberFromJson(const json& j) {
  return j.is_null() ? kNan : j.get<double>();
}

bool closeOrBothNan(double a, double b, double relTol, double absTol) {
  if (std::isnan(a) && std::isnan(b)) return true;
  if (std::isnan(a) || std::isnan(b)) return false;
  return std::abs(a - b) <= absTol + relTol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

int effectiveThreads(int requested) {
  int n = requested > 0 ? requested : omp_get_max_threads();
  if (const char* env = std::getenv("GALINS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      n = std::min(n, static_cast<int>(cap));
    }
  }
  return std::max(1, n);
}

std::string runDirName(double delayMs, int run) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "delay_%gms/run_%03d", delayMs, run);
  return buf;
}

std::string filterFileStem(const std::string& filter) {
  std::string stem = filter;
  std::replace(stem.begin(), stem.end(), ':', '_');
  return stem;
}

namespace {

/// One (delay, run) task: synthesize the log once, run every filter on it,
/// emit per-run CSVs when asked. Tasks share nothing, so both drivers below
/// produce the same slices in any execution order.
void runOneTask(const RunConfig& cfg, const std::vector<FilterSpec>& specs,
                int d, int run, double tFinal,
                std::vector<std::vector<std::vector<RunSlice>>>& slices) {
  const uint64_t seed = runSeed(cfg.baseSeed, run);
  SensorConfig sensors = cfg.sensors;
  sensors.delay = cfg.delaysMs[d] / 1000.0;
  const SimLog log = synthesize(cfg.traj, sensors, seed);
  const RunInput in = makeRunInput(log);

  for (size_t f = 0; f < specs.size(); ++f) {
    const RunOutput out = runFilter(in, specs[f], cfg.tuning, seed,
                                    /*perturbInit=*/true,
                                    cfg.apeDivergenceThreshold);
    RunMeta meta;
    meta.run = run;
    meta.seed = seed;
    meta.diverged = out.diverged;
    meta.divergedAt = out.divergedAt;
    meta.reason = out.divergenceReason;
    slices[d][f][run] =
        sliceFromSeries(out.errors, meta, out.wallSeconds, tFinal);

    if (cfg.emitRuns) {
      const std::filesystem::path dir =
          std::filesystem::path(cfg.outDir) / runDirName(cfg.delaysMs[d], run);
      const std::string stem = filterFileStem(specs[f].name);
      writeEstimateCsv((dir / ("estimate_" + stem + ".csv")).string(),
                       out.estimates);
      writeErrorCsv((dir / ("error_" + stem + ".csv")).string(), out.errors);
    }
  }
}

MonteCarloResult runBatch(const RunConfig& cfg, bool parallel) {
  validateConfig(cfg);
  if (cfg.scenario != Scenario::Simulate) {
    throw std::invalid_argument("montecarlo: only the simulate scenario");
  }
  const auto started = std::chrono::steady_clock::now();

  std::vector<FilterSpec> specs;
  for (const std::string& f : cfg.filters) specs.push_back(parseFilterSpec(f));
  const double tFinal = finalWindowStart(cfg.traj.duration);

  const int nDelays = static_cast<int>(cfg.delaysMs.size());
  const int nFilters = static_cast<int>(specs.size());
  const int nTasks = nDelays * cfg.runs;

  // slices[delay][filter][run]
  std::vector<std::vector<std::vector<RunSlice>>> slices(
      nDelays, std::vector<std::vector<RunSlice>>(
                   nFilters, std::vector<RunSlice>(cfg.runs)));

  if (cfg.emitRuns) {
    for (int d = 0; d < nDelays; ++d) {
      for (int run = 0; run < cfg.runs; ++run) {
        std::filesystem::create_directories(
            std::filesystem::path(cfg.outDir) /
            runDirName(cfg.delaysMs[d], run));
      }
    }
  }

  if (parallel) {
    const int threads = effectiveThreads(cfg.threads);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int task = 0; task < nTasks; ++task) {
      runOneTask(cfg, specs, task / cfg.runs, task % cfg.runs, tFinal, slices);
    }
  } else {
    for (int task = 0; task < nTasks; ++task) {
      runOneTask(cfg, specs, task / cfg.runs, task % cfg.runs, tFinal, slices);
    }
  }

  MonteCarloResult res;
  for (int d = 0; d < nDelays; ++d) {
    for (int f = 0; f < nFilters; ++f) {
      res.cells.push_back(
          reduceCell(cfg.delaysMs[d], specs[f].name, slices[d][f]));
    }
  }
  res.wallSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return res;
}

}  // namespace

MonteCarloResult runMonteCarlo(const RunConfig& cfg) {
  return runBatch(cfg, /*parallel=*/true);
}

MonteCarloResult runMonteCarloSerial(const RunConfig& cfg) {
  return runBatch(cfg, /*parallel=*/false);
}

std::string summaryToJson(const RunConfig& cfg, const MonteCarloResult& res,
                          bool includeWall) {
  json cells = json::array();
  for (const CellSummary& c : res.cells) {
    json meta = json::array();
    for (const RunMeta& m : c.runMeta) {
      json row{{"run", m.run},
               {"seed", m.seed},
               {"diverged", m.diverged},
               {"diverged_at", m.divergedAt},
               {"reason", m.reason}};
      meta.push_back(std::move(row));
    }
    json cell{{"delay_ms", c.delayMs},
              {"filter", c.filter},
              {"runs", c.runs},
              {"diverged", c.diverged},
              {"rmse_rot_deg", numberOrNull(c.rmseRotDeg)},
              {"rmse_vel", numberOrNull(c.rmseVel)},
              {"rmse_pos", numberOrNull(c.rmsePos)},
              {"rmse_delay_ms", numberOrNull(c.rmseDelayMs)},
              {"nees_median", numberOrNull(c.neesMedian)},
              {"nees_p25", numberOrNull(c.neesP25)},
              {"nees_p75", numberOrNull(c.neesP75)},
              {"nees_median_final", numberOrNull(c.neesMedianFinal)},
              {"ade_median_final_ms", numberOrNull(c.adeMedianFinalMs)},
              {"run_meta", std::move(meta)}};
    if (includeWall) cell["wall_seconds"] = c.wallSeconds;
    cells.push_back(std::move(cell));
  }
  json doc{{"config", json::parse(printConfig(cfg))}, {"cells", std::move(cells)}};
  if (includeWall) doc["wall_seconds"] = res.wallSeconds;
  return doc.dump(2) + "\n";
}

MonteCarloResult summaryFromJson(const std::string& text, RunConfig* cfgOut) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("summary: ") + e.what());
  }
  MonteCarloResult res;
  try {
    if (cfgOut) *cfgOut = parseConfig(doc.at("config").dump());
    for (const json& cell : doc.at("cells")) {
      CellSummary c;
      c.delayMs = cell.at("delay_ms").get<double>();
      c.filter = cell.at("filter").get<std::string>();
      c.runs = cell.at("runs").get<int>();
      c.diverged = cell.at("diverged").get<int>();
      c.rmseRotDeg = numberFromJson(cell.at("rmse_rot_deg"));
      c.rmseVel = numberFromJson(cell.at("rmse_vel"));
      c.rmsePos = numberFromJson(cell.at("rmse_pos"));
      c.rmseDelayMs = numberFromJson(cell.at("rmse_delay_ms"));
      c.neesMedian = numberFromJson(cell.at("nees_median"));
      c.neesP25 = numberFromJson(cell.at("nees_p25"));
      c.neesP75 = numberFromJson(cell.at("nees_p75"));
      c.neesMedianFinal = numberFromJson(cell.at("nees_median_final"));
      c.adeMedianFinalMs = numberFromJson(cell.at("ade_median_final_ms"));
      if (cell.contains("wall_seconds")) {
        c.wallSeconds = cell.at("wall_seconds").get<double>();
      }
      for (const json& m : cell.at("run_meta")) {
        RunMeta meta;
        meta.run = m.at("run").get<int>();
        meta.seed = m.at("seed").get<uint64_t>();
        meta.diverged = m.at("diverged").get<bool>();
        meta.divergedAt = m.at("diverged_at").get<double>();
        meta.reason = m.at("reason").get<std::string>();
        c.runMeta.push_back(std::move(meta));
      }
      res.cells.push_back(std::move(c));
    }
    if (doc.contains("wall_seconds")) {
      res.wallSeconds = doc.at("wall_seconds").get<double>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("summary: ") + e.what());
  }
  return res;
}

MonteCarloResult recomputeAggregates(const RunConfig& cfg,
                                     const MonteCarloResult& meta,
                                     const std::string& baseDir) {
  const double tFinal = finalWindowStart(cfg.traj.duration);
  MonteCarloResult res;
  for (const CellSummary& cell : meta.cells) {
    std::vector<RunSlice> slices;
    for (const RunMeta& m : cell.runMeta) {
      const std::filesystem::path dir =
          std::filesystem::path(baseDir) / runDirName(cell.delayMs, m.run);
      const std::string stem = filterFileStem(cell.filter);
      const ErrorSeries errors =
          readErrorCsv((dir / ("error_" + stem + ".csv")).string());
      slices.push_back(sliceFromSeries(errors, m, 0.0, tFinal));
    }
    res.cells.push_back(reduceCell(cell.delayMs, cell.filter, slices));
  }
  return res;
}

bool summariesClose(const MonteCarloResult& a, const MonteCarloResult& b,
                    double relTol, double absTol) {
  if (a.cells.size() != b.cells.size()) return false;
  for (size_t i = 0; i < a.cells.size(); ++i) {
    const CellSummary& x = a.cells[i];
    const CellSummary& y = b.cells[i];
    if (x.filter != y.filter || x.delayMs != y.delayMs || x.runs != y.runs ||
        x.diverged != y.diverged) {
      return false;
    }
    const double xs[] = {x.rmseRotDeg, x.rmseVel,      x.rmsePos,
                         x.rmseDelayMs, x.neesMedian,  x.neesP25,
                         x.neesP75,     x.neesMedianFinal,
                         x.adeMedianFinalMs};
    const double ys[] = {y.rmseRotDeg, y.rmseVel,      y.rmsePos,
                         y.rmseDelayMs, y.neesMedian,  y.neesP25,
                         y.neesP75,     y.neesMedianFinal,
                         y.adeMedianFinalMs};
    for (int k = 0; k < 9; ++k) {
      if (!closeOrBothNan(xs[k], ys[k], relTol, absTol)) return false;
    }
  }
  return true;
}

}  // namespace galins
