// Command-line front end: synthesize logs, run filters on them, sweep
// Monte Carlo batches, and recompute summaries from emitted CSVs.
//
// Exit codes: 0 success, 1 configuration error, 2 filter divergence (or a
// summary that no longer matches its CSVs), 3 I/O error.
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "galins/config.hpp"
#include "galins/csv_io.hpp"
#include "galins/montecarlo.hpp"
#include "galins/rundriver.hpp"

namespace {

using namespace galins;

namespace fs = std::filesystem;

void bindConfig(CLI::App& app, RunConfig& cfg, std::string& scenarioName,
                std::vector<std::vector<double>*>& vec3Slots,
                std::vector<Vec3*>& vec3Targets) {
  auto opt = [&](const char* flag, auto& field, const char* help) {
    app.add_option(flag, field, help)->capture_default_str();
  };
  auto vec3 = [&](const char* flag, Vec3& target, const char* help) {
    auto* slot = new std::vector<double>();
    vec3Slots.push_back(slot);
    vec3Targets.push_back(&target);
    app.add_option(flag, *slot, help)->delimiter(',')->expected(3);
  };

  app.add_option("--scenario", scenarioName,
                 "simulate | replay | twobody")->capture_default_str();
  app.add_option("--filters", cfg.filters,
                 "filter list: eqf, ekf-no-delay, ekf-fixed:<s>, ekf-online")
      ->delimiter(',')
      ->capture_default_str();

  opt("--radius", cfg.traj.radius, "circle radius [m]");
  opt("--rate", cfg.traj.rate, "circle rate [rad/s]");
  opt("--horiz-wave-amp", cfg.traj.horizWaveAmp, "horizontal ripple [m]");
  opt("--horiz-wave-freq", cfg.traj.horizWaveFreq, "horizontal ripple [rad/s]");
  opt("--vert-wave-amp", cfg.traj.vertWaveAmp, "vertical ripple [m]");
  opt("--vert-wave-freq", cfg.traj.vertWaveFreq, "vertical ripple [rad/s]");
  opt("--attitude-amp", cfg.traj.attitudeAmp, "roll/pitch excitation [rad]");
  opt("--attitude-freq", cfg.traj.attitudeFreq, "roll/pitch excitation [rad/s]");
  opt("--duration", cfg.traj.duration, "trajectory length [s]");

  opt("--imu-rate", cfg.sensors.imuRate, "inertial rate [Hz]");
  opt("--gnss-rate", cfg.sensors.gnssRate, "position fix rate [Hz]");
  opt("--delay", cfg.sensors.delay, "true sensing delay [s]");
  opt("--gyro-noise-density", cfg.sensors.gyroNoiseDensity,
      "gyro noise [rad/s/sqrt(Hz)]");
  opt("--accel-noise-density", cfg.sensors.accelNoiseDensity,
      "accel noise [m/s^2/sqrt(Hz)]");
  opt("--gyro-bias-walk", cfg.sensors.gyroBiasWalk, "gyro bias walk");
  opt("--accel-bias-walk", cfg.sensors.accelBiasWalk, "accel bias walk");
  opt("--gnss-pos-std", cfg.sensors.gnssPosStd, "fix noise std [m]");
  vec3("--gyro-bias-init", cfg.sensors.gyroBiasInit, "initial gyro bias");
  vec3("--accel-bias-init", cfg.sensors.accelBiasInit, "initial accel bias");
  vec3("--lever-arm", cfg.sensors.leverArm, "antenna offset, body frame [m]");
  vec3("--gravity", cfg.sensors.gravity, "gravity vector [m/s^2]");
  vec3("--earth-rate", cfg.sensors.earthRate, "earth rotation [rad/s]");

  opt("--gyro-noise", cfg.tuning.gyroNoise, "filter gyro density (<0 copies sensor)");
  opt("--accel-noise", cfg.tuning.accelNoise, "filter accel density (<0 copies sensor)");
  opt("--gyro-walk", cfg.tuning.gyroWalk, "filter gyro walk (<0 copies sensor)");
  opt("--accel-walk", cfg.tuning.accelWalk, "filter accel walk (<0 copies sensor)");
  opt("--virtual-walk", cfg.tuning.virtualWalk, "virtual bias walk density");
  opt("--delay-walk", cfg.tuning.delayWalk, "believed-delay walk density");
  opt("--measurement-std", cfg.tuning.measurementStd,
      "fix std used by the filter (<0 copies sensor)");
  opt("--init-rot-std", cfg.tuning.initRotStd, "prior rotation std [rad]");
  opt("--init-vel-std", cfg.tuning.initVelStd, "prior velocity std [m/s]");
  opt("--init-pos-std", cfg.tuning.initPosStd, "prior position std [m]");
  opt("--init-gyro-bias-std", cfg.tuning.initGyroBiasStd, "prior gyro bias std");
  opt("--init-accel-bias-std", cfg.tuning.initAccelBiasStd, "prior accel bias std");
  opt("--init-delay-std", cfg.tuning.initDelayStd, "prior delay std [s]");
  opt("--virtual-bias-std", cfg.tuning.virtualBiasStd, "prior virtual bias std");
  opt("--buffer-horizon", cfg.tuning.bufferHorizon, "preintegration window [s]");
  opt("--observer-gain", cfg.tuning.observerGain, "two-body scalar gain");
  app.add_option("--observer-gain-blocks", cfg.tuning.observerGainBlocks,
                 "two-body per-block gains (rot,vel,pos,clock)")
      ->delimiter(',')
      ->expected(4);

  app.add_option("--log-dir,--log", cfg.logDir, "replay input directory");
  app.add_option("--out-dir,--out", cfg.outDir, "output directory")
      ->capture_default_str();
  opt("--runs", cfg.runs, "Monte Carlo runs per delay");
  app.add_option("--base-seed,--seed", cfg.baseSeed, "seed of run 0")
      ->capture_default_str();
  app.add_flag("--emit-runs,!--no-emit-runs", cfg.emitRuns,
               "write per-run CSV files");
  app.add_flag("--perturb-init,!--no-perturb-init", cfg.perturbInit,
               "draw the initial estimate from the priors");
  app.add_option("--delays-ms,--delay-ms", cfg.delaysMs,
                 "Monte Carlo delay sweep [ms]")
      ->delimiter(',')
      ->capture_default_str();
  opt("--ape-divergence-threshold", cfg.apeDivergenceThreshold,
      "position error flagged as divergence [m]");
  opt("--threads", cfg.threads, "worker cap (0 = runtime default)");
}

void applyVec3(const std::vector<std::vector<double>*>& slots,
               const std::vector<Vec3*>& targets) {
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]->size() == 3) {
      *targets[i] = Vec3((*slots[i])[0], (*slots[i])[1], (*slots[i])[2]);
    }
    delete slots[i];
  }
}

void writeText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) {
    throw CsvError("cannot write " + path);
  }
}

int doSimulate(const RunConfig& cfg) {
  const SimLog log = synthesize(cfg.traj, cfg.sensors, cfg.baseSeed);
  fs::create_directories(cfg.outDir);
  writeSimLog(cfg.outDir, log);
  std::cerr << "wrote " << log.imu.size() << " imu samples, "
            << log.gnss.size() << " fixes to " << cfg.outDir << "\n";
  return 0;
}

int doRun(const RunConfig& cfg) {
  fs::create_directories(cfg.outDir);
  if (cfg.scenario == Scenario::TwoBody) {
    const RunOutput out = runTwoBody(cfg, cfg.baseSeed);
    writeEstimateCsv((fs::path(cfg.outDir) / "estimate_twobody.csv").string(),
                     out.estimates);
    writeErrorCsv((fs::path(cfg.outDir) / "error_twobody.csv").string(),
                  out.errors);
    return 0;
  }

  RunInput in;
  if (cfg.scenario == Scenario::Replay) {
    in = makeRunInput(ingestLog(cfg.logDir), cfg.sensors);
  } else {
    in = makeRunInput(synthesize(cfg.traj, cfg.sensors, cfg.baseSeed));
  }

  bool anyDiverged = false;
  for (const std::string& name : cfg.filters) {
    const FilterSpec spec = parseFilterSpec(name);
    const RunOutput out =
        runFilter(in, spec, cfg.tuning, cfg.baseSeed, cfg.perturbInit,
                  cfg.apeDivergenceThreshold);
    const std::string stem = filterFileStem(spec.name);
    writeEstimateCsv(
        (fs::path(cfg.outDir) / ("estimate_" + stem + ".csv")).string(),
        out.estimates);
    if (!out.errors.steps.empty()) {
      writeErrorCsv((fs::path(cfg.outDir) / ("error_" + stem + ".csv")).string(),
                    out.errors);
    } else {
      std::cerr << spec.name << ": no truth available, error series skipped\n";
    }
    if (out.diverged) {
      anyDiverged = true;
      std::cerr << spec.name << ": diverged at t=" << out.divergedAt << " ("
                << out.divergenceReason << ")\n";
    }
  }
  return anyDiverged ? 2 : 0;
}

int doMonteCarlo(const RunConfig& cfg) {
  const MonteCarloResult res = runMonteCarlo(cfg);
  fs::create_directories(cfg.outDir);
  writeText((fs::path(cfg.outDir) / "summary.json").string(),
            summaryToJson(cfg, res, /*includeWall=*/true));
  int diverged = 0;
  for (const CellSummary& c : res.cells) diverged += c.diverged;
  std::cerr << res.cells.size() << " cells, " << diverged
            << " diverged runs, summary in " << cfg.outDir << "\n";
  return 0;
}

int doMetrics(const std::string& summaryPath) {
  std::ifstream inFile(summaryPath);
  if (!inFile) throw CsvError("cannot open " + summaryPath);
  std::string text((std::istreambuf_iterator<char>(inFile)),
                   std::istreambuf_iterator<char>());
  RunConfig echoed;
  const MonteCarloResult original = summaryFromJson(text, &echoed);
  const MonteCarloResult recomputed = recomputeAggregates(
      echoed, original, fs::path(summaryPath).parent_path().string());
  const std::string outPath =
      (fs::path(summaryPath).parent_path() / "summary_recomputed.json").string();
  writeText(outPath, summaryToJson(echoed, recomputed, /*includeWall=*/false));
  if (!summariesClose(original, recomputed)) {
    std::cerr << "recomputed aggregates disagree with " << summaryPath << "\n";
    return 2;
  }
  std::cerr << "recomputed aggregates match, wrote " << outPath << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0) {
      try {
        cfg = loadConfigFile(argv[i + 1]);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }

  CLI::App app{"Delay-aware inertial navigation filters"};
  app.fallthrough();
  std::string configPath;
  app.add_option("--config", configPath, "JSON config file (flags override)");
  bool printCfg = false;
  app.add_flag("--print-config", printCfg, "print the effective config and exit");
  std::string scenarioName;
  std::string filterOne;
  app.add_option("--filter", filterOne, "single filter shorthand");
  std::vector<std::vector<double>*> vec3Slots;
  std::vector<Vec3*> vec3Targets;
  bindConfig(app, cfg, scenarioName, vec3Slots, vec3Targets);

  CLI::App* sim = app.add_subcommand("simulate", "emit imu/gnss/truth CSVs");
  CLI::App* run = app.add_subcommand("run", "run the configured filters on one log");
  CLI::App* mc = app.add_subcommand("montecarlo", "seeded batch across delays");
  CLI::App* met = app.add_subcommand("metrics", "recompute a summary from CSVs");
  std::string summaryPath;
  met->add_option("--summary", summaryPath, "summary.json to recompute");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  applyVec3(vec3Slots, vec3Targets);
  if (!filterOne.empty()) cfg.filters = {filterOne};
  try {
    if (!scenarioName.empty()) {
      if (scenarioName == "simulate") cfg.scenario = Scenario::Simulate;
      else if (scenarioName == "replay") cfg.scenario = Scenario::Replay;
      else if (scenarioName == "twobody") cfg.scenario = Scenario::TwoBody;
      else throw std::invalid_argument("unknown scenario '" + scenarioName + "'");
    }
    if (run->parsed() && !cfg.logDir.empty() && cfg.scenario == Scenario::Simulate) {
      cfg.scenario = Scenario::Replay;
    }

    if (printCfg) {
      std::cout << printConfig(cfg);
      return 0;
    }
    if (sim->parsed()) {
      validateConfig(cfg);
      return doSimulate(cfg);
    }
    if (run->parsed()) {
      validateConfig(cfg);
      return doRun(cfg);
    }
    if (mc->parsed()) {
      return doMonteCarlo(cfg);
    }
    if (met->parsed()) {
      if (summaryPath.empty()) {
        summaryPath = (fs::path(cfg.outDir) / "summary.json").string();
      }
      return doMetrics(summaryPath);
    }
    std::cerr << app.help();
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FilterDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
