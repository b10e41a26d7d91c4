#include "galins/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace galins {

namespace {

using nlohmann::json;

json vecToJson(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vecFromJson(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument(std::string("config: ") + key +
                                " must be a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
void maybe(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

void maybeVec(const json& j, const char* key, Vec3* out) {
  if (j.contains(key)) *out = vecFromJson(j.at(key), key);
}

const char* scenarioName(Scenario s) {
  switch (s) {
    case Scenario::Simulate: return "simulate";
    case Scenario::Replay: return "replay";
    case Scenario::TwoBody: return "twobody";
  }
  return "simulate";
}

Scenario scenarioFromName(const std::string& s) {
  if (s == "simulate") return Scenario::Simulate;
  if (s == "replay") return Scenario::Replay;
  if (s == "twobody") return Scenario::TwoBody;
  throw std::invalid_argument("config: unknown scenario '" + s + "'");
}

}  // namespace

FilterSpec parseFilterSpec(const std::string& text) {
  FilterSpec spec;
  spec.name = text;
  if (text == "eqf") {
    spec.kind = FilterKind::Eqf;
  } else if (text == "ekf-no-delay") {
    spec.kind = FilterKind::EkfNoDelay;
  } else if (text == "ekf-online") {
    spec.kind = FilterKind::EkfOnline;
  } else if (text.rfind("ekf-fixed:", 0) == 0) {
    spec.kind = FilterKind::EkfFixed;
    const std::string arg = text.substr(10);
    char* end = nullptr;
    spec.fixedDelay = std::strtod(arg.c_str(), &end);
    if (arg.empty() || end != arg.c_str() + arg.size()) {
      throw std::invalid_argument("filter: bad fixed delay '" + arg + "'");
    }
    if (spec.fixedDelay < 0.0) {
      throw std::invalid_argument("filter: fixed delay must be >= 0");
    }
  } else {
    throw std::invalid_argument("filter: unknown spec '" + text + "'");
  }
  return spec;
}

std::string printConfig(const RunConfig& cfg) {
  json traj{{"radius", cfg.traj.radius},
            {"rate", cfg.traj.rate},
            {"horiz_wave_amp", cfg.traj.horizWaveAmp},
            {"horiz_wave_freq", cfg.traj.horizWaveFreq},
            {"vert_wave_amp", cfg.traj.vertWaveAmp},
            {"vert_wave_freq", cfg.traj.vertWaveFreq},
            {"attitude_amp", cfg.traj.attitudeAmp},
            {"attitude_freq", cfg.traj.attitudeFreq},
            {"duration", cfg.traj.duration}};
  json sensors{{"imu_rate", cfg.sensors.imuRate},
               {"gnss_rate", cfg.sensors.gnssRate},
               {"delay", cfg.sensors.delay},
               {"gyro_noise_density", cfg.sensors.gyroNoiseDensity},
               {"accel_noise_density", cfg.sensors.accelNoiseDensity},
               {"gyro_bias_walk", cfg.sensors.gyroBiasWalk},
               {"accel_bias_walk", cfg.sensors.accelBiasWalk},
               {"gnss_pos_std", cfg.sensors.gnssPosStd},
               {"gyro_bias_init", vecToJson(cfg.sensors.gyroBiasInit)},
               {"accel_bias_init", vecToJson(cfg.sensors.accelBiasInit)},
               {"lever_arm", vecToJson(cfg.sensors.leverArm)},
               {"gravity", vecToJson(cfg.sensors.gravity)},
               {"earth_rate", vecToJson(cfg.sensors.earthRate)}};
  json tuning{{"gyro_noise", cfg.tuning.gyroNoise},
              {"accel_noise", cfg.tuning.accelNoise},
              {"gyro_walk", cfg.tuning.gyroWalk},
              {"accel_walk", cfg.tuning.accelWalk},
              {"virtual_walk", cfg.tuning.virtualWalk},
              {"delay_walk", cfg.tuning.delayWalk},
              {"measurement_std", cfg.tuning.measurementStd},
              {"init_rot_std", cfg.tuning.initRotStd},
              {"init_vel_std", cfg.tuning.initVelStd},
              {"init_pos_std", cfg.tuning.initPosStd},
              {"init_gyro_bias_std", cfg.tuning.initGyroBiasStd},
              {"init_accel_bias_std", cfg.tuning.initAccelBiasStd},
              {"init_delay_std", cfg.tuning.initDelayStd},
              {"virtual_bias_std", cfg.tuning.virtualBiasStd},
              {"buffer_horizon", cfg.tuning.bufferHorizon},
              {"observer_gain", cfg.tuning.observerGain},
              {"observer_gain_blocks", cfg.tuning.observerGainBlocks}};
  json doc{{"version", cfg.version},
           {"scenario", scenarioName(cfg.scenario)},
           {"filters", cfg.filters},
           {"trajectory", traj},
           {"sensors", sensors},
           {"tuning", tuning},
           {"log_dir", cfg.logDir},
           {"out_dir", cfg.outDir},
           {"runs", cfg.runs},
           {"base_seed", cfg.baseSeed},
           {"emit_runs", cfg.emitRuns},
           {"perturb_init", cfg.perturbInit},
           {"delays_ms", cfg.delaysMs},
           {"ape_divergence_threshold", cfg.apeDivergenceThreshold},
           {"threads", cfg.threads}};
  return doc.dump(2) + "\n";
}

RunConfig parseConfig(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  try {
    maybe(doc, "version", &cfg.version);
    if (cfg.version != 1) {
      throw std::invalid_argument("config: unsupported schema version " +
                                  std::to_string(cfg.version));
    }
    if (doc.contains("scenario")) {
      cfg.scenario = scenarioFromName(doc.at("scenario").get<std::string>());
    }
    maybe(doc, "filters", &cfg.filters);
    maybe(doc, "log_dir", &cfg.logDir);
    maybe(doc, "out_dir", &cfg.outDir);
    maybe(doc, "runs", &cfg.runs);
    maybe(doc, "base_seed", &cfg.baseSeed);
    maybe(doc, "emit_runs", &cfg.emitRuns);
    maybe(doc, "perturb_init", &cfg.perturbInit);
    maybe(doc, "delays_ms", &cfg.delaysMs);
    maybe(doc, "ape_divergence_threshold", &cfg.apeDivergenceThreshold);
    maybe(doc, "threads", &cfg.threads);
    if (doc.contains("trajectory")) {
      const json& t = doc.at("trajectory");
      maybe(t, "radius", &cfg.traj.radius);
      maybe(t, "rate", &cfg.traj.rate);
      maybe(t, "horiz_wave_amp", &cfg.traj.horizWaveAmp);
      maybe(t, "horiz_wave_freq", &cfg.traj.horizWaveFreq);
      maybe(t, "vert_wave_amp", &cfg.traj.vertWaveAmp);
      maybe(t, "vert_wave_freq", &cfg.traj.vertWaveFreq);
      maybe(t, "attitude_amp", &cfg.traj.attitudeAmp);
      maybe(t, "attitude_freq", &cfg.traj.attitudeFreq);
      maybe(t, "duration", &cfg.traj.duration);
    }
    if (doc.contains("sensors")) {
      const json& s = doc.at("sensors");
      maybe(s, "imu_rate", &cfg.sensors.imuRate);
      maybe(s, "gnss_rate", &cfg.sensors.gnssRate);
      maybe(s, "delay", &cfg.sensors.delay);
      maybe(s, "gyro_noise_density", &cfg.sensors.gyroNoiseDensity);
      maybe(s, "accel_noise_density", &cfg.sensors.accelNoiseDensity);
      maybe(s, "gyro_bias_walk", &cfg.sensors.gyroBiasWalk);
      maybe(s, "accel_bias_walk", &cfg.sensors.accelBiasWalk);
      maybe(s, "gnss_pos_std", &cfg.sensors.gnssPosStd);
      maybeVec(s, "gyro_bias_init", &cfg.sensors.gyroBiasInit);
      maybeVec(s, "accel_bias_init", &cfg.sensors.accelBiasInit);
      maybeVec(s, "lever_arm", &cfg.sensors.leverArm);
      maybeVec(s, "gravity", &cfg.sensors.gravity);
      maybeVec(s, "earth_rate", &cfg.sensors.earthRate);
    }
    if (doc.contains("tuning")) {
      const json& t = doc.at("tuning");
      maybe(t, "gyro_noise", &cfg.tuning.gyroNoise);
      maybe(t, "accel_noise", &cfg.tuning.accelNoise);
      maybe(t, "gyro_walk", &cfg.tuning.gyroWalk);
      maybe(t, "accel_walk", &cfg.tuning.accelWalk);
      maybe(t, "virtual_walk", &cfg.tuning.virtualWalk);
      maybe(t, "delay_walk", &cfg.tuning.delayWalk);
      maybe(t, "measurement_std", &cfg.tuning.measurementStd);
      maybe(t, "init_rot_std", &cfg.tuning.initRotStd);
      maybe(t, "init_vel_std", &cfg.tuning.initVelStd);
      maybe(t, "init_pos_std", &cfg.tuning.initPosStd);
      maybe(t, "init_gyro_bias_std", &cfg.tuning.initGyroBiasStd);
      maybe(t, "init_accel_bias_std", &cfg.tuning.initAccelBiasStd);
      maybe(t, "init_delay_std", &cfg.tuning.initDelayStd);
      maybe(t, "virtual_bias_std", &cfg.tuning.virtualBiasStd);
      maybe(t, "buffer_horizon", &cfg.tuning.bufferHorizon);
      maybe(t, "observer_gain", &cfg.tuning.observerGain);
      maybe(t, "observer_gain_blocks", &cfg.tuning.observerGainBlocks);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig loadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseConfig(ss.str());
}

void validateConfig(const RunConfig& cfg) {
  if (cfg.scenario == Scenario::Replay && cfg.logDir.empty()) {
    throw std::invalid_argument("config: replay scenario requires log_dir");
  }
  if (cfg.filters.empty()) {
    throw std::invalid_argument("config: at least one filter required");
  }
  for (const std::string& f : cfg.filters) parseFilterSpec(f);
  if (cfg.runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (!(cfg.traj.duration > 0.0)) {
    throw std::invalid_argument("config: duration must be positive");
  }
  if (!(cfg.sensors.imuRate > 0.0) || !(cfg.sensors.gnssRate > 0.0)) {
    throw std::invalid_argument("config: sensor rates must be positive");
  }
  if (cfg.sensors.delay < 0.0) {
    throw std::invalid_argument("config: sensor delay must be >= 0");
  }
  for (double d : cfg.delaysMs) {
    if (d < 0.0) throw std::invalid_argument("config: delays_ms must be >= 0");
  }
  if (!(cfg.tuning.bufferHorizon > 0.0)) {
    throw std::invalid_argument("config: buffer horizon must be positive");
  }
  const size_t blocks = cfg.tuning.observerGainBlocks.size();
  if (blocks != 0 && blocks != 4) {
    throw std::invalid_argument(
        "config: observer_gain_blocks needs exactly 4 entries");
  }
}

}  // namespace galins
