#include "galins/csv_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace galins {

namespace {

constexpr const char* kImuHeader = "t,wx,wy,wz,ax,ay,az";
constexpr const char* kGnssHeader = "t_arrival,px,py,pz";
constexpr const char* kTruthHeader = "t,qw,qx,qy,qz,vx,vy,vz,px,py,pz,delay";
constexpr const char* kEstimateHeader =
    "t,qw,qx,qy,qz,vx,vy,vz,px,py,pz,delta_hat,nees";
constexpr const char* kErrorHeader = "t,are,ave,ape,ade,nees,updated";

std::string formatFixed(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9f", x);
  return buf;
}

void appendFields(std::string* line, std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!line->empty()) line->push_back(',');
    line->append(formatFixed(x));
  }
}

void writeLines(const std::string& path, const std::string& header,
                const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError(path + ": cannot open for writing");
  out << header << '\n';
  for (const std::string& r : rows) out << r << '\n';
  if (!out) throw CsvError(path + ": write failed");
}

Eigen::Quaterniond canonicalQuat(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

class CsvReader {
 public:
  CsvReader(const std::string& path, const std::string& header) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) throw CsvError(path + ": cannot open");
    std::string first;
    if (!std::getline(in_, first)) throw CsvError(path + ": empty file");
    ++lineNo_;
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != header) {
      throw CsvError(path + ":1: expected header '" + header + "', got '" +
                     first + "'");
    }
  }

  /// Next data row split into exactly n numeric fields; false at EOF.
  bool next(int n, std::vector<double>* fields) {
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++lineNo_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fields->clear();
    size_t pos = 0;
    while (true) {
      const size_t comma = line.find(',', pos);
      const std::string cell =
          line.substr(pos, comma == std::string::npos ? comma : comma - pos);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        fail("malformed field '" + cell + "'");
      }
      fields->push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (static_cast<int>(fields->size()) != n) {
      fail("expected " + std::to_string(n) + " fields, got " +
           std::to_string(fields->size()));
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw CsvError(path_ + ":" + std::to_string(lineNo_) + ": " + why);
  }

 private:
  std::string path_;
  std::ifstream in_;
  int lineNo_ = 0;
};

}  // namespace

void writeImuCsv(const std::string& path, const std::vector<ImuSample>& imu) {
  std::vector<std::string> rows;
  rows.reserve(imu.size());
  for (const ImuSample& s : imu) {
    std::string line;
    appendFields(&line, {s.t, s.omega.x(), s.omega.y(), s.omega.z(),
                         s.accel.x(), s.accel.y(), s.accel.z()});
    rows.push_back(std::move(line));
  }
  writeLines(path, kImuHeader, rows);
}

void writeGnssCsv(const std::string& path, const std::vector<GnssSample>& gnss) {
  std::vector<std::string> rows;
  rows.reserve(gnss.size());
  for (const GnssSample& s : gnss) {
    std::string line;
    appendFields(&line, {s.tArrival, s.pos.x(), s.pos.y(), s.pos.z()});
    rows.push_back(std::move(line));
  }
  writeLines(path, kGnssHeader, rows);
}

void writeTruthCsv(const std::string& path, const std::vector<TruthSample>& truth,
                   double delay) {
  std::vector<std::string> rows;
  rows.reserve(truth.size());
  for (const TruthSample& s : truth) {
    const Eigen::Quaterniond q = canonicalQuat(s.R);
    std::string line;
    appendFields(&line, {s.t, q.w(), q.x(), q.y(), q.z(), s.v.x(), s.v.y(),
                         s.v.z(), s.p.x(), s.p.y(), s.p.z(), delay});
    rows.push_back(std::move(line));
  }
  writeLines(path, kTruthHeader, rows);
}

void writeEstimateCsv(const std::string& path,
                      const std::vector<EstimateRecord>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const EstimateRecord& s : rows) {
    std::string line;
    appendFields(&line,
                 {s.t, s.q.w(), s.q.x(), s.q.y(), s.q.z(), s.v.x(), s.v.y(),
                  s.v.z(), s.p.x(), s.p.y(), s.p.z(), s.deltaHat, s.nees});
    lines.push_back(std::move(line));
  }
  writeLines(path, kEstimateHeader, lines);
}

void writeErrorCsv(const std::string& path, const ErrorSeries& series) {
  std::vector<std::string> lines;
  lines.reserve(series.steps.size());
  size_t upd = 0;
  for (const ErrorRecord& s : series.steps) {
    const bool fresh = upd < series.neesAtUpdates.size() &&
                       series.neesAtUpdates[upd].first <= s.t;
    if (fresh) ++upd;
    std::string line;
    appendFields(&line, {s.t, s.are, s.ave, s.ape, s.ade, s.nees,
                         fresh ? 1.0 : 0.0});
    lines.push_back(std::move(line));
  }
  writeLines(path, kErrorHeader, lines);
}

std::vector<ImuSample> readImuCsv(const std::string& path) {
  CsvReader r(path, kImuHeader);
  std::vector<ImuSample> out;
  std::vector<double> f;
  while (r.next(7, &f)) {
    if (!out.empty() && f[0] <= out.back().t) r.fail("non-monotone timestamp");
    ImuSample s;
    s.t = f[0];
    s.omega = Vec3(f[1], f[2], f[3]);
    s.accel = Vec3(f[4], f[5], f[6]);
    out.push_back(s);
  }
  return out;
}

std::vector<GnssSample> readGnssCsv(const std::string& path) {
  CsvReader r(path, kGnssHeader);
  std::vector<GnssSample> out;
  std::vector<double> f;
  while (r.next(4, &f)) {
    if (!out.empty() && f[0] <= out.back().tArrival) {
      r.fail("non-monotone timestamp");
    }
    out.push_back(GnssSample{f[0], Vec3(f[1], f[2], f[3])});
  }
  return out;
}

void readTruthCsv(const std::string& path, std::vector<TruthSample>* truth,
                  std::vector<double>* delay) {
  CsvReader r(path, kTruthHeader);
  truth->clear();
  delay->clear();
  std::vector<double> f;
  while (r.next(12, &f)) {
    if (!truth->empty() && f[0] <= truth->back().t) {
      r.fail("non-monotone timestamp");
    }
    TruthSample s;
    s.t = f[0];
    Eigen::Quaterniond q(f[1], f[2], f[3], f[4]);
    if (std::abs(q.norm() - 1.0) > 1e-6) r.fail("quaternion not unit");
    s.R = q.toRotationMatrix();
    s.v = Vec3(f[5], f[6], f[7]);
    s.p = Vec3(f[8], f[9], f[10]);
    truth->push_back(s);
    delay->push_back(f[11]);
  }
}

std::vector<EstimateRecord> readEstimateCsv(const std::string& path) {
  CsvReader r(path, kEstimateHeader);
  std::vector<EstimateRecord> out;
  std::vector<double> f;
  while (r.next(13, &f)) {
    EstimateRecord s;
    s.t = f[0];
    s.q = Eigen::Quaterniond(f[1], f[2], f[3], f[4]);
    s.v = Vec3(f[5], f[6], f[7]);
    s.p = Vec3(f[8], f[9], f[10]);
    s.deltaHat = f[11];
    s.nees = f[12];
    out.push_back(s);
  }
  return out;
}

ErrorSeries readErrorCsv(const std::string& path) {
  CsvReader r(path, kErrorHeader);
  ErrorSeries out;
  std::vector<double> f;
  while (r.next(7, &f)) {
    ErrorRecord s;
    s.t = f[0];
    s.are = f[1];
    s.ave = f[2];
    s.ape = f[3];
    s.ade = f[4];
    s.nees = f[5];
    out.steps.push_back(s);
    if (f[6] != 0.0) out.neesAtUpdates.emplace_back(s.t, s.nees);
  }
  return out;
}

void writeSimLog(const std::string& dir, const SimLog& log) {
  std::filesystem::create_directories(dir);
  writeImuCsv(dir + "/imu.csv", log.imu);
  writeGnssCsv(dir + "/gnss.csv", log.gnss);
  writeTruthCsv(dir + "/truth.csv", log.truth, log.delay);
}

IngestedLog ingestLog(const std::string& dir) {
  IngestedLog out;
  const std::vector<ImuSample> raw = readImuCsv(dir + "/imu.csv");
  if (raw.size() < 2) throw CsvError(dir + "/imu.csv: need at least 2 samples");

  const double t0 = raw.front().t;
  const double dt = (raw.back().t - t0) / static_cast<double>(raw.size() - 1);
  if (!(dt > 0.0)) throw CsvError(dir + "/imu.csv: zero-length time span");
  for (size_t i = 0; i + 1 < raw.size(); ++i) {
    const double gap = raw[i + 1].t - raw[i].t;
    if (std::abs(gap - dt) > 0.01 * dt) {
      throw CsvError(dir + "/imu.csv: IMU rate jitter above 1% at row " +
                     std::to_string(i + 3));
    }
  }
  out.imu.dt = dt;
  out.imu.samples = raw;
  for (size_t i = 0; i < out.imu.samples.size(); ++i) {
    out.imu.samples[i].t = t0 + static_cast<double>(i) * dt;
  }

  for (const GnssSample& g : readGnssCsv(dir + "/gnss.csv")) {
    if (g.tArrival < t0) {
      ++out.droppedGnss;
    } else {
      out.gnss.push_back(g);
    }
  }
  if (out.droppedGnss > 0) {
    std::cerr << "warning: dropped " << out.droppedGnss
              << " GNSS rows arriving before the first IMU sample\n";
  }

  const std::string truthPath = dir + "/truth.csv";
  if (std::filesystem::exists(truthPath)) {
    readTruthCsv(truthPath, &out.truth, &out.truthDelay);
    out.hasTruth = true;
  }
  return out;
}

}  // namespace galins
