#include "galins/preintegration.hpp"

#include <cmath>
#include <stdexcept>

namespace galins {

Gal3 earthPreintegration(double delta, const Vec10& gN) {
  return Gal3::exp(delta * gN);
}

PreintBuffer::PreintBuffer(double horizon, double dt) : horizon_(horizon), dt_(dt) {
  if (dt <= 0.0) throw std::invalid_argument("PreintBuffer: dt must be positive");
  if (horizon <= 0.0) throw std::invalid_argument("PreintBuffer: horizon must be positive");
  maxSteps_ = static_cast<int>(std::ceil(horizon / dt - 1e-9)) + 1;
}

void PreintBuffer::propagate(const Vec10& wCorrected, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("PreintBuffer: step dt must be positive");
  if (std::abs(dt - dt_) > 0.01 * dt_)
    throw std::invalid_argument("PreintBuffer: step dt deviates from nominal rate");
  if (std::abs(wCorrected(9) - 1.0) > 1e-12)
    throw std::invalid_argument("PreintBuffer: clock slot of the corrected input must be 1");

  const Gal3 step = Gal3::exp(wCorrected * dt_);
  for (Entry& e : entries_) {
    e.ups = e.ups * step;
    e.steps += 1;
  }
  entries_.push_front(Entry{1, step, wCorrected.segment<3>(0)});
  while (!entries_.empty() && entries_.back().steps > maxSteps_) entries_.pop_back();
}

PreintQuery PreintBuffer::query(double delta) const {
  if (entries_.empty()) throw std::runtime_error("PreintBuffer: query on empty buffer");

  PreintQuery out;
  double d = delta;
  if (d < 0.0) {
    d = 0.0;
    out.clamped = true;
  }
  const double top = maxAge();
  if (d > top) {
    d = top;
    out.clamped = true;
  }

  const double s = d / dt_;
  const int nearest = static_cast<int>(std::lround(s));
  if (std::abs(s - nearest) < 1e-9) {
    out.element = nearest == 0 ? Gal3::Identity() : entries_[nearest - 1].ups;
    out.omega = entries_[std::max(nearest, 1) - 1].omega;
    return out;
  }

  const int low = static_cast<int>(std::floor(s));
  const double alpha = s - low;
  const Gal3 lower = low == 0 ? Gal3::Identity() : entries_[low - 1].ups;
  const Gal3 upper = entries_[low].ups;
  out.element = lower * Gal3::exp(alpha * (lower.inverse() * upper).log());
  out.omega = entries_[low].omega;
  return out;
}

std::vector<std::pair<double, double>> PreintBuffer::agesAndClocks() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) out.emplace_back(e.steps * dt_, e.ups.t);
  return out;
}

Gal3 batchPreintegrate(const ImuWindow& window, double delta, const Vec10& bias) {
  if (window.dt <= 0.0) throw std::invalid_argument("batchPreintegrate: dt must be positive");
  if (std::abs(bias(9)) > 1e-12)
    throw std::invalid_argument("batchPreintegrate: bias clock slot must be zero");
  if (delta < 0.0) throw std::invalid_argument("batchPreintegrate: delta must be non-negative");
  for (size_t i = 1; i < window.samples.size(); ++i) {
    const double step = window.samples[i].t - window.samples[i - 1].t;
    if (std::abs(step - window.dt) > 0.01 * window.dt)
      throw std::invalid_argument("batchPreintegrate: window is not uniformly sampled");
  }

  const int n = static_cast<int>(std::ceil(delta / window.dt - 1e-9));
  if (n > static_cast<int>(window.samples.size()))
    throw std::invalid_argument("batchPreintegrate: delta exceeds the window span");

  Gal3 out = Gal3::Identity();
  const size_t first = window.samples.size() - n;
  for (size_t i = first; i < window.samples.size(); ++i) {
    Vec10 w = imuTangent(window.samples[i].omega, window.samples[i].accel) - bias;
    w(9) = 1.0;
    out = out * Gal3::exp(w * window.dt);
  }
  return out;
}

}  // namespace galins
