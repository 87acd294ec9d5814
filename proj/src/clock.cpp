#include "tagsync/clock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tagsync {

void OscillatorModel::validate(std::vector<FieldDiagnostic>& out, const std::string& prefix) const {
  if (!(f_nom_hz > 0.0)) {
    out.push_back({prefix + "f_nom_hz", "must be positive"});
  }
  if (!(f_min_hz > 0.0)) {
    out.push_back({prefix + "f_min_hz", "must be positive"});
  }
  if (!(f_min_hz <= f_nom_hz)) {
    out.push_back({prefix + "f_min_hz", "must not exceed f_nom_hz"});
  }
  if (!(f_nom_hz <= f_max_hz)) {
    out.push_back({prefix + "f_max_hz", "must not be below f_nom_hz"});
  }
  if (!(noise_sigma >= 0.0)) {
    out.push_back({prefix + "noise_sigma", "must be non-negative"});
  }
  if (!std::isfinite(static_drift)) {
    out.push_back({prefix + "static_drift", "must be finite"});
  }
  if (!std::isfinite(voltage_coeff)) {
    out.push_back({prefix + "voltage_coeff", "must be finite"});
  }
  if (!(v_nom >= 0.0)) {
    out.push_back({prefix + "v_nom", "must be non-negative"});
  }
}

double frequency_at(const OscillatorModel& model, double drift_state, double voltage) {
  const double deviation =
      model.static_drift + drift_state + model.voltage_coeff * (voltage - model.v_nom);
  return std::clamp(model.f_nom_hz * (1.0 + deviation), model.f_min_hz, model.f_max_hz);
}

LocalClock::LocalClock(OscillatorModel model, bool wrap16, Micros t0)
    : model_(model), wrap16_(wrap16), t0_(t0) {}

void LocalClock::integrate(Micros dt, double voltage) {
  if (dt <= 0) {
    throw std::invalid_argument("LocalClock::integrate: dt must be positive");
  }
  // f * dt first: exact for the usual tick rates and integer microseconds.
  phase_ += frequency_at(model_, drift_state_, voltage) * static_cast<double>(dt) / 1e6;
  counter_ = static_cast<Ticks>(std::floor(phase_));
}

void LocalClock::step_drift(Micros dt, Rng& rng) {
  const double bound = model_.drift_bound();
  if (model_.noise_sigma == 0.0) {
    return;
  }
  if (bound <= 0.0) {
    drift_state_ = 0.0;
    rng.normal();
    return;
  }
  double x = drift_state_ + model_.noise_sigma * std::sqrt(static_cast<double>(dt) / 1e6) * rng.normal();
  // Reflect into [-bound, bound].
  const double period = 4.0 * bound;
  x = std::fmod(x + bound, period);
  if (x < 0.0) {
    x += period;
  }
  x = x <= 2.0 * bound ? x - bound : 3.0 * bound - x;
  drift_state_ = x;
}

void LocalClock::advance(Micros dt, double voltage, Rng& rng) {
  integrate(dt, voltage);
  step_drift(dt, rng);
}

Ticks LocalClock::read() const {
  return wrap16_ ? counter_ & 0xFFFF : counter_;
}

void LocalClock::set_drift_state(double drift) {
  drift_state_ = std::clamp(drift, -model_.drift_bound(), model_.drift_bound());
}

void LocalClock::reset(Micros t0) {
  t0_ = t0;
  phase_ = 0.0;
  counter_ = 0;
}

void LocalClock::set_phase(double phase) {
  phase_ = phase;
  counter_ = static_cast<Ticks>(std::floor(phase_));
}

ReferenceClock::ReferenceClock(Micros resolution_us) : resolution_us_(resolution_us) {
  if (resolution_us <= 0) {
    throw std::invalid_argument("ReferenceClock: resolution must be positive");
  }
}

}  // namespace tagsync
