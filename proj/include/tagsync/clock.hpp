#pragma once

#include <vector>

#include "tagsync/errors.hpp"
#include "tagsync/rng.hpp"
#include "tagsync/types.hpp"

namespace tagsync {

/// Generative model of a tag oscillator.
///
/// Realized frequency is
///   f_nom * (1 + static_drift + drift_state + voltage_coeff * (v - v_nom))
/// clamped into [f_min_hz, f_max_hz]. drift_state is a bounded random walk
/// owned by the LocalClock.
struct OscillatorModel {
  double f_nom_hz = 31250.0;
  double f_min_hz = 31250.0 * (1.0 - 100e-6);
  double f_max_hz = 31250.0 * (1.0 + 100e-6);
  double static_drift = 0.0;
  /// Random-walk std-dev per sqrt(second).
  double noise_sigma = 0.0;
  /// Fractional frequency change per volt of supply deviation from v_nom.
  double voltage_coeff = 0.0;
  double v_nom = 2.5;

  /// Reflection bound of the random-walk drift term.
  double drift_bound() const { return (f_max_hz - f_nom_hz) / f_nom_hz; }

  double tick_us() const { return 1e6 / f_nom_hz; }

  /// Appends one diagnostic per violated invariant, fields prefixed by `prefix`.
  void validate(std::vector<FieldDiagnostic>& out, const std::string& prefix) const;
};

double frequency_at(const OscillatorModel& model, double drift_state, double voltage);

/// Quantized tick counter driven by an OscillatorModel.
class LocalClock {
 public:
  explicit LocalClock(OscillatorModel model, bool wrap16 = false, Micros t0 = 0);

  /// Integrates the oscillator over `dt` at constant `voltage`; no drift step.
  void integrate(Micros dt, double voltage);

  /// One bounded random-walk step of the drift term covering `dt`.
  void step_drift(Micros dt, Rng& rng);

  /// integrate() followed by step_drift().
  void advance(Micros dt, double voltage, Rng& rng);

  /// Counter as the firmware sees it (16-bit wraparound when enabled).
  Ticks read() const;

  /// Unwrapped counter, floor(accumulated_phase).
  Ticks counter() const { return counter_; }

  double accumulated_phase() const { return phase_; }
  double drift_state() const { return drift_state_; }
  void set_drift_state(double drift);
  Micros t0() const { return t0_; }
  bool wrap16() const { return wrap16_; }
  const OscillatorModel& model() const { return model_; }

  /// Power-on: counter and phase restart at zero, drift state is kept.
  void reset(Micros t0);

  /// Test hook: places the clock at an arbitrary phase.
  void set_phase(double phase);

 private:
  OscillatorModel model_;
  bool wrap16_;
  Micros t0_;
  double phase_ = 0.0;
  Ticks counter_ = 0;
  double drift_state_ = 0.0;
};

/// The reader clock. Drift-free by definition; readings are truncated to
/// `resolution_us`.
class ReferenceClock {
 public:
  explicit ReferenceClock(Micros resolution_us = 1);

  Micros reading_at(Micros t) const { return t - t % resolution_us_; }
  Micros resolution_us() const { return resolution_us_; }

 private:
  Micros resolution_us_;
};

}  // namespace tagsync
