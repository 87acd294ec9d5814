#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>

#include "tagsync/clock.hpp"
#include "tagsync/errors.hpp"
#include "tagsync/types.hpp"

namespace tagsync {

// ---------------------------------------------------------------------------
// Sender-receiver synchronization: least-squares software clock
//   S_w(cw) = offset + slope * cw
// fitted over the most recent N (cw, cr) synchronization points.
// ---------------------------------------------------------------------------

struct SyncPoint {
  Ticks cw = 0;
  Micros cr = 0;

  friend bool operator==(const SyncPoint&, const SyncPoint&) = default;
};

struct LineFit {
  double offset_us = 0.0;
  double slope_us_per_tick = 0.0;
};

/// Ordinary least squares over `window`. Sums are accumulated exactly in
/// 128-bit integers, so the fit depends only on the multiset of points.
/// Throws DegenerateWindow for fewer than two distinct cw values.
LineFit ls_regress(std::span<const SyncPoint> window);

/// Sliding window of synchronization points with exactly maintained sums.
class RegressionState {
 public:
  explicit RegressionState(std::size_t window_size = 8);

  /// Appends a point, evicting the oldest once the window is full, then refits.
  void push(SyncPoint point);
  void clear();

  bool fitted() const { return fit_.has_value(); }
  bool full() const { return window_.size() == window_size_; }
  std::size_t size() const { return window_.size(); }
  std::size_t window_size() const { return window_size_; }
  const std::deque<SyncPoint>& window() const { return window_; }

  /// Throws NotFitted.
  const LineFit& fit() const;
  double offset() const { return fit().offset_us; }
  double slope() const { return fit().slope_us_per_tick; }

 private:
  void refit();

  std::size_t window_size_;
  std::deque<SyncPoint> window_;
  __extension__ __int128 sum_x_ = 0;
  __extension__ __int128 sum_y_ = 0;
  __extension__ __int128 sum_xx_ = 0;
  __extension__ __int128 sum_xy_ = 0;
  std::optional<LineFit> fit_;
};

/// offset + slope * cw, in reference microseconds. Throws NotFitted.
double predict(const RegressionState& state, Ticks cw);
double predict(const LineFit& fit, Ticks cw);

/// gamma = predicted - reference (signed).
double sync_error(double predicted, double reference);

// ---------------------------------------------------------------------------
// Event-based synchronization: integral controller on the software clock rate
//   S_w(t) = rate_multiplier * (C_w(t) - C_w(t0))
// ---------------------------------------------------------------------------

struct ControllerState {
  double rate_multiplier = 1.0;
  double gain = 1e-4;
  /// Mean event period, ticks.
  double mu_e = 7086.0;
  /// Local time of the first BlockWrite of the burst in progress.
  std::optional<Ticks> t_f;
  /// Software-clock progress accumulated over completed bursts, ticks.
  double software_elapsed = 0.0;
  double rate_min = 0.0;
  double rate_max = std::numeric_limits<double>::infinity();
};

/// Controller with rate bounds f_nom/f_max .. f_nom/f_min.
ControllerState make_controller(double gain, double mu_e, const OscillatorModel& oscillator);

/// Stores the local time of the first BlockWrite; a repeated first event
/// restarts the burst.
ControllerState on_first_blockwrite(ControllerState state, Ticks cw_now);

struct ControllerUpdate {
  ControllerState state;
  /// Estimation error rate_multiplier * (cw_now - t_f) - mu_e, in ticks.
  double gamma = 0.0;
};

/// Integral update on the last BlockWrite. Throws MissingFirstEvent when no
/// burst is open and std::invalid_argument when cw_now < t_f.
ControllerUpdate on_last_blockwrite(ControllerState state, Ticks cw_now);

/// Software-clock ticks after `cw_elapsed` local ticks.
double software_now(const ControllerState& state, double cw_elapsed);

/// Upper limit 2 / (B * f) on the integral gain for event period B seconds and
/// clock frequency f Hz.
double convergence_bound(double period_s, double freq_hz);

}  // namespace tagsync
