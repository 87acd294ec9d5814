#include "tagsync/sync.hpp"

#include <algorithm>
#include <stdexcept>

namespace tagsync {

namespace {

__extension__ typedef __int128 Int128;

struct Sums {
  Int128 n = 0;
  Int128 x = 0;
  Int128 y = 0;
  Int128 xx = 0;
  Int128 xy = 0;
};

// Closed-form OLS from exact sums:
//   slope  = (n Sxy - Sx Sy) / (n Sxx - Sx^2)
//   offset = (Sy Sxx - Sx Sxy) / (n Sxx - Sx^2)
std::optional<LineFit> fit_from_sums(const Sums& s) {
  const Int128 den = s.n * s.xx - s.x * s.x;
  if (s.n < 2 || den == 0) {
    return std::nullopt;
  }
  const Int128 slope_num = s.n * s.xy - s.x * s.y;
  const Int128 offset_num = s.y * s.xx - s.x * s.xy;
  const double d = static_cast<double>(den);
  return LineFit{static_cast<double>(offset_num) / d, static_cast<double>(slope_num) / d};
}

}  // namespace

LineFit ls_regress(std::span<const SyncPoint> window) {
  Sums s;
  for (const auto& p : window) {
    s.n += 1;
    s.x += p.cw;
    s.y += p.cr;
    s.xx += static_cast<Int128>(p.cw) * p.cw;
    s.xy += static_cast<Int128>(p.cw) * p.cr;
  }
  auto fit = fit_from_sums(s);
  if (!fit) {
    throw DegenerateWindow();
  }
  return *fit;
}

RegressionState::RegressionState(std::size_t window_size) : window_size_(window_size) {
  if (window_size < 2) {
    throw std::invalid_argument("RegressionState: window size must be at least 2");
  }
}

void RegressionState::push(SyncPoint point) {
  if (window_.size() == window_size_) {
    const SyncPoint& old = window_.front();
    sum_x_ -= old.cw;
    sum_y_ -= old.cr;
    sum_xx_ -= static_cast<Int128>(old.cw) * old.cw;
    sum_xy_ -= static_cast<Int128>(old.cw) * old.cr;
    window_.pop_front();
  }
  window_.push_back(point);
  sum_x_ += point.cw;
  sum_y_ += point.cr;
  sum_xx_ += static_cast<Int128>(point.cw) * point.cw;
  sum_xy_ += static_cast<Int128>(point.cw) * point.cr;
  refit();
}

void RegressionState::clear() {
  window_.clear();
  sum_x_ = sum_y_ = sum_xx_ = sum_xy_ = 0;
  fit_.reset();
}

void RegressionState::refit() {
  Sums s;
  s.n = static_cast<Int128>(window_.size());
  s.x = sum_x_;
  s.y = sum_y_;
  s.xx = sum_xx_;
  s.xy = sum_xy_;
  fit_ = fit_from_sums(s);
}

const LineFit& RegressionState::fit() const {
  if (!fit_) {
    throw NotFitted();
  }
  return *fit_;
}

double predict(const LineFit& fit, Ticks cw) {
  return fit.offset_us + fit.slope_us_per_tick * static_cast<double>(cw);
}

double predict(const RegressionState& state, Ticks cw) {
  return predict(state.fit(), cw);
}

double sync_error(double predicted, double reference) {
  return predicted - reference;
}

ControllerState make_controller(double gain, double mu_e, const OscillatorModel& oscillator) {
  ControllerState state;
  state.gain = gain;
  state.mu_e = mu_e;
  state.rate_min = oscillator.f_nom_hz / oscillator.f_max_hz;
  state.rate_max = oscillator.f_nom_hz / oscillator.f_min_hz;
  return state;
}

ControllerState on_first_blockwrite(ControllerState state, Ticks cw_now) {
  state.t_f = cw_now;
  return state;
}

ControllerUpdate on_last_blockwrite(ControllerState state, Ticks cw_now) {
  if (!state.t_f) {
    throw MissingFirstEvent();
  }
  if (cw_now < *state.t_f) {
    throw std::invalid_argument("on_last_blockwrite: local clock ran backwards within a burst");
  }
  const double local_progress = static_cast<double>(cw_now - *state.t_f);
  const double software_progress = state.rate_multiplier * local_progress;
  const double gamma = software_progress - state.mu_e;
  state.software_elapsed += software_progress;
  state.rate_multiplier =
      std::clamp(state.rate_multiplier - state.gain * gamma, state.rate_min, state.rate_max);
  state.t_f.reset();
  return {state, gamma};
}

double software_now(const ControllerState& state, double cw_elapsed) {
  return state.rate_multiplier * cw_elapsed;
}

double convergence_bound(double period_s, double freq_hz) {
  if (!(period_s > 0.0) || !(freq_hz > 0.0)) {
    throw std::invalid_argument("convergence_bound: period and frequency must be positive");
  }
  return 2.0 / (period_s * freq_hz);
}

}  // namespace tagsync
