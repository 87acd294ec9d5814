#include "tagsync/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <stdexcept>

namespace tagsync {

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::sender_receiver:
      return "sender_receiver";
    case Engine::event_based:
      return "event_based";
    case Engine::none:
      return "none";
  }
  return "none";
}

std::optional<Engine> engine_from_string(std::string_view name) {
  if (name == "sender_receiver") return Engine::sender_receiver;
  if (name == "event_based") return Engine::event_based;
  if (name == "none") return Engine::none;
  return std::nullopt;
}

namespace {

Micros seconds_to_us(double s) { return std::llround(s * 1e6); }

bool uses_controller(Engine engine) { return engine != Engine::sender_receiver; }

}  // namespace

void ScenarioConfig::validate() const {
  std::vector<FieldDiagnostic> out;
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    out.push_back({"duration_s", "must be positive"});
  }
  if (!(step_ms > 0.0) || std::llround(step_ms * 1000.0) < 1) {
    out.push_back({"step_ms", "must be at least 0.001"});
  }
  if (engine == Engine::sender_receiver) {
    if (!(exchange_interval_s > 0.0) || seconds_to_us(exchange_interval_s) < 1) {
      out.push_back({"exchange_interval_s", "must be positive"});
    }
    if (window < 2) {
      out.push_back({"window", "must be at least 2"});
    }
  } else {
    if (!(burst_interval_s > 0.0) || seconds_to_us(burst_interval_s) < 1) {
      out.push_back({"burst_interval_s", "must be positive"});
    }
    if (!(gain >= 0.0) || !std::isfinite(gain)) {
      out.push_back({"controller.gain", "must be finite and non-negative"});
    }
    if (!(mu_e > 0.0) || !std::isfinite(mu_e)) {
      out.push_back({"controller.mu_e", "must be positive"});
    }
  }
  if (reader_resolution_us < 1) {
    out.push_back({"reader.resolution_us", "must be at least 1"});
  }
  oscillator.validate(out, "oscillator.");
  delays.validate(out, "delays.");
  periods.validate(out, "periods.");
  power.validate(out, "power.");
  if (!out.empty()) {
    throw InvalidConfig(std::move(out));
  }
}

Fixed6 Fixed6::from_double(double value) {
  constexpr double kLimit = 9.0e12;
  if (!std::isfinite(value)) {
    throw std::domain_error("Fixed6: non-finite value");
  }
  return {std::llround(std::clamp(value, -kLimit, kLimit) * 1e6)};
}

std::string Fixed6::str() const {
  const bool negative = units < 0;
  const auto magnitude = negative ? -static_cast<unsigned long long>(units)
                                  : static_cast<unsigned long long>(units);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%llu.%06llu", negative ? "-" : "", magnitude / 1000000ULL,
                magnitude % 1000000ULL);
  return buf;
}

MetricsSummary summarize(std::span<const MetricSample> series, const SummaryOptions& options) {
  MetricsSummary summary;
  double sum_abs = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<const MetricSample*> included;
  for (const auto& sample : series) {
    if (!sample.powered) {
      ++summary.gaps;
      continue;
    }
    if (sample.step < static_cast<std::int64_t>(options.warmup_steps)) {
      continue;
    }
    included.push_back(&sample);
    const double g = sample.gamma_ticks.value();
    sum_abs += std::abs(g);
    sum += g;
    sum_sq += g * g;
    summary.max_abs_gamma_ticks = std::max(summary.max_abs_gamma_ticks, std::abs(g));
  }
  summary.samples = included.size();
  if (summary.samples > 0) {
    const double n = static_cast<double>(summary.samples);
    summary.mean_abs_gamma_ticks = sum_abs / n;
    const double mean = sum / n;
    summary.std_gamma_ticks = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
  }
  const double tick_ms = 1e3 / options.tick_hz;
  summary.mean_abs_gamma_ms = summary.mean_abs_gamma_ticks * tick_ms;
  summary.max_abs_gamma_ms = summary.max_abs_gamma_ticks * tick_ms;
  summary.std_gamma_ms = summary.std_gamma_ticks * tick_ms;

  // Pinned at a clamp bound for most of the second half: the controller is
  // oscillating between its limits rather than settling.
  if (options.rate_min || options.rate_max) {
    const std::size_t half = included.size() / 2;
    std::size_t pinned = 0;
    const bool has_lo = options.rate_min.has_value();
    const bool has_hi = options.rate_max.has_value() && std::isfinite(*options.rate_max);
    const Fixed6 lo = has_lo ? Fixed6::from_double(*options.rate_min) : Fixed6{};
    const Fixed6 hi = has_hi ? Fixed6::from_double(*options.rate_max) : Fixed6{};
    for (std::size_t i = half; i < included.size(); ++i) {
      const Fixed6 rate = included[i]->rate_or_slope;
      if ((has_lo && rate == lo) || (has_hi && rate == hi)) {
        ++pinned;
      }
    }
    const std::size_t tail = included.size() - half;
    if (tail > 0 && 2 * pinned >= tail) {
      summary.converged = false;
    }
  }
  return summary;
}

namespace {

// One scenario: supply, oscillator and sync engine on the reference timeline.
class Scenario final : public TagEndpoint {
 public:
  explicit Scenario(const ScenarioConfig& config)
      : config_(config),
        reader_(config.reader_resolution_us),
        clock_(config.oscillator, config.wrap16, 0),
        step_us_(std::llround(config.step_ms * 1000.0)),
        drift_rng_(Rng::substream(config.seed, "drift")),
        ripple_rng_(Rng::substream(config.seed, "ripple")),
        delay_rng_(Rng::substream(config.seed, "delay")),
        period_rng_(Rng::substream(config.seed, "period")),
        regression_(config.engine == Engine::sender_receiver ? config.window : 2) {
    const double gain = config.engine == Engine::none ? 0.0 : config.gain;
    fresh_controller_ = make_controller(gain, config.mu_e, config.oscillator);
    controller_ = fresh_controller_;
    supply_ = initial_supply(config.power);
  }

  Micros now() const override { return now_; }
  bool powered() const override { return supply_.status == PowerStatus::on; }
  std::uint64_t power_epoch() const override { return epoch_; }
  Ticks counter() const override { return clock_.read(); }

  void advance_to(Micros t) override {
    while (now_ < t) {
      const Micros boundary = (now_ / step_us_ + 1) * step_us_;
      const Micros next = std::min(t, boundary);
      if (powered()) {
        clock_.integrate(next - now_, supply_.voltage);
      }
      now_ = next;
      if (now_ == boundary) {
        on_step_boundary();
      }
    }
  }

  RunMetrics run() {
    RunMetrics metrics;
    metrics.engine = config_.engine;
    metrics.options.warmup_steps = config_.warmup_steps;
    metrics.options.tick_hz = config_.oscillator.f_nom_hz;
    if (uses_controller(config_.engine)) {
      metrics.options.rate_min = fresh_controller_.rate_min;
      metrics.options.rate_max = fresh_controller_.rate_max;
    }

    const bool sender_receiver = config_.engine == Engine::sender_receiver;
    const Micros interval = seconds_to_us(sender_receiver ? config_.exchange_interval_s
                                                          : config_.burst_interval_s);
    const Micros duration = seconds_to_us(config_.duration_s);

    for (std::int64_t step = 0;; ++step) {
      const Micros start = std::max((step + 1) * interval, now_);
      if (start > duration) {
        break;
      }
      advance_to(start);
      std::optional<MetricSample> sample =
          sender_receiver ? read_exchange(step) : blockwrite_burst(step);
      if (sample) {
        metrics.series.push_back(*sample);
      }
    }

    metrics.summary = summarize(metrics.series, metrics.options);
    metrics.summary.gain = fresh_controller_.gain;
    if (uses_controller(config_.engine)) {
      const double bound =
          convergence_bound(config_.periods.mean_ms / 1e3, config_.oscillator.f_nom_hz);
      metrics.summary.within_bound =
          fresh_controller_.gain > 0.0 && fresh_controller_.gain < bound;
      metrics.final_snapshot = snapshot_ ? *snapshot_ : persist(controller_);
    } else {
      metrics.summary.gain = 0.0;
    }
    return metrics;
  }

 private:
  // Order within a boundary: drift step for the elapsed interval, supply step,
  // power transition. The clock then integrates the next interval at the new
  // voltage.
  void on_step_boundary() {
    clock_.step_drift(step_us_, drift_rng_);
    step_voltage(config_.power, supply_, static_cast<double>(step_us_) / 1e6, ripple_rng_);
    const PowerTransition transition = power_state(supply_.voltage, supply_.status, config_.power);
    supply_.status = status_after(transition);
    if (transition == PowerTransition::died) {
      ++epoch_;
      controller_.t_f.reset();
    } else if (transition == PowerTransition::revived) {
      revive();
    }
  }

  void revive() {
    clock_.reset(now_);
    regression_.clear();
    if (config_.checkpoint == CheckpointPolicy::after_update && snapshot_) {
      controller_ = restore(*snapshot_, fresh_controller_);
    } else {
      controller_ = fresh_controller_;
    }
  }

  MetricSample gap(std::int64_t step, double rate) const {
    return {step, now_, Fixed6{}, Fixed6::from_double(rate), false};
  }

  std::optional<MetricSample> blockwrite_burst(std::int64_t step) {
    BurstRecord record;
    try {
      record = run_blockwrite_burst(reader_, *this, config_.periods, period_rng_);
    } catch (const TagUnpowered&) {
      controller_.t_f.reset();
      return gap(step, controller_.rate_multiplier);
    }
    Ticks last = record.cw_last;
    if (config_.wrap16) {
      last = record.cw_first + ((record.cw_last - record.cw_first) & 0xFFFF);
    }
    controller_ = on_first_blockwrite(controller_, record.cw_first);
    const ControllerUpdate update = on_last_blockwrite(controller_, last);
    controller_ = update.state;
    if (config_.checkpoint == CheckpointPolicy::after_update) {
      snapshot_ = persist(controller_);
    }
    return MetricSample{step, record.last_event_time, Fixed6::from_double(update.gamma),
                        Fixed6::from_double(controller_.rate_multiplier), true};
  }

  std::optional<MetricSample> read_exchange(std::int64_t step) {
    ExchangeRecord record;
    try {
      record = run_read_exchange(reader_, *this, config_.delays, delay_rng_);
    } catch (const TagUnpowered&) {
      return gap(step, regression_.fitted() ? regression_.slope() : 0.0);
    }
    std::optional<MetricSample> sample;
    if (regression_.full() && regression_.fitted()) {
      const double predicted = predict(regression_, record.cw_at_t2);
      const double gamma_us = sync_error(predicted, static_cast<double>(record.cr_at_t1));
      sample = MetricSample{step, record.t2,
                            Fixed6::from_double(gamma_us / config_.oscillator.tick_us()),
                            Fixed6::from_double(regression_.slope()), true};
    }
    regression_.push({record.cw_at_t2, record.cr_at_t1});
    return sample;
  }

  const ScenarioConfig& config_;
  ReferenceClock reader_;
  LocalClock clock_;
  Micros step_us_;
  Rng drift_rng_;
  Rng ripple_rng_;
  Rng delay_rng_;
  Rng period_rng_;
  SupplyState supply_;
  RegressionState regression_;
  ControllerState fresh_controller_;
  ControllerState controller_;
  std::optional<NvSnapshot> snapshot_;
  Micros now_ = 0;
  std::uint64_t epoch_ = 0;
};

void require_event_engine(const ScenarioConfig& config) {
  if (config.engine != Engine::event_based) {
    throw InvalidConfig(std::vector<FieldDiagnostic>{{"engine", "must be event_based for this operation"}});
  }
}

}  // namespace

RunMetrics run_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario scenario(config);
  return scenario.run();
}

std::vector<MetricsSummary> sweep_gain(const ScenarioConfig& config,
                                       std::span<const double> gains) {
  require_event_engine(config);
  std::vector<std::future<MetricsSummary>> runs;
  runs.reserve(gains.size());
  for (double gain : gains) {
    ScenarioConfig variant = config;
    variant.gain = gain;
    variant.validate();
    runs.push_back(std::async(std::launch::async, [variant] {
      return run_scenario(variant).summary;
    }));
  }
  std::vector<MetricsSummary> summaries;
  summaries.reserve(runs.size());
  for (auto& run : runs) {
    summaries.push_back(run.get());
  }
  return summaries;
}

Comparison compare_with_without(const ScenarioConfig& config) {
  require_event_engine(config);
  ScenarioConfig without = config;
  without.gain = 0.0;
  Comparison result;
  result.with_sync = run_scenario(config).summary;
  result.without_sync = run_scenario(without).summary;

  // One tick is the resolution of the local counter.
  constexpr double kQuantizationFloor = 1.0;
  const double with_mean = result.with_sync.mean_abs_gamma_ticks;
  const double without_mean = result.without_sync.mean_abs_gamma_ticks;
  if (with_mean <= kQuantizationFloor && without_mean <= kQuantizationFloor) {
    result.improvement_ratio = 1.0;
  } else if (with_mean == 0.0) {
    result.improvement_ratio = std::numeric_limits<double>::infinity();
  } else {
    result.improvement_ratio = without_mean / with_mean;
  }
  return result;
}

}  // namespace tagsync
