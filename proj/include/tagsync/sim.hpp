#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagsync/channel.hpp"
#include "tagsync/clock.hpp"
#include "tagsync/power.hpp"
#include "tagsync/sync.hpp"

namespace tagsync {

enum class Engine { sender_receiver, event_based, none };

std::string_view to_string(Engine engine);
std::optional<Engine> engine_from_string(std::string_view name);

struct ScenarioConfig {
  Engine engine = Engine::event_based;
  double duration_s = 60.0;
  /// Base step for supply and drift updates.
  double step_ms = 1.0;
  double exchange_interval_s = 0.1;
  double burst_interval_s = 0.5;
  /// Leading protocol steps excluded from summary statistics.
  std::size_t warmup_steps = 0;

  std::size_t window = 8;
  double gain = 1e-4;
  double mu_e = 7086.0;
  CheckpointPolicy checkpoint = CheckpointPolicy::after_update;

  OscillatorModel oscillator;
  bool wrap16 = false;
  Micros reader_resolution_us = 1;
  DelayModel delays;
  EventPeriodModel periods;
  PowerModel power;

  std::uint64_t seed = 1;

  /// Throws InvalidConfig listing every offending field.
  void validate() const;
};

/// Fixed-point decimal with six fractional digits; the metrics series is
/// stored in this form so that it survives a text round trip exactly.
struct Fixed6 {
  std::int64_t units = 0;

  static Fixed6 from_double(double value);
  double value() const { return static_cast<double>(units) / 1e6; }
  std::string str() const;

  friend bool operator==(const Fixed6&, const Fixed6&) = default;
};

struct MetricSample {
  std::int64_t step = 0;
  Micros ref_time_us = 0;
  Fixed6 gamma_ticks;
  /// Rate multiplier (event-based, none) or regression slope in us/tick.
  Fixed6 rate_or_slope;
  /// False marks a gap: the protocol action was lost to a power failure.
  bool powered = true;

  friend bool operator==(const MetricSample&, const MetricSample&) = default;
};

struct SummaryOptions {
  std::size_t warmup_steps = 0;
  double tick_hz = 31250.0;
  /// Controller clamp bounds; a run pinned at a bound is not converged.
  std::optional<double> rate_min;
  std::optional<double> rate_max;
};

struct MetricsSummary {
  double gain = 0.0;
  std::size_t samples = 0;
  std::size_t gaps = 0;
  double mean_abs_gamma_ticks = 0.0;
  double max_abs_gamma_ticks = 0.0;
  double std_gamma_ticks = 0.0;
  double mean_abs_gamma_ms = 0.0;
  double max_abs_gamma_ms = 0.0;
  double std_gamma_ms = 0.0;
  bool converged = true;
  /// Gain inside (0, 2/(B f)); meaningful for the event-based engines only.
  bool within_bound = true;
};

/// Statistics over powered samples with step >= warmup_steps. mean/max are of
/// |gamma|, std is the population std-dev of the signed gamma.
MetricsSummary summarize(std::span<const MetricSample> series, const SummaryOptions& options);

struct RunMetrics {
  Engine engine = Engine::event_based;
  SummaryOptions options;
  std::vector<MetricSample> series;
  MetricsSummary summary;
  std::optional<NvSnapshot> final_snapshot;
};

/// Runs one seeded scenario. Throws InvalidConfig.
RunMetrics run_scenario(const ScenarioConfig& config);

/// One run per gain, summaries in input order. Requires an event-based engine.
std::vector<MetricsSummary> sweep_gain(const ScenarioConfig& config, std::span<const double> gains);

struct Comparison {
  MetricsSummary without_sync;
  MetricsSummary with_sync;
  /// without / with mean |gamma|; 1 when both sit at the quantization floor.
  double improvement_ratio = 1.0;
};

Comparison compare_with_without(const ScenarioConfig& config);

}  // namespace tagsync
