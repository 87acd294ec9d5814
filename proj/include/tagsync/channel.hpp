#pragma once

#include <cstdint>
#include <vector>

#include "tagsync/clock.hpp"
#include "tagsync/errors.hpp"
#include "tagsync/rng.hpp"
#include "tagsync/types.hpp"

namespace tagsync {

/// Reader-to-tag transmission delay (FirstSeenTimestamp to command reception).
struct DelayModel {
  double mean_ms = 1.89;
  double sigma_ms = 0.0164;
  double outlier_prob = 0.0;
  double outlier_scale = 1.0;

  void validate(std::vector<FieldDiagnostic>& out, const std::string& prefix) const;
};

/// Real-time span between the first and last BlockWrite of a burst.
struct EventPeriodModel {
  double mean_ms = 226.7667;
  double sigma_ms = 0.4097;

  void validate(std::vector<FieldDiagnostic>& out, const std::string& prefix) const;
};

/// Normal(mean, sigma), replaced by mean * outlier_scale with probability
/// outlier_prob. Always strictly positive. The outlier decision is drawn on
/// every call, even when outlier_prob is zero.
double sample_transmission_delay(const DelayModel& model, Rng& rng);

double sample_event_period(const EventPeriodModel& model, Rng& rng);

/// Converts a positive duration in milliseconds to whole microseconds (>= 1).
Micros to_micros(double ms);

struct ExchangeRecord {
  Micros t1 = 0;
  Micros t2 = 0;
  Ticks cw_at_t2 = 0;
  Micros cr_at_t1 = 0;
};

struct BurstRecord {
  Micros first_event_time = 0;
  Micros last_event_time = 0;
  Ticks cw_first = 0;
  Ticks cw_last = 0;
};

/// The tag side of the reader-tag link, seen on the shared reference timeline.
class TagEndpoint {
 public:
  virtual ~TagEndpoint() = default;

  virtual Micros now() const = 0;
  virtual bool powered() const = 0;
  /// Counts deaths so far; an action is lost if this changes under it.
  virtual std::uint64_t power_epoch() const = 0;
  /// Local counter as the firmware reads it.
  virtual Ticks counter() const = 0;
  /// Runs the environment (supply, clock) forward to reference time `t`.
  virtual void advance_to(Micros t) = 0;
};

/// A tag on a fixed supply voltage, optionally browning out at a given instant.
class FreeRunningTag final : public TagEndpoint {
 public:
  FreeRunningTag(LocalClock clock, double voltage, Rng drift_rng, Micros step_us = 1000);

  /// Tag dies when reference time reaches `t` and stays dead.
  void set_power_loss_at(Micros t) { power_loss_at_ = t; }

  Micros now() const override { return now_; }
  bool powered() const override { return powered_; }
  std::uint64_t power_epoch() const override { return epoch_; }
  Ticks counter() const override { return clock_.read(); }
  void advance_to(Micros t) override;

  const LocalClock& clock() const { return clock_; }

 private:
  LocalClock clock_;
  double voltage_;
  Rng drift_rng_;
  Micros step_us_;
  Micros now_ = 0;
  Micros power_loss_at_ = -1;
  bool powered_ = true;
  std::uint64_t epoch_ = 0;
};

/// Reader Read exchange: FirstSeenTimestamp at t1 = now, the tag timestamps
/// the command at t2 = t1 + delay. Reference time always advances to t2;
/// throws TagUnpowered afterwards if the tag was dead at t1 or died on the way.
ExchangeRecord run_read_exchange(const ReferenceClock& reader, TagEndpoint& tag,
                                 const DelayModel& delays, Rng& rng);

/// BlockWrite burst: only the first and last events are timestamped.
/// Reference time always advances to the last event; throws TagUnpowered if
/// the tag was dead at the first event or died before the last.
BurstRecord run_blockwrite_burst(const ReferenceClock& reader, TagEndpoint& tag,
                                 const EventPeriodModel& period, Rng& rng);

}  // namespace tagsync
