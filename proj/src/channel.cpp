#include "tagsync/channel.hpp"

#include <algorithm>
#include <cmath>

namespace tagsync {

void DelayModel::validate(std::vector<FieldDiagnostic>& out, const std::string& prefix) const {
  if (!(mean_ms > 0.0)) {
    out.push_back({prefix + "mean_ms", "must be positive"});
  }
  if (!(sigma_ms >= 0.0)) {
    out.push_back({prefix + "sigma_ms", "must be non-negative"});
  }
  if (!(outlier_prob >= 0.0 && outlier_prob < 1.0)) {
    out.push_back({prefix + "outlier_prob", "must lie in [0, 1)"});
  }
  if (!(outlier_scale > 0.0)) {
    out.push_back({prefix + "outlier_scale", "must be positive"});
  }
}

void EventPeriodModel::validate(std::vector<FieldDiagnostic>& out,
                                const std::string& prefix) const {
  if (!(mean_ms > 0.0)) {
    out.push_back({prefix + "mean_ms", "must be positive"});
  }
  if (!(sigma_ms >= 0.0)) {
    out.push_back({prefix + "sigma_ms", "must be non-negative"});
  }
}

namespace {

// Smallest duration a sampler may return, ms.
constexpr double kMinDurationMs = 1e-3;

}  // namespace

double sample_transmission_delay(const DelayModel& model, Rng& rng) {
  const double u = rng.uniform();
  double delay = model.sigma_ms > 0.0 ? rng.normal(model.mean_ms, model.sigma_ms) : model.mean_ms;
  if (u < model.outlier_prob) {
    delay = model.mean_ms * model.outlier_scale;
  }
  return std::max(delay, kMinDurationMs);
}

double sample_event_period(const EventPeriodModel& model, Rng& rng) {
  const double period =
      model.sigma_ms > 0.0 ? rng.normal(model.mean_ms, model.sigma_ms) : model.mean_ms;
  return std::max(period, kMinDurationMs);
}

Micros to_micros(double ms) {
  return std::max<Micros>(1, std::llround(ms * 1000.0));
}

FreeRunningTag::FreeRunningTag(LocalClock clock, double voltage, Rng drift_rng, Micros step_us)
    : clock_(std::move(clock)), voltage_(voltage), drift_rng_(std::move(drift_rng)),
      step_us_(step_us) {
  now_ = clock_.t0();
}

void FreeRunningTag::advance_to(Micros t) {
  while (now_ < t) {
    if (power_loss_at_ >= 0 && now_ >= power_loss_at_ && powered_) {
      powered_ = false;
      ++epoch_;
    }
    Micros next = std::min(t, (now_ / step_us_ + 1) * step_us_);
    if (power_loss_at_ >= 0 && powered_ && power_loss_at_ > now_) {
      next = std::min(next, power_loss_at_);
    }
    if (powered_) {
      clock_.integrate(next - now_, voltage_);
    }
    now_ = next;
    if (now_ % step_us_ == 0) {
      clock_.step_drift(step_us_, drift_rng_);
    }
  }
  if (power_loss_at_ >= 0 && now_ >= power_loss_at_ && powered_) {
    powered_ = false;
    ++epoch_;
  }
}

ExchangeRecord run_read_exchange(const ReferenceClock& reader, TagEndpoint& tag,
                                 const DelayModel& delays, Rng& rng) {
  const Micros delay = to_micros(sample_transmission_delay(delays, rng));
  const bool powered_at_start = tag.powered();
  const std::uint64_t epoch = tag.power_epoch();
  ExchangeRecord record;
  record.t1 = tag.now();
  record.cr_at_t1 = reader.reading_at(record.t1);
  record.t2 = record.t1 + delay;
  tag.advance_to(record.t2);
  if (!powered_at_start || tag.power_epoch() != epoch || !tag.powered()) {
    throw TagUnpowered();
  }
  record.cw_at_t2 = tag.counter();
  return record;
}

BurstRecord run_blockwrite_burst(const ReferenceClock& reader, TagEndpoint& tag,
                                 const EventPeriodModel& period, Rng& rng) {
  const Micros span = to_micros(sample_event_period(period, rng));
  const bool powered_at_start = tag.powered();
  const std::uint64_t epoch = tag.power_epoch();
  BurstRecord record;
  record.first_event_time = reader.reading_at(tag.now());
  record.cw_first = tag.counter();
  record.last_event_time = record.first_event_time + span;
  tag.advance_to(tag.now() + span);
  if (!powered_at_start || tag.power_epoch() != epoch || !tag.powered()) {
    throw TagUnpowered();
  }
  record.cw_last = tag.counter();
  return record;
}

}  // namespace tagsync
