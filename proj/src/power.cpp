#include "tagsync/power.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace tagsync {

void PowerModel::validate(std::vector<FieldDiagnostic>& out, const std::string& prefix) const {
  if (!(v_off < v_on)) {
    out.push_back({prefix + "v_off", "must be below v_on"});
  }
  if (!(v_off >= 0.0)) {
    out.push_back({prefix + "v_off", "must be non-negative"});
  }
  if (!(charge_rate > 0.0)) {
    out.push_back({prefix + "charge_rate", "must be positive"});
  }
  if (!(discharge_rate_active > 0.0)) {
    out.push_back({prefix + "discharge_rate", "must be positive"});
  }
  if (!(ripple_sigma >= 0.0)) {
    out.push_back({prefix + "ripple_sigma", "must be non-negative"});
  }
  if (mode == PowerMode::constant && !(v_const >= 0.0)) {
    out.push_back({prefix + "v_const", "must be non-negative"});
  }
}

SupplyState initial_supply(const PowerModel& model) {
  SupplyState state;
  if (model.mode == PowerMode::constant) {
    state.voltage = model.v_const;
  } else {
    state.voltage = model.v_initial >= 0.0 ? model.v_initial : model.v_on;
  }
  state.status = state.voltage >= model.v_on ? PowerStatus::on : PowerStatus::off;
  return state;
}

double step_voltage(const PowerModel& model, SupplyState& state, double dt_s, Rng& rng) {
  if (model.mode == PowerMode::constant) {
    state.voltage = model.v_const;
    return state.voltage;
  }
  const double rate =
      state.status == PowerStatus::on ? -model.discharge_rate_active : model.charge_rate;
  double v = state.voltage + rate * dt_s;
  if (model.ripple_sigma > 0.0) {
    v += model.ripple_sigma * rng.normal();
  }
  state.voltage = std::max(v, 0.0);
  return state.voltage;
}

PowerTransition power_state(double voltage, PowerStatus previous, const PowerModel& model) {
  if (previous == PowerStatus::on) {
    return voltage < model.v_off ? PowerTransition::died : PowerTransition::on;
  }
  return voltage >= model.v_on ? PowerTransition::revived : PowerTransition::off;
}

PowerStatus status_after(PowerTransition transition) {
  switch (transition) {
    case PowerTransition::on:
    case PowerTransition::revived:
      return PowerStatus::on;
    case PowerTransition::off:
    case PowerTransition::died:
      return PowerStatus::off;
  }
  return PowerStatus::off;
}

namespace {

std::uint32_t checksum_of(double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  std::array<unsigned char, 8> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  }
  return static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

NvSnapshot persist(const ControllerState& state) {
  return {state.rate_multiplier, checksum_of(state.rate_multiplier)};
}

ControllerState restore(const NvSnapshot& snapshot, const ControllerState& fresh) {
  if (checksum_of(snapshot.rate_multiplier) != snapshot.checksum) {
    throw CorruptSnapshot();
  }
  ControllerState state = fresh;
  state.rate_multiplier = snapshot.rate_multiplier;
  state.t_f.reset();
  state.software_elapsed = 0.0;
  return state;
}

std::string format_snapshot(const NvSnapshot& snapshot) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "alpha=%.17g checksum=%u", snapshot.rate_multiplier,
                static_cast<unsigned>(snapshot.checksum));
  return buf.data();
}

NvSnapshot parse_snapshot(std::string_view text) {
  constexpr std::string_view alpha_key = "alpha=";
  constexpr std::string_view checksum_key = " checksum=";
  if (!text.starts_with(alpha_key)) {
    throw ParseError(1, 1, "expected 'alpha='");
  }
  const auto sep = text.find(checksum_key);
  if (sep == std::string_view::npos) {
    throw ParseError(1, text.size() + 1, "expected ' checksum='");
  }
  NvSnapshot snapshot;
  const char* alpha_begin = text.data() + alpha_key.size();
  const char* alpha_end = text.data() + sep;
  auto [p1, ec1] = std::from_chars(alpha_begin, alpha_end, snapshot.rate_multiplier);
  if (ec1 != std::errc() || p1 != alpha_end) {
    throw ParseError(1, alpha_key.size() + 1, "malformed alpha value");
  }
  const char* sum_begin = text.data() + sep + checksum_key.size();
  const char* sum_end = text.data() + text.size();
  auto [p2, ec2] = std::from_chars(sum_begin, sum_end, snapshot.checksum);
  if (ec2 != std::errc() || p2 != sum_end) {
    throw ParseError(1, sep + checksum_key.size() + 1, "malformed checksum value");
  }
  return snapshot;
}

}  // namespace tagsync
