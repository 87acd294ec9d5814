#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tagsync/errors.hpp"
#include "tagsync/rng.hpp"
#include "tagsync/sync.hpp"

namespace tagsync {

enum class PowerMode { constant, harvested };

/// Supply model. In harvested mode the storage voltage rises at charge_rate
/// while the tag is off and falls at discharge_rate_active while it runs,
/// with Gaussian ripple of std-dev ripple_sigma added every step.
struct PowerModel {
  PowerMode mode = PowerMode::constant;
  double v_const = 2.5;
  double v_on = 2.2;
  double v_off = 1.8;
  double charge_rate = 1.0;
  double discharge_rate_active = 0.05;
  double ripple_sigma = 0.0;
  /// Harvested-mode starting voltage; negative means start at v_on.
  double v_initial = -1.0;

  void validate(std::vector<FieldDiagnostic>& out, const std::string& prefix) const;
};

enum class PowerStatus { on, off };
enum class PowerTransition { on, off, died, revived };

struct SupplyState {
  double voltage = 0.0;
  PowerStatus status = PowerStatus::off;
};

/// Initial supply: v_const or v_initial, status from the turn-on threshold.
SupplyState initial_supply(const PowerModel& model);

/// Advances the supply voltage over `dt_s` seconds; returns the new voltage.
/// Does not change state.status.
double step_voltage(const PowerModel& model, SupplyState& state, double dt_s, Rng& rng);

/// Hysteresis: off -> revived at v >= v_on, on -> died at v < v_off.
PowerTransition power_state(double voltage, PowerStatus previous, const PowerModel& model);

PowerStatus status_after(PowerTransition transition);

// ---------------------------------------------------------------------------
// Non-volatile checkpoint. Only the rate multiplier survives a power loss.
// ---------------------------------------------------------------------------

struct NvSnapshot {
  double rate_multiplier = 1.0;
  /// CRC-32 of the little-endian IEEE-754 bit pattern of rate_multiplier.
  std::uint32_t checksum = 0;
};

enum class CheckpointPolicy { after_update, never };

NvSnapshot persist(const ControllerState& state);

/// `fresh` with the persisted rate multiplier; t_f and software_elapsed are
/// cleared. Throws CorruptSnapshot.
ControllerState restore(const NvSnapshot& snapshot, const ControllerState& fresh);

/// `alpha=<17 significant digits> checksum=<decimal>`
std::string format_snapshot(const NvSnapshot& snapshot);

/// Inverse of format_snapshot. Throws ParseError (line 1) on malformed text;
/// does not validate the checksum.
NvSnapshot parse_snapshot(std::string_view text);

}  // namespace tagsync
