#include <charconv>
#include <functional>
#include <map>
#include <string>

#include "tagsync/trace_io.hpp"

namespace tagsync {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct BadValue {
  std::string message;
};

double as_double(std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"expected a number, got '" + std::string(v) + "'"};
  }
  return out;
}

std::uint64_t as_u64(std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"expected a non-negative integer, got '" + std::string(v) + "'"};
  }
  return out;
}

bool as_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw BadValue{"expected true or false, got '" + std::string(v) + "'"};
}

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;

Setter number(double ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, std::string_view v) { c.*field = as_double(v); };
}

template <typename Sub>
Setter sub_number(Sub ScenarioConfig::*sub, double Sub::*field) {
  return [sub, field](ScenarioConfig& c, std::string_view v) { (c.*sub).*field = as_double(v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"engine",
       [](ScenarioConfig& c, std::string_view v) {
         auto engine = engine_from_string(v);
         if (!engine) {
           throw BadValue{"expected sender_receiver, event_based or none, got '" +
                          std::string(v) + "'"};
         }
         c.engine = *engine;
       }},
      {"seed", [](ScenarioConfig& c, std::string_view v) { c.seed = as_u64(v); }},
      {"duration_s", number(&ScenarioConfig::duration_s)},
      {"step_ms", number(&ScenarioConfig::step_ms)},
      {"exchange_interval_s", number(&ScenarioConfig::exchange_interval_s)},
      {"burst_interval_s", number(&ScenarioConfig::burst_interval_s)},
      {"warmup_steps",
       [](ScenarioConfig& c, std::string_view v) { c.warmup_steps = as_u64(v); }},
      {"window", [](ScenarioConfig& c, std::string_view v) { c.window = as_u64(v); }},
      {"controller.gain", number(&ScenarioConfig::gain)},
      {"controller.mu_e", number(&ScenarioConfig::mu_e)},
      {"controller.checkpoint",
       [](ScenarioConfig& c, std::string_view v) {
         if (v == "after_update") {
           c.checkpoint = CheckpointPolicy::after_update;
         } else if (v == "never") {
           c.checkpoint = CheckpointPolicy::never;
         } else {
           throw BadValue{"expected after_update or never, got '" + std::string(v) + "'"};
         }
       }},
      {"oscillator.f_nom_hz", sub_number(&ScenarioConfig::oscillator, &OscillatorModel::f_nom_hz)},
      {"oscillator.f_min_hz", sub_number(&ScenarioConfig::oscillator, &OscillatorModel::f_min_hz)},
      {"oscillator.f_max_hz", sub_number(&ScenarioConfig::oscillator, &OscillatorModel::f_max_hz)},
      {"oscillator.static_drift",
       sub_number(&ScenarioConfig::oscillator, &OscillatorModel::static_drift)},
      {"oscillator.noise_sigma",
       sub_number(&ScenarioConfig::oscillator, &OscillatorModel::noise_sigma)},
      {"oscillator.voltage_coeff",
       sub_number(&ScenarioConfig::oscillator, &OscillatorModel::voltage_coeff)},
      {"oscillator.v_nom", sub_number(&ScenarioConfig::oscillator, &OscillatorModel::v_nom)},
      {"oscillator.wrap16",
       [](ScenarioConfig& c, std::string_view v) { c.wrap16 = as_bool(v); }},
      {"reader.resolution_us",
       [](ScenarioConfig& c, std::string_view v) {
         c.reader_resolution_us = static_cast<Micros>(as_u64(v));
       }},
      {"delays.mean_ms", sub_number(&ScenarioConfig::delays, &DelayModel::mean_ms)},
      {"delays.sigma_ms", sub_number(&ScenarioConfig::delays, &DelayModel::sigma_ms)},
      {"delays.outlier_prob", sub_number(&ScenarioConfig::delays, &DelayModel::outlier_prob)},
      {"delays.outlier_scale", sub_number(&ScenarioConfig::delays, &DelayModel::outlier_scale)},
      {"periods.mean_ms", sub_number(&ScenarioConfig::periods, &EventPeriodModel::mean_ms)},
      {"periods.sigma_ms", sub_number(&ScenarioConfig::periods, &EventPeriodModel::sigma_ms)},
      {"power.mode",
       [](ScenarioConfig& c, std::string_view v) {
         if (v == "constant") {
           c.power.mode = PowerMode::constant;
         } else if (v == "harvested") {
           c.power.mode = PowerMode::harvested;
         } else {
           throw BadValue{"expected constant or harvested, got '" + std::string(v) + "'"};
         }
       }},
      {"power.v_const", sub_number(&ScenarioConfig::power, &PowerModel::v_const)},
      {"power.v_on", sub_number(&ScenarioConfig::power, &PowerModel::v_on)},
      {"power.v_off", sub_number(&ScenarioConfig::power, &PowerModel::v_off)},
      {"power.charge_rate", sub_number(&ScenarioConfig::power, &PowerModel::charge_rate)},
      {"power.discharge_rate",
       sub_number(&ScenarioConfig::power, &PowerModel::discharge_rate_active)},
      {"power.ripple_sigma", sub_number(&ScenarioConfig::power, &PowerModel::ripple_sigma)},
      {"power.v_initial", sub_number(&ScenarioConfig::power, &PowerModel::v_initial)},
  };
  return table;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig config;
  std::vector<FieldDiagnostic> diagnostics;
  std::optional<double> bound_ppm;
  bool explicit_min = false;
  bool explicit_max = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      diagnostics.push_back({where, "expected 'key = value'"});
      continue;
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "oscillator.bound_ppm") {
        bound_ppm = as_double(value);
        continue;
      }
      const auto it = setters().find(key);
      if (it == setters().end()) {
        diagnostics.push_back({std::string(key), where + ": unknown key"});
        continue;
      }
      it->second(config, value);
      explicit_min = explicit_min || key == "oscillator.f_min_hz";
      explicit_max = explicit_max || key == "oscillator.f_max_hz";
    } catch (const BadValue& bad) {
      diagnostics.push_back({std::string(key), where + ": " + bad.message});
    }
  }

  // Drift bounds follow f_nom unless given explicitly.
  const double ppm = bound_ppm.value_or(100.0) * 1e-6;
  if (!explicit_min) {
    config.oscillator.f_min_hz = config.oscillator.f_nom_hz * (1.0 - ppm);
  }
  if (!explicit_max) {
    config.oscillator.f_max_hz = config.oscillator.f_nom_hz * (1.0 + ppm);
  }

  try {
    config.validate();
  } catch (const InvalidConfig& invalid) {
    for (const auto& d : invalid.diagnostics()) {
      diagnostics.push_back(d);
    }
  }
  if (!diagnostics.empty()) {
    throw InvalidConfig(std::move(diagnostics));
  }
  return config;
}

}  // namespace tagsync
