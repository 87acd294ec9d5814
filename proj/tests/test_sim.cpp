#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tagsync/sim.hpp"
#include "tagsync/trace_io.hpp"
#include "test_support.hpp"

using namespace tagsync;

namespace {

ScenarioConfig load(const std::string& name) {
  return parse_config(read_file(test::scenario_path(name)));
}

ScenarioConfig drift_free() {
  ScenarioConfig cfg;
  cfg.engine = Engine::event_based;
  cfg.duration_s = 30.0;
  cfg.periods.sigma_ms = 0.0;
  return cfg;
}

MetricSample row(std::int64_t step, double gamma, bool powered = true) {
  return {step, step * 1000, Fixed6::from_double(gamma), Fixed6::from_double(1.0), powered};
}

// Replays the supply and the burst schedule with its own arithmetic and
// returns, per burst, whether the burst should survive.
std::vector<bool> expected_outcomes(const ScenarioConfig& cfg) {
  Rng ripple = Rng::substream(cfg.seed, "ripple");
  Rng period = Rng::substream(cfg.seed, "period");
  const PowerModel& p = cfg.power;
  const auto duration = static_cast<Micros>(std::llround(cfg.duration_s * 1e6));
  const std::size_t steps = static_cast<std::size_t>(duration / 1000) + 400;

  // on[k] is the supply status after the k-th millisecond boundary,
  // died[k] whether it went down there.
  std::vector<bool> on(steps + 1);
  std::vector<bool> died(steps + 1);
  double v = p.v_initial < 0 ? p.v_on : p.v_initial;
  bool status = v >= p.v_on;
  on[0] = status;
  for (std::size_t k = 1; k <= steps; ++k) {
    v += status ? -p.discharge_rate_active * 1e-3 : p.charge_rate * 1e-3;
    v += p.ripple_sigma * ripple.normal();
    v = std::max(v, 0.0);
    died[k] = false;
    if (status && v < p.v_off) {
      status = false;
      died[k] = true;
    } else if (!status && v >= p.v_on) {
      status = true;
    }
    on[k] = status;
  }

  std::vector<bool> outcome;
  const auto interval = static_cast<Micros>(std::llround(cfg.burst_interval_s * 1e6));
  Micros now = 0;
  for (std::int64_t step = 0;; ++step) {
    const Micros start = std::max((step + 1) * interval, now);
    if (start > duration) break;
    const double ms = cfg.periods.mean_ms + cfg.periods.sigma_ms * period.normal();
    const Micros span = std::max<Micros>(1, std::llround(std::max(ms, 1e-3) * 1000.0));
    const Micros end = start + span;
    bool ok = on[static_cast<std::size_t>(start / 1000)];
    for (Micros b = (start / 1000 + 1) * 1000; b <= end; b += 1000) {
      if (died[static_cast<std::size_t>(b / 1000)]) ok = false;
    }
    outcome.push_back(ok);
    now = end;
  }
  return outcome;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("Fixed6 rounds to six decimals and round trips through text") {
  CHECK(Fixed6::from_double(1.2345675).str() == "1.234568");
  CHECK(Fixed6::from_double(-0.0000004).str() == "0.000000");
  CHECK(Fixed6::from_double(-2.5).str() == "-2.500000");
  CHECK(Fixed6::from_double(7086.0).units == 7086000000);
  CHECK_THROWS(Fixed6::from_double(std::nan("")));
}

TEST_CASE("engine names") {
  CHECK(engine_from_string("event_based") == Engine::event_based);
  CHECK(engine_from_string("sender_receiver") == Engine::sender_receiver);
  CHECK(engine_from_string("none") == Engine::none);
  CHECK_FALSE(engine_from_string("bogus").has_value());
  CHECK(to_string(Engine::none) == "none");
}

TEST_CASE("summarize excludes warm-up and gap rows") {
  const std::vector<MetricSample> series{row(0, 100.0), row(1, -4.0), row(2, 0.0, false),
                                         row(3, 2.0)};
  SummaryOptions opts;
  opts.warmup_steps = 1;
  const MetricsSummary s = summarize(series, opts);
  CHECK(s.samples == 2);
  CHECK(s.gaps == 1);
  CHECK(s.mean_abs_gamma_ticks == doctest::Approx(3.0));
  CHECK(s.max_abs_gamma_ticks == doctest::Approx(4.0));
  CHECK(s.std_gamma_ticks == doctest::Approx(3.0));
  CHECK(s.mean_abs_gamma_ms == doctest::Approx(3.0 * 0.032));
  CHECK(s.converged);

  const MetricsSummary empty = summarize({}, SummaryOptions{});
  CHECK(empty.samples == 0);
  CHECK(empty.mean_abs_gamma_ticks == 0.0);
}

TEST_CASE("summarize flags runs pinned at a clamp bound") {
  std::vector<MetricSample> series;
  for (int i = 0; i < 20; ++i) {
    MetricSample s = row(i, 50.0);
    s.rate_or_slope = Fixed6::from_double(i % 3 == 0 ? 0.97 : 1.01);
    series.push_back(s);
  }
  SummaryOptions opts;
  opts.rate_min = 0.97;
  opts.rate_max = 1.03;
  CHECK(summarize(series, opts).converged);
  for (auto& s : series) s.rate_or_slope = Fixed6::from_double(0.97);
  CHECK_FALSE(summarize(series, opts).converged);
}

TEST_CASE("validate collects every offending field") {
  ScenarioConfig cfg;
  cfg.duration_s = -1.0;
  cfg.burst_interval_s = 0.0;
  cfg.gain = -1.0;
  try {
    cfg.validate();
    FAIL("expected InvalidConfig");
  } catch (const InvalidConfig& e) {
    std::vector<std::string> fields;
    for (const auto& d : e.diagnostics()) fields.push_back(d.field);
    CHECK(std::find(fields.begin(), fields.end(), "duration_s") != fields.end());
    CHECK(std::find(fields.begin(), fields.end(), "burst_interval_s") != fields.end());
    CHECK(std::find(fields.begin(), fields.end(), "controller.gain") != fields.end());
  }
}

TEST_CASE("uncontrolled drift-free run whose period is a whole number of ticks") {
  ScenarioConfig cfg = drift_free();
  cfg.engine = Engine::none;
  cfg.periods.mean_ms = 226.72;
  cfg.mu_e = 7085.0;
  const RunMetrics m = run_scenario(cfg);
  REQUIRE(m.summary.samples > 50);
  for (const auto& s : m.series) {
    REQUIRE(s.gamma_ticks.units == 0);
    REQUIRE(s.rate_or_slope.value() == 1.0);
  }
}

TEST_CASE("event-based on a 1% fast tag converges below one tick") {
  ScenarioConfig cfg = drift_free();
  cfg.oscillator.f_max_hz = 31250.0 * 1.03;
  cfg.oscillator.f_min_hz = 31250.0 * 0.97;
  cfg.oscillator.static_drift = 0.01;
  cfg.warmup_steps = 30;
  const RunMetrics m = run_scenario(cfg);
  CHECK(m.summary.max_abs_gamma_ticks < 1.0);
  CHECK(m.summary.converged);
  CHECK(m.summary.within_bound);
}

TEST_CASE("sender-receiver default scenario stays within ten ticks") {
  const RunMetrics m = run_scenario(load("sender_receiver.cfg"));
  CHECK(m.summary.samples >= 290);
  CHECK(m.summary.max_abs_gamma_ticks <= 10.0);
  CHECK_FALSE(m.final_snapshot.has_value());
}

TEST_CASE("reference times strictly increase and runs are byte-deterministic") {
  for (const char* name : {"stable_voltage.cfg", "harvested.cfg", "sender_receiver.cfg"}) {
    CAPTURE(name);
    const ScenarioConfig cfg = load(name);
    const RunMetrics a = run_scenario(cfg);
    const RunMetrics b = run_scenario(cfg);
    CHECK(write_metrics(a) == write_metrics(b));
    for (std::size_t i = 1; i < a.series.size(); ++i) {
      REQUIRE(a.series[i].ref_time_us > a.series[i - 1].ref_time_us);
      REQUIRE(a.series[i].step > a.series[i - 1].step);
    }
    ScenarioConfig other = cfg;
    other.seed = cfg.seed + 1;
    CHECK(write_metrics(run_scenario(other)) != write_metrics(a));
  }
}

TEST_CASE("gap rows appear exactly where the supply was down") {
  for (std::uint64_t seed : {1ULL, 2ULL, 9ULL}) {
    ScenarioConfig cfg = load("harvested.cfg");
    cfg.seed = seed;
    const RunMetrics m = run_scenario(cfg);
    const std::vector<bool> expected = expected_outcomes(cfg);
    REQUIRE(m.series.size() == expected.size());
    std::size_t gaps = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CAPTURE(i);
      REQUIRE(m.series[i].powered == expected[i]);
      gaps += !expected[i];
    }
    CHECK(gaps > 0);
    CHECK(m.summary.gaps == gaps);
  }
}

TEST_CASE("sweep_gain") {
  SUBCASE("gain zero reproduces the uncontrolled baseline") {
    ScenarioConfig cfg = load("stable_voltage.cfg");
    const std::vector<double> gains{0.0};
    const auto swept = sweep_gain(cfg, gains);
    cfg.engine = Engine::none;
    const RunMetrics base = run_scenario(cfg);
    REQUIRE(swept.size() == 1);
    CHECK(swept[0].mean_abs_gamma_ticks == base.summary.mean_abs_gamma_ticks);
    CHECK(swept[0].max_abs_gamma_ticks == base.summary.max_abs_gamma_ticks);
    CHECK_FALSE(swept[0].within_bound);
  }
  SUBCASE("gain twice the bound is reported as not converged") {
    ScenarioConfig cfg = load("stable_voltage.cfg");
    const double bound = convergence_bound(cfg.periods.mean_ms / 1e3, cfg.oscillator.f_nom_hz);
    const std::vector<double> gains{1e-4, 2.0 * bound};
    const auto s = sweep_gain(cfg, gains);
    CHECK(s[0].converged);
    CHECK(s[0].within_bound);
    CHECK_FALSE(s[1].converged);
    CHECK_FALSE(s[1].within_bound);
    CHECK(s[1].gain == 2.0 * bound);
  }
  SUBCASE("jittered trend over gains 2e-4, 1e-4, 5e-5") {
    std::vector<double> med(3);
    const std::vector<double> gains{2e-4, 1e-4, 5e-5};
    std::vector<std::vector<double>> by_gain(3);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      ScenarioConfig cfg = load("stable_voltage.cfg");
      cfg.seed = seed;
      cfg.duration_s = 150.0;
      cfg.warmup_steps = 100;
      const auto s = sweep_gain(cfg, gains);
      for (std::size_t i = 0; i < 3; ++i) by_gain[i].push_back(s[i].mean_abs_gamma_ticks);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      std::sort(by_gain[i].begin(), by_gain[i].end());
      med[i] = by_gain[i][1];
    }
    CHECK(med[1] <= med[0]);
    CHECK(med[2] <= med[1] + 0.25);
  }
  SUBCASE("requires the event-based engine") {
    ScenarioConfig cfg = load("sender_receiver.cfg");
    const std::vector<double> gains{1e-4};
    CHECK_THROWS_AS(sweep_gain(cfg, gains), InvalidConfig);
  }
}

TEST_CASE("compare_with_without") {
  SUBCASE("stable supply") {
    const Comparison c = compare_with_without(load("stable_voltage.cfg"));
    CHECK(c.improvement_ratio >= 2.0);
    CHECK(c.without_sync.gain == 0.0);
  }
  SUBCASE("harvested supply") {
    const Comparison c = compare_with_without(load("harvested.cfg"));
    CHECK(c.improvement_ratio >= 4.0);
  }
  SUBCASE("drift-free, jitter-free tag sits at the quantization floor") {
    ScenarioConfig cfg = drift_free();
    cfg.periods.mean_ms = 226.72;
    cfg.mu_e = 7085.0;
    const Comparison c = compare_with_without(cfg);
    CHECK(c.improvement_ratio == 1.0);
  }
}

}  // TEST_SUITE
