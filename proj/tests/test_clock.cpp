#include <doctest.h>

#include <cmath>
#include <vector>

#include "tagsync/clock.hpp"
#include "test_support.hpp"

using namespace tagsync;

TEST_SUITE("clock") {

TEST_CASE("frequency_at with all deviations zero is nominal") {
  OscillatorModel m;
  CHECK(frequency_at(m, 0.0, m.v_nom) == 31250.0);
}

TEST_CASE("frequency_at clamps exactly at the upper bound") {
  OscillatorModel m;
  m.static_drift = 100e-6;
  m.f_max_hz = 31253.125;
  CHECK(frequency_at(m, 0.0, m.v_nom) == doctest::Approx(31253.125).epsilon(1e-15));

  m.static_drift = 500e-6;
  CHECK(frequency_at(m, 0.0, m.v_nom) == 31253.125);
  m.static_drift = -500e-6;
  CHECK(frequency_at(m, 0.0, m.v_nom) == m.f_min_hz);
}

TEST_CASE("frequency_at voltage coupling matches direct evaluation") {
  OscillatorModel m;
  m.voltage_coeff = -50e-6;
  // Oracle in exact decimal arithmetic: 31250 * (1 + (-50e-6) * (-1)) = 31250 + 1.5625.
  const long double oracle = 31250.0L + 31250.0L * 50.0L / 1'000'000.0L;
  CHECK(static_cast<double>(oracle) == 31251.5625);
  CHECK(frequency_at(m, 0.0, m.v_nom - 1.0) == doctest::Approx(31251.5625).epsilon(1e-12));
}

TEST_CASE("advance: 320 us at 31250 Hz is exactly 10 ticks") {
  LocalClock clock{OscillatorModel{}};
  Rng rng(1);
  clock.advance(320, 2.5, rng);
  CHECK(clock.counter() == 10);
  CHECK(clock.accumulated_phase() == 10.0);
}

TEST_CASE("advance: 31 us stays below one tick") {
  LocalClock clock{OscillatorModel{}};
  Rng rng(1);
  clock.advance(31, 2.5, rng);
  CHECK(clock.counter() == 0);
  CHECK(clock.accumulated_phase() == doctest::Approx(0.96875));
}

TEST_CASE("advance: seeded noisy run matches golden counters") {
  std::string golden;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    OscillatorModel m;
    m.f_min_hz = 31250.0 * 0.99;
    m.f_max_hz = 31250.0 * 1.01;
    m.noise_sigma = 2e-3;
    m.static_drift = 300e-6;
    LocalClock clock{m};
    Rng rng(seed);
    for (int i = 0; i < 10000; ++i) {
      clock.advance(1000, 2.5, rng);
    }
    golden += "seed=" + std::to_string(seed) + " counter=" + std::to_string(clock.counter()) +
              " drift=" + test::fmt17(clock.drift_state()) + "\n";
  }
  test::check_golden("clock_counter.txt", golden);
}

TEST_CASE("read") {
  SUBCASE("fresh clock reads zero") {
    LocalClock clock{OscillatorModel{}};
    CHECK(clock.read() == 0);
  }
  SUBCASE("floor of the phase") {
    LocalClock clock{OscillatorModel{}};
    clock.set_phase(7086.5);
    CHECK(clock.read() == 7086);
  }
  SUBCASE("16-bit wraparound") {
    LocalClock clock{OscillatorModel{}, true};
    clock.set_phase(65537.2);
    CHECK(clock.read() == 1);
    CHECK(clock.counter() == 65537);
  }
}

TEST_CASE("reset restarts counter but keeps drift") {
  OscillatorModel m;
  m.noise_sigma = 1e-4;
  LocalClock clock{m};
  Rng rng(9);
  for (int i = 0; i < 50; ++i) clock.advance(1000, 2.5, rng);
  const double drift = clock.drift_state();
  clock.reset(123456);
  CHECK(clock.counter() == 0);
  CHECK(clock.accumulated_phase() == 0.0);
  CHECK(clock.t0() == 123456);
  CHECK(clock.drift_state() == drift);
}

TEST_CASE("invalid models are diagnosed per field") {
  OscillatorModel m;
  m.f_min_hz = 40000.0;
  m.noise_sigma = -1.0;
  std::vector<FieldDiagnostic> out;
  m.validate(out, "oscillator.");
  REQUIRE(out.size() == 2);
  CHECK(out[0].field == "oscillator.f_min_hz");
  CHECK(out[1].field == "oscillator.noise_sigma");
}

TEST_CASE("property: drift bounds, quantization and determinism") {
  Rng gen(20240501);
  for (int trial = 0; trial < 200; ++trial) {
    OscillatorModel m;
    const double ppm = 10.0 + gen.uniform() * 20000.0;
    m.f_nom_hz = 20000.0 + gen.uniform() * 20000.0;
    m.f_min_hz = m.f_nom_hz * (1.0 - ppm * 1e-6);
    m.f_max_hz = m.f_nom_hz * (1.0 + ppm * 1e-6);
    m.static_drift = (gen.uniform() - 0.5) * 4.0 * ppm * 1e-6;
    m.noise_sigma = gen.uniform() * 1e-3;
    m.voltage_coeff = (gen.uniform() - 0.5) * 0.05;
    const std::uint64_t seed = gen.next_u64();

    LocalClock a{m};
    LocalClock b{m};
    Rng ra(seed);
    Rng rb(seed);
    Rng volts(seed ^ 0x55);
    Micros elapsed = 0;
    for (int i = 0; i < 400; ++i) {
      const Micros dt = 1 + static_cast<Micros>(volts.uniform() * 2000.0);
      const double v = 1.5 + volts.uniform();
      a.advance(dt, v, ra);
      b.advance(dt, v, rb);
      elapsed += dt;
      const double frac = a.accumulated_phase() - static_cast<double>(a.counter());
      REQUIRE(frac >= 0.0);
      REQUIRE(frac < 1.0);
      REQUIRE(a.counter() == b.counter());
      REQUIRE(std::abs(a.drift_state()) <= m.drift_bound() + 1e-15);
    }
    const double seconds = static_cast<double>(elapsed) / 1e6;
    const auto gain = static_cast<double>(a.counter());
    CHECK(gain >= m.f_min_hz * seconds - 1.0);
    CHECK(gain <= m.f_max_hz * seconds + 1.0);
  }
}

TEST_CASE("counter is monotone between resets") {
  OscillatorModel m;
  m.noise_sigma = 1e-3;
  m.voltage_coeff = 0.02;
  LocalClock clock{m};
  Rng rng(5);
  Ticks last = 0;
  for (int i = 0; i < 5000; ++i) {
    clock.advance(97, 1.0 + rng.uniform(), rng);
    REQUIRE(clock.counter() >= last);
    last = clock.counter();
  }
}

TEST_CASE("reference clock truncates to its resolution") {
  ReferenceClock reader(10);
  CHECK(reader.reading_at(1234) == 1230);
  CHECK(ReferenceClock{}.reading_at(1234) == 1234);
  CHECK_THROWS_AS(ReferenceClock(0), std::invalid_argument);
}

}  // TEST_SUITE
