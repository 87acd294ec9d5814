#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tagsync/sim.hpp"
#include "tagsync/sync.hpp"

namespace tagsync {

/// Recorded (C_w(t2), C_r(t1)) synchronization points.
struct PairTrace {
  std::vector<SyncPoint> rows;
};

struct BurstRow {
  std::int64_t burst_index = 0;
  Ticks cw_first = 0;
  Ticks cw_last = 0;

  friend bool operator==(const BurstRow&, const BurstRow&) = default;
};

/// Local clock readings at the first and last BlockWrite of each burst.
struct BurstTrace {
  std::vector<BurstRow> rows;
};

inline constexpr std::string_view kPairHeader = "cw_ticks,cr_us";
inline constexpr std::string_view kBurstHeader = "burst_index,cw_first,cw_last";
inline constexpr std::string_view kMetricsHeader =
    "step,ref_time_us,gamma_ticks,rate_or_slope,powered";

/// Throws ParseError or MonotonicityError.
PairTrace parse_pair_trace(std::string_view text);

/// Throws ParseError; cw_last < cw_first is reported as a ParseError on the
/// cw_last column.
BurstTrace parse_burst_trace(std::string_view text);

std::string write_pair_trace(const PairTrace& trace);
std::string write_burst_trace(const BurstTrace& trace);

/// Series as CSV followed by the summary as `# key=value` lines.
std::string write_metrics(const RunMetrics& metrics);

/// Reads the series back; `#` lines are ignored. Throws ParseError.
std::vector<MetricSample> parse_metrics(std::string_view text);

/// Flat `key = value` scenario file with `#` comments and dotted sub-model
/// keys. Unknown keys and bad values are reported together as InvalidConfig.
ScenarioConfig parse_config(std::string_view text);

/// Throws std::runtime_error naming the path when it is unreadable.
std::string read_file(const std::string& path);

}  // namespace tagsync
