#include "tagsync/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tagsync {

namespace {

struct Field {
  std::string_view text;
  std::size_t column = 1;
};

struct Row {
  std::size_t line = 0;
  std::vector<Field> fields;
};

// Splits CSV text into data rows. Comment (`#`) and blank lines are skipped;
// the first remaining line must equal `header`.
std::vector<Row> split_rows(std::string_view text, std::string_view header) {
  std::vector<Row> rows;
  bool seen_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (!seen_header) {
      if (line != header) {
        throw ParseError(line_no, 1, "expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    Row row;
    row.line = line_no;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t stop = comma == std::string_view::npos ? line.size() : comma;
      row.fields.push_back({line.substr(start, stop - start), start + 1});
      if (comma == std::string_view::npos) {
        break;
      }
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (!seen_header) {
    throw ParseError(line_no == 0 ? 1 : line_no, 1,
                     "missing header '" + std::string(header) + "'");
  }
  return rows;
}

void expect_fields(const Row& row, std::size_t count) {
  if (row.fields.size() != count) {
    const std::size_t column =
        row.fields.size() > count ? row.fields[count].column : row.fields.back().column;
    throw ParseError(row.line, column,
                     "expected " + std::to_string(count) + " fields, found " +
                         std::to_string(row.fields.size()));
  }
}

std::int64_t parse_int(const Row& row, const Field& field, std::string_view name) {
  std::int64_t value = 0;
  const char* begin = field.text.data();
  const char* end = begin + field.text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.text.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(row.line, field.column,
                     "expected integer " + std::string(name) + ", got '" +
                         std::string(field.text) + "'");
  }
  return value;
}

// Strict `-?digits.dddddd`.
Fixed6 parse_fixed6(const Row& row, const Field& field, std::string_view name) {
  const auto fail = [&] {
    throw ParseError(row.line, field.column,
                     "expected 6-decimal " + std::string(name) + ", got '" +
                         std::string(field.text) + "'");
  };
  std::string_view text = field.text;
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  const std::size_t dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || text.size() - dot - 1 != 6) {
    fail();
  }
  std::uint64_t whole = 0;
  std::uint64_t frac = 0;
  const std::string_view whole_text = text.substr(0, dot);
  const std::string_view frac_text = text.substr(dot + 1);
  auto [p1, e1] = std::from_chars(whole_text.data(), whole_text.data() + whole_text.size(), whole);
  auto [p2, e2] = std::from_chars(frac_text.data(), frac_text.data() + frac_text.size(), frac);
  if (e1 != std::errc() || p1 != whole_text.data() + whole_text.size() || e2 != std::errc() ||
      p2 != frac_text.data() + frac_text.size() || whole > 9'000'000'000'000ULL) {
    fail();
  }
  const auto units = static_cast<std::int64_t>(whole * 1'000'000ULL + frac);
  return Fixed6{negative ? -units : units};
}

std::string format_double(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

}  // namespace

PairTrace parse_pair_trace(std::string_view text) {
  PairTrace trace;
  for (const Row& row : split_rows(text, kPairHeader)) {
    expect_fields(row, 2);
    SyncPoint point{parse_int(row, row.fields[0], "cw_ticks"),
                    parse_int(row, row.fields[1], "cr_us")};
    if (!trace.rows.empty() && point.cr <= trace.rows.back().cr) {
      throw MonotonicityError(row.line);
    }
    trace.rows.push_back(point);
  }
  return trace;
}

BurstTrace parse_burst_trace(std::string_view text) {
  BurstTrace trace;
  for (const Row& row : split_rows(text, kBurstHeader)) {
    expect_fields(row, 3);
    BurstRow burst{parse_int(row, row.fields[0], "burst_index"),
                   parse_int(row, row.fields[1], "cw_first"),
                   parse_int(row, row.fields[2], "cw_last")};
    if (burst.cw_last < burst.cw_first) {
      throw ParseError(row.line, row.fields[2].column, "cw_last is below cw_first");
    }
    trace.rows.push_back(burst);
  }
  return trace;
}

std::string write_pair_trace(const PairTrace& trace) {
  std::string out(kPairHeader);
  out += '\n';
  for (const auto& row : trace.rows) {
    out += std::to_string(row.cw) + ',' + std::to_string(row.cr) + '\n';
  }
  return out;
}

std::string write_burst_trace(const BurstTrace& trace) {
  std::string out(kBurstHeader);
  out += '\n';
  for (const auto& row : trace.rows) {
    out += std::to_string(row.burst_index) + ',' + std::to_string(row.cw_first) + ',' +
           std::to_string(row.cw_last) + '\n';
  }
  return out;
}

std::string write_metrics(const RunMetrics& metrics) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& s : metrics.series) {
    out += std::to_string(s.step) + ',' + std::to_string(s.ref_time_us) + ',' +
           s.gamma_ticks.str() + ',' + s.rate_or_slope.str() + ',' + (s.powered ? '1' : '0') +
           '\n';
  }
  const MetricsSummary& m = metrics.summary;
  const auto line = [&out](std::string_view key, const std::string& value) {
    out += "# ";
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("engine", std::string(to_string(metrics.engine)));
  line("warmup_steps", std::to_string(metrics.options.warmup_steps));
  line("tick_hz", format_double("%.6f", metrics.options.tick_hz));
  line("gain", format_double("%.9g", m.gain));
  line("samples", std::to_string(m.samples));
  line("gaps", std::to_string(m.gaps));
  line("mean_abs_gamma_ticks", format_double("%.6f", m.mean_abs_gamma_ticks));
  line("max_abs_gamma_ticks", format_double("%.6f", m.max_abs_gamma_ticks));
  line("std_gamma_ticks", format_double("%.6f", m.std_gamma_ticks));
  line("mean_abs_gamma_ms", format_double("%.6f", m.mean_abs_gamma_ms));
  line("max_abs_gamma_ms", format_double("%.6f", m.max_abs_gamma_ms));
  line("std_gamma_ms", format_double("%.6f", m.std_gamma_ms));
  line("converged", m.converged ? "1" : "0");
  line("within_bound", m.within_bound ? "1" : "0");
  if (metrics.final_snapshot) {
    out += "# nv_snapshot " + format_snapshot(*metrics.final_snapshot) + '\n';
  }
  return out;
}

std::vector<MetricSample> parse_metrics(std::string_view text) {
  std::vector<MetricSample> series;
  for (const Row& row : split_rows(text, kMetricsHeader)) {
    expect_fields(row, 5);
    MetricSample s;
    s.step = parse_int(row, row.fields[0], "step");
    s.ref_time_us = parse_int(row, row.fields[1], "ref_time_us");
    s.gamma_ticks = parse_fixed6(row, row.fields[2], "gamma_ticks");
    s.rate_or_slope = parse_fixed6(row, row.fields[3], "rate_or_slope");
    const std::string_view powered = row.fields[4].text;
    if (powered != "0" && powered != "1") {
      throw ParseError(row.line, row.fields[4].column, "powered must be 0 or 1");
    }
    s.powered = powered == "1";
    series.push_back(s);
  }
  return series;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace tagsync
