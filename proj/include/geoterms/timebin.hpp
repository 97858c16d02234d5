#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace geoterms {

using Instant = std::chrono::sys_seconds;

enum class Granularity { kHour, kDay, kWeek, kMonth, kYear };

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view name);

// [begin, end] in UTC; a timestamp is the degenerate range begin == end.
struct TimeRange {
  Instant begin;
  Instant end;

  std::int64_t seconds() const { return (end - begin).count(); }
};

// A calendar-aligned unit of time. Weeks start on Monday, all in UTC.
struct TimeBin {
  Granularity granularity = Granularity::kYear;
  Instant start;

  static TimeBin containing(Instant t, Granularity g);
  // Inverse of label(); throws ParseError on malformed or misaligned labels.
  static TimeBin parse(std::string_view label, Granularity g);

  Instant end() const;  // exclusive
  TimeBin next() const { return TimeBin{granularity, end()}; }

  // "2008", "2008-03", "2008-03-03" (week start or day), "2008-03-03T05".
  std::string label() const;

  friend bool operator==(const TimeBin&, const TimeBin&) = default;
  friend auto operator<=>(const TimeBin& a, const TimeBin& b) { return a.start <=> b.start; }
};

struct BinShare {
  TimeBin bin;
  double share = 0.0;
};

// Distributes value over the bins the range overlaps, proportionally to the
// overlap in seconds. A degenerate range gives the whole value to the bin
// containing the instant. Bins with zero overlap are omitted.
std::vector<BinShare> prorate(const TimeRange& range, double value, Granularity g);

// ISO-8601 date or date-time (Z or +hh:mm offsets) or integer epoch seconds.
Instant parse_timestamp(std::string_view text);
std::string format_timestamp(Instant t);

}  // namespace geoterms
