#include "geoterms/timebin.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>
#include <stdexcept>

#include "geoterms/error.hpp"

namespace geoterms {

using namespace std::chrono;

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::kHour:
      return "hour";
    case Granularity::kDay:
      return "day";
    case Granularity::kWeek:
      return "week";
    case Granularity::kMonth:
      return "month";
    case Granularity::kYear:
      return "year";
  }
  return "?";
}

Granularity parse_granularity(std::string_view name) {
  for (auto g : {Granularity::kHour, Granularity::kDay, Granularity::kWeek, Granularity::kMonth,
                 Granularity::kYear}) {
    if (to_string(g) == name) return g;
  }
  throw ConfigError("unknown granularity '" + std::string(name) + "'");
}

TimeBin TimeBin::containing(Instant t, Granularity g) {
  sys_days day = floor<days>(t);
  year_month_day ymd(day);
  switch (g) {
    case Granularity::kHour:
      return {g, floor<hours>(t)};
    case Granularity::kDay:
      return {g, Instant(day)};
    case Granularity::kWeek: {
      // Days since the preceding Monday.
      auto back = (weekday(day) - Monday).count();
      return {g, Instant(day - days(back))};
    }
    case Granularity::kMonth:
      return {g, Instant(sys_days(ymd.year() / ymd.month() / 1))};
    case Granularity::kYear:
      return {g, Instant(sys_days(ymd.year() / January / 1))};
  }
  return {g, t};
}

Instant TimeBin::end() const {
  sys_days day = floor<days>(start);
  year_month_day ymd(day);
  switch (granularity) {
    case Granularity::kHour:
      return start + hours(1);
    case Granularity::kDay:
      return start + days(1);
    case Granularity::kWeek:
      return start + days(7);
    case Granularity::kMonth:
      return Instant(sys_days(ymd.year() / ymd.month() / 1 + months(1)));
    case Granularity::kYear:
      return Instant(sys_days((ymd.year() + years(1)) / January / 1));
  }
  return start;
}

std::string TimeBin::label() const {
  sys_days day = floor<days>(start);
  year_month_day ymd(day);
  int y = static_cast<int>(ymd.year());
  unsigned m = static_cast<unsigned>(ymd.month());
  unsigned d = static_cast<unsigned>(ymd.day());
  char buf[32];
  switch (granularity) {
    case Granularity::kYear:
      std::snprintf(buf, sizeof buf, "%04d", y);
      break;
    case Granularity::kMonth:
      std::snprintf(buf, sizeof buf, "%04d-%02u", y, m);
      break;
    case Granularity::kWeek:
    case Granularity::kDay:
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
      break;
    case Granularity::kHour: {
      auto h = duration_cast<hours>(start - Instant(day)).count();
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld", y, m, d, static_cast<long long>(h));
      break;
    }
  }
  return buf;
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<sys_days> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2))) {
    return std::nullopt;
  }
  parse_int(s.substr(0, 4), y);
  parse_int(s.substr(5, 2), m);
  parse_int(s.substr(8, 2), d);
  year_month_day ymd{year(y), month(static_cast<unsigned>(m)), day(static_cast<unsigned>(d))};
  if (!ymd.ok()) return std::nullopt;
  return sys_days(ymd);
}

}  // namespace

TimeBin TimeBin::parse(std::string_view label, Granularity g) {
  auto fail = [&]() -> TimeBin {
    throw ParseError("bad " + std::string(to_string(g)) + " bin label '" + std::string(label) + "'");
  };
  Instant start;
  switch (g) {
    case Granularity::kYear: {
      int y = 0;
      if (label.size() != 4 || !all_digits(label) || !parse_int(label, y)) return fail();
      start = Instant(sys_days(year(y) / January / 1));
      break;
    }
    case Granularity::kMonth: {
      auto d = label.size() == 7 ? parse_date(std::string(label) + "-01") : std::nullopt;
      if (!d) return fail();
      start = Instant(*d);
      break;
    }
    case Granularity::kWeek:
    case Granularity::kDay: {
      auto d = parse_date(label);
      if (!d) return fail();
      start = Instant(*d);
      break;
    }
    case Granularity::kHour: {
      int h = 0;
      if (label.size() != 13 || label[10] != 'T' || !all_digits(label.substr(11)) ||
          !parse_int(label.substr(11), h) || h > 23) {
        return fail();
      }
      auto d = parse_date(label.substr(0, 10));
      if (!d) return fail();
      start = Instant(*d) + hours(h);
      break;
    }
  }
  TimeBin bin{g, start};
  if (containing(start, g) != bin) return fail();
  return bin;
}

std::vector<BinShare> prorate(const TimeRange& range, double value, Granularity g) {
  std::vector<BinShare> out;
  if (range.end < range.begin) throw std::invalid_argument("time range ends before it starts");
  if (range.begin == range.end) {
    out.push_back({TimeBin::containing(range.begin, g), value});
    return out;
  }
  const auto total = static_cast<double>(range.seconds());
  for (TimeBin bin = TimeBin::containing(range.begin, g); bin.start < range.end; bin = bin.next()) {
    Instant lo = std::max(bin.start, range.begin);
    Instant hi = std::min(bin.end(), range.end);
    auto overlap = (hi - lo).count();
    if (overlap <= 0) continue;
    out.push_back({bin, value * (static_cast<double>(overlap) / total)});
  }
  return out;
}

Instant parse_timestamp(std::string_view text) {
  auto fail = [&]() -> Instant { throw ParseError("bad timestamp '" + std::string(text) + "'"); };
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return fail();

  std::string_view digits = text.front() == '-' ? text.substr(1) : text;
  if (all_digits(digits)) {
    long long epoch = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), epoch);
    if (ec != std::errc() || ptr != text.data() + text.size()) return fail();
    return Instant(seconds(epoch));
  }

  auto date = parse_date(text.substr(0, std::min<std::size_t>(10, text.size())));
  if (!date) return fail();
  Instant t(*date);
  std::string_view rest = text.substr(10);
  if (rest.empty()) return t;
  if (rest.front() != 'T' && rest.front() != ' ') return fail();
  rest.remove_prefix(1);

  // hh:mm[:ss[.fff]]
  int hh = 0, mm = 0, ss = 0;
  if (rest.size() < 5 || rest[2] != ':' || !parse_int(rest.substr(0, 2), hh) || !parse_int(rest.substr(3, 2), mm)) {
    return fail();
  }
  rest.remove_prefix(5);
  if (!rest.empty() && rest.front() == ':') {
    if (rest.size() < 3 || !parse_int(rest.substr(1, 2), ss)) return fail();
    rest.remove_prefix(3);
    if (!rest.empty() && rest.front() == '.') {
      rest.remove_prefix(1);
      while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) return fail();
  t += hours(hh) + minutes(mm) + seconds(ss);

  if (rest.empty() || rest == "Z" || rest == "z") return t;
  if ((rest.front() == '+' || rest.front() == '-') && (rest.size() == 6 || rest.size() == 5 || rest.size() == 3)) {
    int sign = rest.front() == '-' ? -1 : 1;
    std::string_view off = rest.substr(1);
    int oh = 0, om = 0;
    if (off.size() == 5) {
      if (off[2] != ':' || !parse_int(off.substr(0, 2), oh) || !parse_int(off.substr(3, 2), om)) return fail();
    } else if (off.size() == 4) {
      if (!parse_int(off.substr(0, 2), oh) || !parse_int(off.substr(2, 2), om)) return fail();
    } else if (!parse_int(off, oh)) {
      return fail();
    }
    // Local time = UTC + offset.
    return t - sign * (hours(oh) + minutes(om));
  }
  return fail();
}

std::string format_timestamp(Instant t) {
  sys_days day = floor<days>(t);
  year_month_day ymd(day);
  hh_mm_ss hms(t - Instant(day));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(hms.hours().count()), static_cast<long long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

}  // namespace geoterms
