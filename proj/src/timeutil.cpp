#include "discordq/timeutil.hpp"

#include <cstdio>

#include "discordq/errors.hpp"

namespace discordq {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ParseError("truncated timestamp: " + std::string(s));
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9')
      throw ParseError("bad digit in timestamp: " + std::string(s));
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    throw ParseError("malformed timestamp: " + std::string(s));
}

}  // namespace

Timestamp parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y = digits(s, 0, 4);
  expect(s, 4, '-');
  int mo = digits(s, 5, 2);
  expect(s, 7, '-');
  int d = digits(s, 8, 2);
  if (s.size() <= 10 || (s[10] != 'T' && s[10] != ' '))
    throw ParseError("timestamp needs a time part: " + std::string(s));
  int h = digits(s, 11, 2);
  expect(s, 13, ':');
  int mi = digits(s, 14, 2);
  expect(s, 16, ':');
  int sec = digits(s, 17, 2);
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  int offset_minutes = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    int sign = s[pos] == '-' ? -1 : 1;
    int oh = digits(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    int om = digits(s, pos + 4, 2);
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw ParseError("timestamp must carry Z or an offset: " + std::string(s));
  }
  if (pos != s.size()) throw ParseError("trailing characters in timestamp: " + std::string(s));

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60)
    throw ParseError("timestamp out of range: " + std::string(s));
  auto t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_minutes};
  return time_point_cast<seconds>(t);
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto dp = floor<days>(t);
  year_month_day ymd{dp};
  hh_mm_ss hms{t - dp};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

}  // namespace discordq
