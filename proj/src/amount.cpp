#include "geoterms/amount.hpp"

#include <cmath>
#include <stdexcept>

#include "geoterms/error.hpp"

namespace geoterms {

Amount Amount::from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("amount must be finite");
  // Split into integral and fractional parts so large values keep their
  // unit precision.
  double integral = 0.0;
  double fraction = std::modf(value, &integral);
  __int128 units = static_cast<__int128>(integral) * kUnitsPerOne;
  units += static_cast<__int128>(std::llround(fraction * static_cast<double>(kUnitsPerOne)));
  return Amount(units);
}

Amount Amount::parse(std::string_view text) {
  if (text.empty()) throw ParseError("empty amount");
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    negative = true;
    i = 1;
  }
  __int128 whole = 0;
  bool any_digit = false;
  for (; i < text.size() && text[i] != '.'; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') throw ParseError("bad amount '" + std::string(text) + "'");
    whole = whole * 10 + (c - '0');
    any_digit = true;
  }
  __int128 frac = 0;
  int digits = 0;
  if (i < text.size()) {
    for (++i; i < text.size(); ++i) {
      char c = text[i];
      if (c < '0' || c > '9' || digits == 9) {
        throw ParseError("bad amount '" + std::string(text) + "'");
      }
      frac = frac * 10 + (c - '0');
      ++digits;
      any_digit = true;
    }
  }
  if (!any_digit) throw ParseError("bad amount '" + std::string(text) + "'");
  for (; digits < 9; ++digits) frac *= 10;
  __int128 units = whole * kUnitsPerOne + frac;
  return Amount(negative ? -units : units);
}

double Amount::to_double() const {
  __int128 whole = units_ / kUnitsPerOne;
  __int128 frac = units_ % kUnitsPerOne;
  return static_cast<double>(whole) +
         static_cast<double>(frac) / static_cast<double>(kUnitsPerOne);
}

std::string Amount::to_string() const {
  __int128 u = units_ < 0 ? -units_ : units_;
  __int128 whole = u / kUnitsPerOne;
  auto frac = static_cast<std::int64_t>(u % kUnitsPerOne);
  std::string w;
  do {
    w.insert(w.begin(), static_cast<char>('0' + static_cast<int>(whole % 10)));
    whole /= 10;
  } while (whole != 0);
  std::string f = std::to_string(frac);
  f.insert(0, 9 - f.size(), '0');
  return (units_ < 0 ? "-" : "") + w + "." + f;
}

}  // namespace geoterms
