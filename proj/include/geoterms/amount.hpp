#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace geoterms {

// Non-negative quantity held as an integer count of 1e-9 units.
//
// Addition is exact, associative and commutative.
class Amount {
 public:
  static constexpr std::int64_t kUnitsPerOne = 1'000'000'000;

  constexpr Amount() = default;

  // Rounds half away from zero to the nearest unit.
  static Amount from_double(double value);
  // Parses the decimal text written by to_string() (up to 9 fraction digits).
  static Amount parse(std::string_view text);
  static constexpr Amount from_units(__int128 units) { return Amount(units); }

  double to_double() const;
  // Exact decimal rendering with 9 fraction digits, e.g. "12.500000000".
  std::string to_string() const;

  __int128 units() const { return units_; }
  bool is_zero() const { return units_ == 0; }

  Amount& operator+=(const Amount& other) {
    units_ += other.units_;
    return *this;
  }
  friend Amount operator+(Amount a, const Amount& b) { return a += b; }
  friend bool operator==(const Amount&, const Amount&) = default;
  friend std::strong_ordering operator<=>(const Amount& a, const Amount& b) {
    return a.units_ <=> b.units_;
  }

 private:
  constexpr explicit Amount(__int128 units) : units_(units) {}

  __int128 units_ = 0;
};

}  // namespace geoterms
