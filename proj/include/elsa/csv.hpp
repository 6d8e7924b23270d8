#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "elsa/error.hpp"

namespace elsa {

/// Decimal point or decimal comma. With a decimal comma, CSV fields are
/// separated by ';' so numbers stay unambiguous.
enum class Locale { point, comma };

inline Locale parse_locale(std::string_view s) {
  if (s == "point" || s == "C" || s == "en") return Locale::point;
  if (s == "comma" || s == "fr") return Locale::comma;
  throw ConfigError("unknown locale '" + std::string(s) + "' (expected point or comma)");
}

struct CsvStyle {
  Locale locale = Locale::point;

  char separator() const { return locale == Locale::comma ? ';' : ','; }

  /// Shortest round-trip representation; empty for NaN.
  std::string number(double x) const {
    if (std::isnan(x)) return {};
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, end);
    return localize(std::move(s));
  }

  std::string localize(std::string s) const {
    if (locale == Locale::comma) {
      for (auto& c : s) {
        if (c == '.') c = ',';
      }
    }
    return s;
  }
};

}  // namespace elsa
