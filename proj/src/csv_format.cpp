#include "frmom/csv_format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "frmom/errors.hpp"

namespace frmom {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_real(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  if (text.empty()) throw DomainError("parse_real: empty field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) throw DomainError("parse_real: malformed number '" + text + "'");
  return v;
}

}  // namespace frmom
