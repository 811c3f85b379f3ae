#pragma once

#include <string>

namespace frmom {

/// Shortest form that round-trips: `%.17g`, with `nan`, `inf`, `-inf` spelled out.
std::string format_real(double value);

/// Inverse of format_real. Throws DomainError on malformed text.
double parse_real(const std::string& text);

}  // namespace frmom
