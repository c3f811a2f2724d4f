#include "rnc/csv.hpp"

#include <charconv>
#include <cmath>

namespace rnc {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (x == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace rnc
