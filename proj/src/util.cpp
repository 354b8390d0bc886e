#include "sarplan/util.hpp"

#include <cstdio>

namespace sarplan {

std::string fmt_double(double v, int digits) {
  if (v == 0.0) v = 0.0;  // collapse negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace sarplan
