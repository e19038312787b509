#pragma once

#include <iomanip>
#include <locale>
#include <sstream>
#include <string>

namespace kubolab {

/// 17 significant digits, '.' decimal, no "-0"; the frozen float format of every CSV.
inline std::string format_double(double x) {
  if (x == 0.0) x = 0.0;
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace kubolab
