#pragma once

#include <cstdio>
#include <string>

namespace finitekey::cli {

/// Scientific notation with 10 significant digits; the one number format
/// every CSV column uses, so output diffs stay byte-stable.
inline std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return buf;
}

}  // namespace finitekey::cli
