#pragma once

// Deterministic text formatting for CSV/JSON output.

#include <cstdio>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace symcount {

// Shortest round-trip decimal form of a double; stable across runs of the
// same binary, which is what the byte-identical output guarantee needs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    for (int prec = 1; prec <= 16; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == back) return shorter;
    }
    return buf;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

} // namespace symcount
