#pragma once

#include <stdexcept>
#include <string>

namespace dtsm {

// literal-message overloads avoid string construction on the hot path

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_range(bool cond, const char* msg) {
    if (!cond) throw std::out_of_range(msg);
}

inline void require_range(bool cond, const std::string& msg) {
    if (!cond) throw std::out_of_range(msg);
}

} // namespace dtsm
