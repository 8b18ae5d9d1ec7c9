#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "gainswitch/errors.hpp"

namespace gainswitch {

inline constexpr double kElementaryCharge = 1.602176634e-19; // [C]

namespace detail {

inline double parse_suffixed(std::string_view text, std::string_view what,
                             const std::pair<std::string_view, double>* table,
                             std::size_t table_len) {
    std::string s(text);
    // trim
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty())
        throw config_error("empty " + std::string(what) + " value");

    const char* begin = s.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin)
        throw config_error("cannot parse " + std::string(what) + " value '" + s + "'");
    std::string suffix(end);
    while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.front())))
        suffix.erase(suffix.begin());
    if (suffix.empty())
        return value; // plain SI
    for (std::size_t i = 0; i < table_len; ++i)
        if (suffix == table[i].first)
            return value * table[i].second;
    throw config_error("unknown unit suffix '" + suffix + "' in " + std::string(what) +
                       " value '" + s + "'");
}

} // namespace detail

// "13mA", "6A", "450uA" or a plain SI number -> amperes.
inline double parse_current(std::string_view text) {
    static constexpr std::pair<std::string_view, double> table[] = {
        {"A", 1.0}, {"mA", 1e-3}, {"uA", 1e-6}, {"nA", 1e-9},
    };
    return detail::parse_suffixed(text, "current", table, std::size(table));
}

// "2ps", "5ns", "1.5us", "20e-9" or a plain SI number -> seconds.
inline double parse_time(std::string_view text) {
    static constexpr std::pair<std::string_view, double> table[] = {
        {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6},
        {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15},
    };
    return detail::parse_suffixed(text, "time", table, std::size(table));
}

} // namespace gainswitch
