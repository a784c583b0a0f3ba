#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace modfuse {

// Proleptic Gregorian calendar date. Serial day 0 = 1970-01-01.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    std::int64_t serial() const;
    static Date from_serial(std::int64_t days);
    // 0 = Monday ... 6 = Sunday
    int weekday() const;

    std::string to_string() const;                 // ISO-8601, YYYY-MM-DD
    static Date parse(const std::string& text);    // throws InputError
};

// ISO-8601 week (Monday start, week 1 contains the first Thursday).
struct WeekIndex {
    int iso_year = 1970;
    int iso_week = 1;

    auto operator<=>(const WeekIndex&) const = default;

    static WeekIndex of(const Date& d);
    Date week_start() const;   // the Monday of this week
    WeekIndex next() const;
    std::string to_string() const;  // YYYY-Www
};

// Number of ISO weeks in the given ISO year (52 or 53).
int weeks_in_iso_year(int iso_year);

// Signed count of week steps from a to b (0 when equal).
int weeks_between(const WeekIndex& a, const WeekIndex& b);

}  // namespace modfuse
