#include "modfuse/dates.hpp"

#include <cstdio>
#include <stdexcept>

#include "modfuse/errors.hpp"

namespace modfuse {

// Days-from-civil / civil-from-days after Howard Hinnant's public-domain
// calendar algorithms.
std::int64_t Date::serial() const {
    std::int64_t y = year;
    const int m = month;
    const int d = day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_serial(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int Date::weekday() const {
    // serial 0 (1970-01-01) was a Thursday
    std::int64_t s = serial();
    return static_cast<int>(((s % 7) + 10) % 7);
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char trail = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &trail) != 3)
        throw InputError("invalid date '" + text + "' (expected YYYY-MM-DD)");
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw InputError("invalid date '" + text + "' (out of range)");
    Date date{y, m, d};
    if (Date::from_serial(date.serial()) != date)
        throw InputError("invalid date '" + text + "' (nonexistent day)");
    return date;
}

WeekIndex WeekIndex::of(const Date& d) {
    // The ISO week of d is the week of the Thursday in d's Mon..Sun week.
    const std::int64_t thursday = d.serial() - d.weekday() + 3;
    const Date t = Date::from_serial(thursday);
    const std::int64_t jan1 = Date{t.year, 1, 1}.serial();
    const int week = static_cast<int>((thursday - jan1) / 7) + 1;
    return WeekIndex{t.year, week};
}

Date WeekIndex::week_start() const {
    // Monday of week 1 = Monday of the week containing Jan 4.
    const Date jan4{iso_year, 1, 4};
    const std::int64_t week1_monday = jan4.serial() - jan4.weekday();
    return Date::from_serial(week1_monday + static_cast<std::int64_t>(iso_week - 1) * 7);
}

WeekIndex WeekIndex::next() const {
    return WeekIndex::of(Date::from_serial(week_start().serial() + 7));
}

std::string WeekIndex::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-W%02d", iso_year, iso_week);
    return buf;
}

int weeks_in_iso_year(int iso_year) {
    return WeekIndex::of(Date{iso_year, 12, 28}).iso_week;
}

int weeks_between(const WeekIndex& a, const WeekIndex& b) {
    return static_cast<int>((b.week_start().serial() - a.week_start().serial()) / 7);
}

}  // namespace modfuse
