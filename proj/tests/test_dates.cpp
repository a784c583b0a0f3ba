#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modfuse/dates.hpp"
#include "modfuse/errors.hpp"

using namespace modfuse;

TEST_CASE("serial round-trip and weekday") {
    CHECK(Date{1970, 1, 1}.serial() == 0);
    CHECK(Date{1970, 1, 1}.weekday() == 3);  // Thursday
    for (std::int64_t s : {-1000, -1, 0, 1, 18506, 18800, 20000}) {
        CHECK(Date::from_serial(s).serial() == s);
    }
    CHECK(Date{2020, 9, 1}.weekday() == 1);   // Tuesday
    CHECK(Date{2021, 6, 25}.weekday() == 4);  // Friday
}

TEST_CASE("ISO week assignment") {
    // canonical tricky cases around year boundaries
    CHECK(WeekIndex::of(Date{2021, 1, 1}) == WeekIndex{2020, 53});
    CHECK(WeekIndex::of(Date{2021, 1, 4}) == WeekIndex{2021, 1});
    CHECK(WeekIndex::of(Date{2020, 12, 31}) == WeekIndex{2020, 53});
    CHECK(WeekIndex::of(Date{2019, 12, 30}) == WeekIndex{2020, 1});
    CHECK(WeekIndex::of(Date{2020, 9, 1}) == WeekIndex{2020, 36});
    CHECK(WeekIndex::of(Date{2021, 6, 25}) == WeekIndex{2021, 25});
    CHECK(weeks_in_iso_year(2020) == 53);
    CHECK(weeks_in_iso_year(2021) == 52);
}

TEST_CASE("week start is the Monday of the week") {
    CHECK(WeekIndex{2020, 36}.week_start() == Date{2020, 8, 31});
    CHECK(WeekIndex{2020, 53}.week_start() == Date{2020, 12, 28});
    CHECK(WeekIndex{2021, 1}.week_start() == Date{2021, 1, 4});
    for (int w = 1; w <= 52; ++w) CHECK(WeekIndex{2021, w}.week_start().weekday() == 0);
}

TEST_CASE("next and weeks_between are consistent") {
    WeekIndex w{2020, 36};
    const WeekIndex start = w;
    for (int i = 0; i < 60; ++i) {
        CHECK(weeks_between(start, w) == i);
        w = w.next();
    }
    CHECK(WeekIndex{2020, 53}.next() == WeekIndex{2021, 1});
}

TEST_CASE("date parsing") {
    CHECK(Date::parse("2020-09-01") == Date{2020, 9, 1});
    CHECK(Date::parse("2020-09-01").to_string() == "2020-09-01");
    CHECK_THROWS_AS(Date::parse("not-a-date"), InputError);
    CHECK_THROWS_AS(Date::parse("2021-02-30"), InputError);
    CHECK_THROWS_AS(Date::parse("2021-13-01"), InputError);
}
