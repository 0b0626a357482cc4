#include <doctest.h>

#include <algorithm>
#include <vector>

#include "surro/event_calendar.hpp"
#include "surro/rng.hpp"

using namespace surro;

TEST_CASE("events pop in time order") {
    EventCalendar cal;
    cal.schedule(3.0, EventKind::Arrival, 0);
    cal.schedule(1.0, EventKind::Arrival, 1);
    cal.schedule(2.0, EventKind::Arrival, 2);
    CHECK(cal.pop_next()->payload == 1);
    CHECK(cal.pop_next()->payload == 2);
    CHECK(cal.pop_next()->payload == 0);
    CHECK(!cal.pop_next().has_value());
}

TEST_CASE("equal times break ties by insertion order") {
    EventCalendar cal;
    cal.schedule(5.0, EventKind::Arrival, 10);
    cal.schedule(5.0, EventKind::Arrival, 11);
    cal.schedule(5.0, EventKind::Arrival, 12);
    CHECK(cal.pop_next()->payload == 10);
    CHECK(cal.pop_next()->payload == 11);
    CHECK(cal.pop_next()->payload == 12);
}

TEST_CASE("scheduling at the current clock pops before later events") {
    EventCalendar cal;
    cal.schedule(2.0, EventKind::Arrival, 0);
    cal.pop_next();
    CHECK(cal.clock() == 2.0);
    cal.schedule(4.0, EventKind::Arrival, 1);
    cal.schedule(2.0, EventKind::Arrival, 2);  // at the clock
    CHECK(cal.pop_next()->payload == 2);
}

TEST_CASE("scheduling in the past is a causality error") {
    EventCalendar cal;
    cal.schedule(5.0, EventKind::Arrival, 0);
    cal.pop_next();
    CHECK_THROWS_AS(cal.schedule(4.0, EventKind::Arrival, 1), std::invalid_argument);
}

TEST_CASE("empty calendar leaves the clock unchanged") {
    EventCalendar cal;
    CHECK(!cal.pop_next().has_value());
    CHECK(cal.clock() == 0.0);
}

TEST_CASE("cancel voids matching events lazily") {
    EventCalendar cal;
    cal.schedule(1.0, EventKind::Abandonment, 7);
    CHECK(cal.cancel([](const Event& e) { return e.payload == 7; }) == 1);
    CHECK(!cal.pop_next().has_value());

    cal.schedule(2.0, EventKind::Abandonment, 8);
    cal.schedule(3.0, EventKind::Arrival, 9);
    CHECK(cal.cancel([](const Event& e) { return e.kind == EventKind::Abandonment; }) == 1);
    CHECK(cal.pop_next()->payload == 9);

    cal.schedule(9.0, EventKind::Arrival, 1);
    CHECK(cal.cancel([](const Event&) { return false; }) == 0);
    CHECK(cal.pending() == 1);
}

TEST_CASE("random events pop in sorted (time, seq) order") {
    RngStream stream(17, 0);
    EventCalendar cal;
    std::vector<std::pair<double, std::uint64_t>> keys;
    for (int i = 0; i < 10000; ++i) {
        // coarse times force plenty of ties
        const double t = std::floor(stream.uniform() * 100.0);
        cal.schedule(t, EventKind::Arrival, i);
    }
    std::vector<std::pair<double, std::uint64_t>> popped;
    while (auto ev = cal.pop_next()) popped.push_back({ev->time, ev->seq});
    CHECK(popped.size() == 10000);
    CHECK(std::is_sorted(popped.begin(), popped.end()));
}

TEST_CASE("count conservation: scheduled = popped + cancelled + remaining") {
    RngStream stream(19, 0);
    EventCalendar cal;
    std::size_t scheduled = 0, popped = 0, cancelled = 0;
    for (int round = 0; round < 200; ++round) {
        const int burst = 1 + static_cast<int>(stream.uniform_int(5));
        for (int i = 0; i < burst; ++i) {
            cal.schedule(cal.clock() + stream.uniform() * 10.0, EventKind::Arrival,
                         static_cast<int>(stream.uniform_int(100)));
            ++scheduled;
        }
        if (stream.uniform() < 0.3) {
            const int target = static_cast<int>(stream.uniform_int(100));
            cancelled += cal.cancel(
                [target](const Event& e) { return e.payload == target; });
        }
        if (cal.pop_next()) ++popped;
    }
    CHECK(scheduled == popped + cancelled + cal.pending());
}
