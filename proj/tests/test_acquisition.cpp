// SPDX-License-Identifier: Apache-2.0
//
// hemiscan - hemispherical received-power mapping toolkit
// Copyright (C) 2026 The hemiscan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "test_support.hpp"

#include <deque>

using namespace hemiscan;

namespace
{
    struct MockPositioner : PositionerPort
    {
        Clock *clock = nullptr;
        int faults_left = 0;
        int moves = 0;
        Timestamp last_arrival{};

        ArrivalReport move_to(const Pose &p) override
        {
            if (faults_left > 0)
            {
                --faults_left;
                throw PositionerFault("joint limit");
            }
            ++moves;
            if (clock)
                last_arrival = clock->now();
            return {p, true};
        }
        void home() override {}
        double repeatability_m() const override { return 1e-4; }
    };

    struct MockSensor : PowerSensorPort
    {
        std::deque<double> script; // NaN entries fault
        double fallback = -40.0;
        int reads = 0;
        std::function<void()> on_read;

        double read_power(double) override
        {
            ++reads;
            if (on_read)
                on_read();
            if (script.empty())
                return fallback;
            const double v = script.front();
            script.pop_front();
            if (std::isnan(v))
                throw SensorFault("overload");
            return v;
        }
    };

    ScanPlan one_entry_plan() { return plan_scan(generate_grid({0, 0, 10, 10, 0.08}), {}, {}, {}); }

    std::size_t count(const std::vector<ScanEvent> &ev, ScanState s)
    {
        return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](const ScanEvent &e) { return e.state == s; }));
    }
}

TEST_CASE("ideal simulated scan of the bench grid", "[acquisition]")
{
    const GridSpec g{0, 70, 10, 10, 0.08};
    const auto res = test::sim_scan(SimScene{}, g);
    CHECK(res.map.records.size() == 253);
    CHECK(res.failed == 0);
    CHECK(res.map.ok_count() == 253);
    const auto sum = replay_events(res.events);
    CHECK(sum == ScanSummary{253, 0, 253 * 1.5});

    // records follow plan order
    const auto grid = generate_grid(g);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        CHECK(res.map.records[i].phi_deg == grid[i].phi_deg);
        CHECK(res.map.records[i].theta_deg == grid[i].theta_deg);
    }
}

TEST_CASE("state sequence for a single point", "[acquisition]")
{
    MockPositioner pos;
    MockSensor sen;
    ManualClock clock;
    const auto res = run_scan(one_entry_plan(), {}, pos, sen, clock);
    std::vector<ScanState> states;
    for (const auto &e : res.events)
        states.push_back(e.state);
    CHECK(states == std::vector<ScanState>{ScanState::Idle, ScanState::Moving, ScanState::Dwelling, ScanState::Reading,
                                           ScanState::Recording, ScanState::Done});
}

TEST_CASE("sensor faults are retried", "[acquisition]")
{
    MockPositioner pos;
    MockSensor sen;
    sen.script = {NAN, NAN, -33.0};
    ManualClock clock;
    AcquisitionConfig cfg;
    cfg.retries_per_point = 2;
    const auto res = run_scan(one_entry_plan(), cfg, pos, sen, clock);
    REQUIRE(res.map.records.size() == 1);
    CHECK(res.map.records[0].ok());
    CHECK(*res.map.records[0].power_dbm == -33.0);
    CHECK(count(res.events, ScanState::Retrying) == 2);
    CHECK(res.failed == 0);
}

TEST_CASE("exhausted retries mark the point failed and the scan continues", "[acquisition]")
{
    MockPositioner pos;
    MockSensor sen;
    sen.script = {-30.0, NAN, NAN}; // first entry ok, second fails twice
    ManualClock clock;
    AcquisitionConfig cfg;
    cfg.retries_per_point = 1;
    const auto plan = plan_scan(generate_grid({0, 10, 10, 120, 0.08}), {}, {}, {});
    const auto res = run_scan(plan, cfg, pos, sen, clock);
    REQUIRE(res.map.records.size() == 4);
    CHECK(res.map.records[0].ok());
    CHECK(res.map.records[1].status == RecordStatus::failed);
    CHECK_FALSE(res.map.records[1].power_dbm);
    CHECK(res.map.records[2].ok());
    CHECK(res.failed == 1);
    const auto sum = replay_events(res.events);
    CHECK(sum.points_ok == 3);
    CHECK(sum.points_failed == 1);
}

TEST_CASE("dwell accounting on the injected clock", "[acquisition]")
{
    MockPositioner pos;
    MockSensor sen;
    const Timestamp t0 = *parse_iso8601("2026-03-01T10:00:00Z");
    ManualClock clock(t0);
    pos.clock = &clock;
    sen.on_read = [&] { CHECK(clock.now() - pos.last_arrival >= std::chrono::microseconds(1'500'000)); };
    AcquisitionConfig cfg;
    cfg.dwell_s = 1.5;
    const auto plan = plan_scan(generate_grid({0, 30, 10, 30, 0.08}), {}, {}, {});
    const auto res = run_scan(plan, cfg, pos, sen, clock);
    CHECK(clock.now() - t0 == std::chrono::microseconds(1'500'000) * static_cast<long>(plan.entries.size()));
    CHECK(replay_events(res.events).total_dwell_s == 1.5 * static_cast<double>(plan.entries.size()));
    CHECK(sen.reads == static_cast<int>(plan.entries.size()));
}

TEST_CASE("settle checks", "[acquisition]")
{
    MockPositioner pos;
    ManualClock clock;
    AcquisitionConfig cfg;
    cfg.settle_checks = 2;
    cfg.settle_tolerance_db = 0.2;
    cfg.retries_per_point = 1;

    SECTION("agreeing reads record the last one")
    {
        MockSensor sen;
        sen.script = {-40.0, -40.1, -40.05};
        const auto res = run_scan(one_entry_plan(), cfg, pos, sen, clock);
        CHECK(*res.map.records[0].power_dbm == -40.05);
        CHECK(sen.reads == 3);
    }
    SECTION("unsettled reads dwell again and eventually fail")
    {
        MockSensor sen;
        sen.script = {-40.0, -41.0, -40.0, -40.0, -42.0, -40.0};
        const auto res = run_scan(one_entry_plan(), cfg, pos, sen, clock);
        CHECK(res.map.records[0].status == RecordStatus::failed);
        CHECK(count(res.events, ScanState::Dwelling) == 2);
        CHECK(count(res.events, ScanState::PointFailed) == 1);
    }
}

TEST_CASE("positioner faults", "[acquisition]")
{
    MockSensor sen;
    ManualClock clock;
    AcquisitionConfig cfg;
    cfg.retries_per_point = 2;
    SECTION("transient fault recovers")
    {
        MockPositioner pos;
        pos.faults_left = 2;
        const auto res = run_scan(one_entry_plan(), cfg, pos, sen, clock);
        CHECK(res.map.records[0].ok());
    }
    SECTION("persistent fault aborts")
    {
        MockPositioner pos;
        pos.faults_left = 3;
        std::vector<ScanEvent> seen;
        CHECK_THROWS_AS(run_scan(one_entry_plan(), cfg, pos, sen, clock, {}, [&](const ScanEvent &e) { seen.push_back(e); }),
                        Aborted);
        REQUIRE_FALSE(seen.empty());
        CHECK(seen.back().state == ScanState::Aborted);
        CHECK_THROWS_AS(replay_events(seen), MalformedLog);
    }
}

TEST_CASE("skipped samples become gap records in grid order", "[acquisition]")
{
    WorkspaceGeometry ws;
    ws.table_plane_z = 0.0;
    const auto plan = plan_scan(generate_grid({0, 90, 30, 90, 0.05}), {}, {}, ws);
    REQUIRE(plan.skipped.size() == 4);
    MockPositioner pos;
    MockSensor sen;
    ManualClock clock;
    const auto res = run_scan(plan, {}, pos, sen, clock);
    REQUIRE(res.map.records.size() == plan.grid_size());
    for (std::size_t i = 0; i < res.map.records.size(); ++i)
    {
        const auto &r = res.map.records[i];
        CHECK((r.status == RecordStatus::skipped) == (r.theta_deg == 90.0));
    }
    CHECK(replay_events(res.events).points_ok == plan.entries.size());
}

TEST_CASE("observer sees the same stream", "[acquisition]")
{
    std::vector<ScanEvent> seen;
    MockPositioner pos;
    MockSensor sen;
    ManualClock clock;
    const auto res = run_scan(one_entry_plan(), {}, pos, sen, clock, {}, [&](const ScanEvent &e) { seen.push_back(e); });
    CHECK(seen == res.events);
}

TEST_CASE("replay_events rejects malformed logs", "[acquisition]")
{
    CHECK_THROWS_AS(replay_events({}), MalformedLog);

    MockPositioner pos;
    MockSensor sen;
    ManualClock clock;
    const auto good = run_scan(one_entry_plan(), {}, pos, sen, clock).events;

    auto no_done = good;
    no_done.pop_back();
    CHECK_THROWS_AS(replay_events(no_done), MalformedLog);

    auto twice = good;
    twice.insert(twice.end() - 1, twice[4]); // second Recording for entry 0
    CHECK_THROWS_AS(replay_events(twice), MalformedLog);

    auto missing = good;
    missing.erase(missing.begin() + 4); // drop the Recording
    CHECK_THROWS_AS(replay_events(missing), MalformedLog);
}

TEST_CASE("event log serialisation", "[acquisition]")
{
    SimScene s;
    s.noise_sigma_db = 0.1;
    const auto res = test::sim_scan(s, {0, 20, 10, 90, 0.08});
    const auto text = serialize_events(res.events);
    const auto back = parse_events(text);
    CHECK(back == res.events);
    CHECK(replay_events(back) == replay_events(res.events));
    CHECK_THROWS_AS(parse_events(""), MalformedLog);
    CHECK_THROWS_AS(parse_events("{\"format_version\":1,\"kind\":\"hemiscan-events\"}\nnot json\n"), MalformedLog);
}

TEST_CASE("acquisition config bounds", "[acquisition]")
{
    AcquisitionConfig c;
    CHECK(check(c).empty());
    c.frequency_hz = 24e9;
    c.dwell_s = 11;
    CHECK(check(c).size() == 2);
}
