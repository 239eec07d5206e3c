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

#pragma once

#include "hemiscan/errors.hpp"
#include "hemiscan/geometry.hpp"
#include "hemiscan/planner.hpp"
#include "hemiscan/powermap.hpp"
#include "hemiscan/timestamp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace hemiscan
{
    // Time source for the acquisition loop. Scans never read the ambient
    // clock directly so dwell logic runs on simulated time in tests.
    class Clock
    {
    public:
        virtual ~Clock() = default;
        virtual Timestamp now() const = 0;
        virtual void wait(std::chrono::microseconds d) = 0;
    };

    // Simulated time: wait() advances instantly.
    class ManualClock final : public Clock
    {
    public:
        explicit ManualClock(Timestamp start = {}) : now_(start) {}

        Timestamp now() const override { return now_; }
        void wait(std::chrono::microseconds d) override { now_ += d; }

    private:
        Timestamp now_;
    };

    class SystemClock final : public Clock
    {
    public:
        Timestamp now() const override
        {
            return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
        }
        void wait(std::chrono::microseconds d) override { std::this_thread::sleep_for(d); }
    };

    struct AcquisitionConfig
    {
        double dwell_s = 1.5;
        int settle_checks = 0;             // extra reads that must agree within settle_tolerance_db
        double settle_tolerance_db = 0.5;
        int retries_per_point = 2;
        double frequency_hz = 60.5e9;
    };

    struct AcquisitionBounds
    {
        double dwell_min_s = 0.0, dwell_max_s = 10.0;
        double frequency_min_hz = 58e9, frequency_max_hz = 63e9;
    };

    inline std::vector<std::string> check(const AcquisitionConfig &c, const AcquisitionBounds &b = {})
    {
        std::vector<std::string> problems;
        if (!(c.dwell_s >= b.dwell_min_s && c.dwell_s <= b.dwell_max_s))
            problems.push_back("dwell_s outside bounds");
        if (!(c.frequency_hz >= b.frequency_min_hz && c.frequency_hz <= b.frequency_max_hz))
            problems.push_back("frequency_hz outside bounds");
        if (c.settle_checks < 0)
            problems.push_back("settle_checks must be >= 0");
        if (c.retries_per_point < 0)
            problems.push_back("retries_per_point must be >= 0");
        if (!(c.settle_tolerance_db >= 0.0))
            problems.push_back("settle_tolerance_db must be >= 0");
        return problems;
    }

    struct ArrivalReport
    {
        Pose achieved;
        bool moved = true;
    };

    // Positioning system. move_to may throw PositionerFault.
    class PositionerPort
    {
    public:
        virtual ~PositionerPort() = default;
        virtual ArrivalReport move_to(const Pose &commanded) = 0;
        virtual void home() = 0;
        // Declared bound on |achieved - commanded| translation, metres.
        virtual double repeatability_m() const = 0;
    };

    // Received-power meter. read_power may throw SensorFault; non-finite
    // readings are treated as faults.
    class PowerSensorPort
    {
    public:
        virtual ~PowerSensorPort() = default;
        virtual double read_power(double frequency_hz) = 0;
    };

    enum class ScanState
    {
        Idle,
        Moving,
        Dwelling,
        Reading,
        Recording,
        Retrying,
        PointFailed,
        Done,
        Aborted
    };

    inline const char *to_string(ScanState s)
    {
        switch (s)
        {
        case ScanState::Idle: return "Idle";
        case ScanState::Moving: return "Moving";
        case ScanState::Dwelling: return "Dwelling";
        case ScanState::Reading: return "Reading";
        case ScanState::Recording: return "Recording";
        case ScanState::Retrying: return "Retrying";
        case ScanState::PointFailed: return "PointFailed";
        case ScanState::Done: return "Done";
        case ScanState::Aborted: return "Aborted";
        }
        return "?";
    }

    inline std::optional<ScanState> parse_scan_state(std::string_view s)
    {
        for (auto st : {ScanState::Idle, ScanState::Moving, ScanState::Dwelling, ScanState::Reading,
                        ScanState::Recording, ScanState::Retrying, ScanState::PointFailed, ScanState::Done,
                        ScanState::Aborted})
            if (s == to_string(st))
                return st;
        return std::nullopt;
    }

    // index is the position in ScanPlan::entries; empty for scan-level events.
    struct ScanEvent
    {
        Timestamp time{};
        ScanState state = ScanState::Idle;
        std::optional<std::size_t> index;
        std::string detail;

        friend bool operator==(const ScanEvent &, const ScanEvent &) = default;
    };

    using EventObserver = std::function<void(const ScanEvent &)>;

    struct ScanResult
    {
        PowerMap map;
        std::vector<ScanEvent> events;
        std::size_t failed = 0;
    };

    namespace detail
    {
        inline std::string num(double v)
        {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        }
    }

    // Quasi-static acquisition: move, dwell, read, record, for every plan
    // entry in order. A reading is retried up to retries_per_point times on a
    // sensor fault or an unsettled reading (the latter dwells again first).
    // Exhausted retries mark the point failed and the scan continues. A
    // positioner that still faults after the retries aborts the scan.
    //
    // Records come out in grid order: plan entries (in plan order) and the
    // plan's skipped samples as gap records.
    inline ScanResult run_scan(const ScanPlan &plan, const AcquisitionConfig &cfg, PositionerPort &positioner,
                               PowerSensorPort &sensor, Clock &clock, MapMetadata metadata = {},
                               const EventObserver &observer = {})
    {
        if (plan.entries.empty())
            throw EmptyPlan("cannot scan an empty plan");

        ScanResult res;
        auto emit = [&](ScanState st, std::optional<std::size_t> idx, std::string detail = {}) {
            res.events.push_back({clock.now(), st, idx, std::move(detail)});
            if (observer)
                observer(res.events.back());
        };

        metadata.frequency_hz = cfg.frequency_hz;
        metadata.created_at = clock.now();
        res.map.metadata = std::move(metadata);

        std::vector<std::optional<PowerRecord>> slots(plan.grid_size());
        for (const auto &s : plan.skipped)
            slots.at(s.index) = PowerRecord{s.sample.phi_deg, s.sample.theta_deg, s.sample.r_m, std::nullopt,
                                            RecordStatus::skipped, clock.now()};

        const auto dwell = seconds_to_us(cfg.dwell_s);
        const int retries = std::max(0, cfg.retries_per_point);
        const std::size_t reads = 1 + static_cast<std::size_t>(std::max(0, cfg.settle_checks));

        emit(ScanState::Idle, std::nullopt, "entries=" + std::to_string(plan.entries.size()));
        positioner.home();

        for (std::size_t i = 0; i < plan.entries.size(); ++i)
        {
            const auto &entry = plan.entries[i];
            emit(ScanState::Moving, i,
                 "grid=" + std::to_string(entry.index) + " phi=" + detail::num(entry.sample.phi_deg) +
                     " theta=" + detail::num(entry.sample.theta_deg));
            for (int attempt = 0;; ++attempt)
            {
                try
                {
                    positioner.move_to(entry.commanded);
                    break;
                }
                catch (const PositionerFault &e)
                {
                    if (attempt >= retries)
                    {
                        emit(ScanState::Aborted, i, e.what());
                        throw Aborted(i, std::string("positioner fault: ") + e.what());
                    }
                    emit(ScanState::Retrying, i, std::string("positioner: ") + e.what());
                }
            }

            PowerRecord rec{entry.sample.phi_deg, entry.sample.theta_deg, entry.sample.r_m, std::nullopt,
                            RecordStatus::failed, {}};
            bool need_dwell = true;
            for (int attempt = 0;; ++attempt)
            {
                if (need_dwell)
                {
                    emit(ScanState::Dwelling, i, "dwell_s=" + detail::num(cfg.dwell_s));
                    clock.wait(dwell);
                    need_dwell = false;
                }
                emit(ScanState::Reading, i);
                std::string fault;
                double value = 0.0;
                try
                {
                    double lo = 0.0, hi = 0.0;
                    for (std::size_t k = 0; k < reads; ++k)
                    {
                        value = sensor.read_power(cfg.frequency_hz);
                        if (!std::isfinite(value))
                            throw SensorFault("non-finite reading");
                        lo = k == 0 ? value : std::min(lo, value);
                        hi = k == 0 ? value : std::max(hi, value);
                    }
                    if (hi - lo > cfg.settle_tolerance_db)
                    {
                        fault = "unsettled: spread " + detail::num(hi - lo) + " dB";
                        need_dwell = true;
                    }
                }
                catch (const SensorFault &e)
                {
                    fault = std::string("sensor: ") + e.what();
                }

                if (fault.empty())
                {
                    rec.power_dbm = value;
                    rec.status = RecordStatus::ok;
                    rec.timestamp = clock.now();
                    emit(ScanState::Recording, i, "power_dbm=" + detail::num(value));
                    break;
                }
                if (attempt >= retries)
                {
                    rec.timestamp = clock.now();
                    ++res.failed;
                    emit(ScanState::PointFailed, i, fault);
                    break;
                }
                emit(ScanState::Retrying, i, fault);
            }
            slots.at(entry.index) = rec;
        }
        emit(ScanState::Done, std::nullopt,
             "ok=" + std::to_string(plan.entries.size() - res.failed) + " failed=" + std::to_string(res.failed));

        res.map.records.reserve(slots.size());
        for (auto &s : slots)
            if (s)
                res.map.records.push_back(*s);
        return res;
    }

    struct ScanSummary
    {
        std::size_t points_ok = 0;
        std::size_t points_failed = 0;
        double total_dwell_s = 0.0;

        friend bool operator==(const ScanSummary &, const ScanSummary &) = default;
    };

    // Aggregates an event log. The log must open with Idle (carrying the
    // entry count) and close with Done; every entry must end in exactly one
    // Recording or PointFailed.
    inline ScanSummary replay_events(const std::vector<ScanEvent> &log)
    {
        if (log.empty())
            throw MalformedLog("empty event log");
        if (log.front().state != ScanState::Idle || log.front().detail.rfind("entries=", 0) != 0)
            throw MalformedLog("log does not start with an Idle event");
        if (log.back().state != ScanState::Done)
            throw MalformedLog("log does not end with Done");

        std::size_t entries = 0;
        try
        {
            entries = std::stoul(log.front().detail.substr(8));
        }
        catch (const std::exception &)
        {
            throw MalformedLog("bad entry count in Idle event");
        }

        ScanSummary sum;
        std::vector<int> outcome(entries, 0);
        for (std::size_t k = 1; k + 1 < log.size(); ++k)
        {
            const auto &e = log[k];
            if (e.state == ScanState::Idle || e.state == ScanState::Done || e.state == ScanState::Aborted)
                throw MalformedLog("unexpected " + std::string(to_string(e.state)) + " inside log");
            if (!e.index || *e.index >= entries)
                throw MalformedLog("event " + std::to_string(k) + " has a missing or out-of-range index");
            switch (e.state)
            {
            case ScanState::Recording:
            case ScanState::PointFailed:
                if (outcome[*e.index]++)
                    throw MalformedLog("entry " + std::to_string(*e.index) + " finished twice");
                (e.state == ScanState::Recording ? sum.points_ok : sum.points_failed) += 1;
                break;
            case ScanState::Dwelling:
                if (e.detail.rfind("dwell_s=", 0) != 0)
                    throw MalformedLog("Dwelling event without dwell_s");
                try
                {
                    sum.total_dwell_s += std::stod(e.detail.substr(8));
                }
                catch (const std::exception &)
                {
                    throw MalformedLog("bad dwell_s value");
                }
                break;
            default:
                break;
            }
        }
        if (sum.points_ok + sum.points_failed != entries)
            throw MalformedLog("log covers " + std::to_string(sum.points_ok + sum.points_failed) + " of " +
                               std::to_string(entries) + " entries");
        return sum;
    }

    // Event log file: a header line then one JSON object per event.
    inline std::string serialize_events(const std::vector<ScanEvent> &log)
    {
        std::string out = nlohmann::json{{"format_version", 1}, {"kind", "hemiscan-events"}}.dump() + "\n";
        for (const auto &e : log)
        {
            nlohmann::json j{{"time", format_iso8601(e.time)}, {"state", to_string(e.state)}};
            j["index"] = e.index ? nlohmann::json(*e.index) : nlohmann::json(nullptr);
            j["detail"] = e.detail;
            out += j.dump() + "\n";
        }
        return out;
    }

    inline std::vector<ScanEvent> parse_events(const std::string &text)
    {
        std::istringstream in(text);
        std::string line;
        std::vector<ScanEvent> log;
        std::size_t lineno = 0;
        bool header = false;
        while (std::getline(in, line))
        {
            ++lineno;
            if (line.empty())
                continue;
            const auto where = " (line " + std::to_string(lineno) + ")";
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse(line);
            }
            catch (const nlohmann::json::exception &)
            {
                throw MalformedLog("invalid JSON" + where);
            }
            if (!header)
            {
                if (!j.is_object() || j.value("format_version", 0) != 1 || j.value("kind", "") != "hemiscan-events")
                    throw MalformedLog("missing event log header" + where);
                header = true;
                continue;
            }
            try
            {
                ScanEvent e;
                const auto t = parse_iso8601(j.at("time").get<std::string>());
                const auto st = parse_scan_state(j.at("state").get<std::string>());
                if (!t || !st)
                    throw MalformedLog("bad time or state" + where);
                e.time = *t;
                e.state = *st;
                if (!j.at("index").is_null())
                    e.index = j.at("index").get<std::size_t>();
                e.detail = j.at("detail").get<std::string>();
                log.push_back(std::move(e));
            }
            catch (const nlohmann::json::exception &)
            {
                throw MalformedLog("missing or mistyped field" + where);
            }
        }
        if (!header)
            throw MalformedLog("empty event log");
        return log;
    }
}
