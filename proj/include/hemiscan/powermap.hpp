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
#include "hemiscan/timestamp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hemiscan
{
    enum class RecordStatus
    {
        ok,
        failed,
        skipped
    };

    inline const char *to_string(RecordStatus s)
    {
        switch (s)
        {
        case RecordStatus::ok: return "ok";
        case RecordStatus::failed: return "failed";
        case RecordStatus::skipped: return "skipped";
        }
        return "?";
    }

    inline std::optional<RecordStatus> parse_status(std::string_view s)
    {
        if (s == "ok") return RecordStatus::ok;
        if (s == "failed") return RecordStatus::failed;
        if (s == "skipped") return RecordStatus::skipped;
        return std::nullopt;
    }

    // One sampled direction. power_dbm is empty for failed and skipped points.
    // After normalize() the power column holds dB relative to the map peak.
    struct PowerRecord
    {
        double phi_deg = 0.0;
        double theta_deg = 0.0;
        double r_m = 0.0;
        std::optional<double> power_dbm;
        RecordStatus status = RecordStatus::ok;
        Timestamp timestamp{};

        bool ok() const { return status == RecordStatus::ok && power_dbm.has_value(); }

        friend bool operator==(const PowerRecord &, const PowerRecord &) = default;
    };

    struct MapMetadata
    {
        double frequency_hz = 0.0;
        std::optional<GridSpec> grid;
        std::string source;  // backend descriptor
        std::string scan_id;
        Timestamp created_at{};
        std::optional<double> normalization_offset_db;
        std::vector<std::pair<std::string, std::string>> extra; // free-form, order preserved

        friend bool operator==(const MapMetadata &, const MapMetadata &) = default;
    };

    struct PowerMap
    {
        MapMetadata metadata;
        std::vector<PowerRecord> records;

        std::size_t ok_count() const
        {
            return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const PowerRecord &r) { return r.ok(); }));
        }

        friend bool operator==(const PowerMap &, const PowerMap &) = default;
    };

    // Signed-elevation slice. Positive theta comes from the phi_plane
    // half-plane, negative theta from phi_plane + 180.
    struct CutPoint
    {
        double theta_signed_deg = 0.0;
        std::optional<double> power_db;

        friend bool operator==(const CutPoint &, const CutPoint &) = default;
    };

    struct PlaneCut
    {
        double phi_plane_deg = 0.0;
        std::vector<CutPoint> points;

        friend bool operator==(const PlaneCut &, const PlaneCut &) = default;
    };

    enum class CutInterpolation
    {
        nearest,
        linear_in_theta
    };

    enum class RepeatabilityStatistic
    {
        per_point_std_mean,
        max_range
    };

    // Angular support key, quantised to 1e-6 deg. The pole has a single key.
    struct AngleKey
    {
        std::int64_t phi = 0;
        std::int64_t theta = 0;

        static AngleKey of(double phi_deg, double theta_deg)
        {
            const auto q = [](double v) { return static_cast<std::int64_t>(std::llround(v * 1e6)); };
            AngleKey k{q(detail::wrap_360(phi_deg)), q(theta_deg)};
            if (k.theta == 0 || k.phi == 360'000'000)
                k.phi = 0;
            return k;
        }

        auto operator<=>(const AngleKey &) const = default;
    };

    // Invariants: one ok record per direction, one radius for all ok records.
    inline void validate(const PowerMap &m)
    {
        std::map<AngleKey, std::size_t> seen;
        std::optional<double> radius;
        for (std::size_t i = 0; i < m.records.size(); ++i)
        {
            const auto &r = m.records[i];
            if (r.status == RecordStatus::ok && !r.power_dbm)
                throw InvalidMap("record " + std::to_string(i) + " is ok but has no power");
            if (!r.ok())
                continue;
            if (!seen.emplace(AngleKey::of(r.phi_deg, r.theta_deg), i).second)
                throw InvalidMap("duplicate ok record for direction at index " + std::to_string(i));
            if (!radius)
                radius = r.r_m;
            else if (std::abs(*radius - r.r_m) > 1e-12)
                throw InvalidMap("ok records do not share one radius");
        }
    }

    // Shift every ok record so the strongest becomes 0 dB. The applied
    // offsets accumulate in metadata.normalization_offset_db.
    inline PowerMap normalize(PowerMap m)
    {
        double peak = -std::numeric_limits<double>::infinity();
        for (const auto &r : m.records)
            if (r.ok())
                peak = std::max(peak, *r.power_dbm);
        if (!std::isfinite(peak))
            throw EmptyMap("map has no ok records to normalize");
        for (auto &r : m.records)
            if (r.ok())
                *r.power_dbm -= peak;
        m.metadata.normalization_offset_db = m.metadata.normalization_offset_db.value_or(0.0) + peak;
        return m;
    }

    inline PlaneCut normalize(PlaneCut c)
    {
        double peak = -std::numeric_limits<double>::infinity();
        for (const auto &p : c.points)
            if (p.power_db)
                peak = std::max(peak, *p.power_db);
        if (!std::isfinite(peak))
            throw EmptyMap("cut has no samples to normalize");
        for (auto &p : c.points)
            if (p.power_db)
                *p.power_db -= peak;
        return c;
    }

    namespace detail
    {
        inline double circular_distance_deg(double a, double b)
        {
            const double d = std::abs(wrap_360(a) - wrap_360(b));
            return std::min(d, 360.0 - d);
        }

        // Value of one theta ring at azimuth `target`.
        inline std::optional<double> ring_value(const std::vector<const PowerRecord *> &ring, double target,
                                                std::optional<double> phi_step, CutInterpolation mode, double theta)
        {
            constexpr double eps = 1e-9;
            if (ring.size() == 1 && ring.front()->theta_deg == 0.0)
                return ring.front()->ok() ? ring.front()->power_dbm : std::nullopt;

            if (mode == CutInterpolation::nearest)
            {
                double half = 180.0;
                if (phi_step)
                    half = *phi_step / 2.0;
                else
                    for (std::size_t i = 0; i < ring.size(); ++i)
                        for (std::size_t j = i + 1; j < ring.size(); ++j)
                        {
                            const double d = circular_distance_deg(ring[i]->phi_deg, ring[j]->phi_deg);
                            if (d > eps)
                                half = std::min(half, d / 2.0);
                        }
                const PowerRecord *pick = nullptr;
                for (const auto *r : ring)
                    if (circular_distance_deg(r->phi_deg, target) < half - eps && (!pick || r->ok()))
                        pick = r;
                if (!pick)
                    throw PlaneNotSampled("no sample within half a step of phi " + std::to_string(target) +
                                          " on theta ring " + std::to_string(theta));
                return pick->ok() ? pick->power_dbm : std::nullopt;
            }

            // Linear along azimuth between the bracketing samples.
            const PowerRecord *lo = nullptr, *hi = nullptr;
            double d_lo = 361.0, d_hi = 361.0;
            for (const auto *r : ring)
            {
                const double below = wrap_360(target - r->phi_deg); // r is `below` degrees behind target
                const double above = wrap_360(r->phi_deg - target);
                if (below < eps || above < eps)
                    return r->ok() ? r->power_dbm : std::nullopt;
                if (below < d_lo || (below == d_lo && r->ok()))
                    d_lo = below, lo = r;
                if (above < d_hi || (above == d_hi && r->ok()))
                    d_hi = above, hi = r;
            }
            if (!lo || !hi || !lo->ok() || !hi->ok())
                return std::nullopt;
            const double w = d_lo / (d_lo + d_hi);
            return (1.0 - w) * *lo->power_dbm + w * *hi->power_dbm;
        }

        // Fill interior gaps linearly in signed theta between ok neighbours.
        inline void fill_gaps(std::vector<CutPoint> &pts)
        {
            for (std::size_t i = 0; i < pts.size(); ++i)
            {
                if (pts[i].power_db)
                    continue;
                std::size_t a = i, b = i;
                while (a > 0 && !pts[a].power_db)
                    --a;
                while (b + 1 < pts.size() && !pts[b].power_db)
                    ++b;
                if (!pts[a].power_db || !pts[b].power_db)
                    continue;
                const double t = (pts[i].theta_signed_deg - pts[a].theta_signed_deg) /
                                 (pts[b].theta_signed_deg - pts[a].theta_signed_deg);
                pts[i].power_db = (1.0 - t) * *pts[a].power_db + t * *pts[b].power_db;
            }
        }
    }

    // Signed-theta cut through the map at azimuth `phi_plane_deg`.
    // nearest: take the sample on each ring within half an azimuth step, a
    //   gap if that sample is not ok. An equidistant tie is PlaneNotSampled.
    // linear_in_theta: interpolate along azimuth between bracketing samples,
    //   then bridge interior gaps linearly in theta.
    inline PlaneCut extract_cut(const PowerMap &m, double phi_plane_deg,
                                CutInterpolation mode = CutInterpolation::nearest)
    {
        std::map<std::int64_t, std::vector<const PowerRecord *>> rings;
        for (const auto &r : m.records)
            rings[AngleKey::of(r.phi_deg, r.theta_deg).theta].push_back(&r);
        if (rings.empty())
            throw EmptyMap("map has no records");

        std::optional<double> phi_step;
        if (m.metadata.grid)
            phi_step = m.metadata.grid->phi_step_deg;

        const double plane = detail::wrap_360(phi_plane_deg);
        const double anti = detail::wrap_360(plane + 180.0);
        PlaneCut cut;
        cut.phi_plane_deg = plane;
        std::vector<CutPoint> negative, positive;
        for (const auto &[key, ring] : rings)
        {
            const double theta = ring.front()->theta_deg;
            if (key == 0)
            {
                positive.push_back({0.0, detail::ring_value(ring, plane, phi_step, mode, theta)});
                continue;
            }
            positive.push_back({theta, detail::ring_value(ring, plane, phi_step, mode, theta)});
            negative.push_back({-theta, detail::ring_value(ring, anti, phi_step, mode, theta)});
        }
        cut.points.assign(negative.rbegin(), negative.rend());
        cut.points.insert(cut.points.end(), positive.begin(), positive.end());
        if (mode == CutInterpolation::linear_in_theta)
            detail::fill_gaps(cut.points);
        return cut;
    }

    struct MaeResult
    {
        double mae_db = 0.0;
        std::size_t common = 0; // points ok in both
        std::size_t dropped_a = 0; // non-ok or unmatched points of a
        std::size_t dropped_b = 0;
    };

    namespace detail
    {
        inline MaeResult mae_over(const std::map<AngleKey, double> &a, const std::map<AngleKey, double> &b,
                                  std::size_t total_a, std::size_t total_b)
        {
            MaeResult res;
            double sum = 0.0;
            for (const auto &[k, va] : a)
            {
                auto it = b.find(k);
                if (it == b.end())
                    continue;
                sum += std::abs(va - it->second);
                ++res.common;
            }
            if (res.common == 0)
                throw DisjointSupport("no direction is ok in both inputs");
            res.mae_db = sum / static_cast<double>(res.common);
            res.dropped_a = total_a - res.common;
            res.dropped_b = total_b - res.common;
            return res;
        }

        inline std::map<AngleKey, double> ok_values(const PowerMap &m)
        {
            std::map<AngleKey, double> out;
            for (const auto &r : m.records)
                if (r.ok())
                    out.emplace(AngleKey::of(r.phi_deg, r.theta_deg), *r.power_dbm);
            return out;
        }

        inline std::map<AngleKey, double> ok_values(const PlaneCut &c)
        {
            std::map<AngleKey, double> out;
            for (const auto &p : c.points)
                if (p.power_db)
                    out.emplace(AngleKey{0, std::llround(p.theta_signed_deg * 1e6)}, *p.power_db);
            return out;
        }
    }

    // Mean |a - b| in dB over directions that are ok in both inputs.
    inline MaeResult mae_detail(const PowerMap &a, const PowerMap &b)
    {
        return detail::mae_over(detail::ok_values(a), detail::ok_values(b), a.records.size(), b.records.size());
    }

    inline MaeResult mae_detail(const PlaneCut &a, const PlaneCut &b)
    {
        return detail::mae_over(detail::ok_values(a), detail::ok_values(b), a.points.size(), b.points.size());
    }

    inline double mae_db(const PowerMap &a, const PowerMap &b) { return mae_detail(a, b).mae_db; }
    inline double mae_db(const PlaneCut &a, const PlaneCut &b) { return mae_detail(a, b).mae_db; }

    // Spread of repeated scans, evaluated over the directions ok in every map.
    // per_point_std_mean uses the sample (n - 1) standard deviation.
    inline double repeatability_db(const std::vector<PowerMap> &maps, RepeatabilityStatistic stat)
    {
        if (maps.size() < 2)
            throw NeedAtLeastTwo("repeatability needs at least two maps");
        std::vector<std::map<AngleKey, double>> values;
        values.reserve(maps.size());
        for (const auto &m : maps)
            values.push_back(detail::ok_values(m));

        double acc = 0.0;
        std::size_t n_points = 0;
        const double n = static_cast<double>(maps.size());
        for (const auto &[key, first] : values.front())
        {
            std::vector<double> v{first};
            for (std::size_t i = 1; i < values.size(); ++i)
            {
                auto it = values[i].find(key);
                if (it == values[i].end())
                    break;
                v.push_back(it->second);
            }
            if (v.size() != maps.size())
                continue;
            ++n_points;
            if (stat == RepeatabilityStatistic::max_range)
            {
                const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
                acc = std::max(acc, *hi - *lo);
            }
            else
            {
                double mean = 0.0;
                for (double x : v)
                    mean += x;
                mean /= n;
                double ss = 0.0;
                for (double x : v)
                    ss += (x - mean) * (x - mean);
                acc += std::sqrt(ss / (n - 1.0));
            }
        }
        if (n_points == 0)
            throw DisjointSupport("no direction is ok in every map");
        return stat == RepeatabilityStatistic::max_range ? acc : acc / static_cast<double>(n_points);
    }

    // ok records / closed-form grid size.
    inline double coverage_fraction(const PowerMap &m)
    {
        if (!m.metadata.grid)
            throw MissingGridSpec("map metadata carries no grid spec");
        const auto n = grid_size(*m.metadata.grid);
        return static_cast<double>(m.ok_count()) / static_cast<double>(n);
    }
}
