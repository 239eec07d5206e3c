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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <optional>
#include <string>
#include <string_view>

namespace hemiscan
{
    using Timestamp = std::chrono::time_point<std::chrono::system_clock, std::chrono::microseconds>;

    // UTC, microsecond resolution: 2025-01-01T00:00:01.500000Z
    inline std::string format_iso8601(Timestamp t)
    {
        using namespace std::chrono;
        const auto us = t.time_since_epoch().count();
        std::int64_t secs = us / 1000000;
        std::int64_t frac = us % 1000000;
        if (frac < 0)
        {
            frac += 1000000;
            --secs;
        }
        const std::time_t tt = static_cast<std::time_t>(secs);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                      tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(frac));
        return buf;
    }

    // Accepts YYYY-MM-DDTHH:MM:SS[.ffffff]Z (1 to 6 fraction digits).
    inline std::optional<Timestamp> parse_iso8601(std::string_view s)
    {
        int y, mo, d, h, mi, sec, consumed = 0;
        const std::string str(s);
        if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6 ||
            consumed != 19)
            return std::nullopt;
        std::size_t pos = 19;
        std::int64_t frac = 0;
        if (pos < str.size() && str[pos] == '.')
        {
            ++pos;
            int digits = 0;
            while (pos < str.size() && str[pos] >= '0' && str[pos] <= '9' && digits < 6)
            {
                frac = frac * 10 + (str[pos] - '0');
                ++pos;
                ++digits;
            }
            if (digits == 0)
                return std::nullopt;
            for (; digits < 6; ++digits)
                frac *= 10;
        }
        if (pos + 1 != str.size() || str[pos] != 'Z')
            return std::nullopt;
        if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
            return std::nullopt;
        std::tm tm{};
        tm.tm_year = y - 1900;
        tm.tm_mon = mo - 1;
        tm.tm_mday = d;
        tm.tm_hour = h;
        tm.tm_min = mi;
        tm.tm_sec = sec;
        const std::time_t tt = timegm(&tm);
        return Timestamp(std::chrono::microseconds(static_cast<std::int64_t>(tt) * 1000000 + frac));
    }

    inline std::chrono::microseconds seconds_to_us(double s)
    {
        return std::chrono::microseconds(static_cast<std::int64_t>(std::llround(s * 1e6)));
    }
}
