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

#include "hemiscan/persistence.hpp"
#include "hemiscan/powermap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

namespace hemiscan
{
    // Two comment lines, a column header, then one row per cut point. Gaps
    // leave power_db empty.
    inline std::string cut_to_csv(const PlaneCut &cut)
    {
        std::string out = "# format_version: " + std::to_string(format_version) + "\n";
        out += "# phi_plane_deg: " + format_double(cut.phi_plane_deg) + "\n";
        out += "theta_signed_deg,power_db\n";
        for (const auto &p : cut.points)
            out += format_double(p.theta_signed_deg) + "," + (p.power_db ? format_double(*p.power_db) : "") + "\n";
        return out;
    }

    struct CutSeries
    {
        std::string label;
        PlaneCut cut;
    };

    struct PolarStyle
    {
        double floor_db = -40.0; // plotted at the centre
        double ring_step_db = 10.0;
        int size_px = 480;
    };

    namespace detail
    {
        inline std::string fx(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", v);
            return buf;
        }

        inline std::string xml_escape(const std::string &s)
        {
            std::string o;
            for (char c : s)
            {
                switch (c)
                {
                case '&': o += "&amp;"; break;
                case '<': o += "&lt;"; break;
                case '>': o += "&gt;"; break;
                case '"': o += "&quot;"; break;
                default: o += c;
                }
            }
            return o;
        }
    }

    // Polar elevation plot: signed theta runs clockwise from boresight at the
    // top, radius is dB between floor_db (centre) and 0 dB (outer ring).
    // Coordinates are printed with fixed precision so output diffs cleanly.
    inline std::string cut_to_svg(const std::vector<CutSeries> &series, const PolarStyle &style = {})
    {
        static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
        const double size = style.size_px;
        const double cx = size / 2.0, cy = size / 2.0 + 10.0, radius = size / 2.0 - 50.0;
        auto to_xy = [&](double theta_deg, double db) {
            const double t = (std::clamp(db, style.floor_db, 0.0) - style.floor_db) / -style.floor_db;
            const double a = theta_deg * std::numbers::pi / 180.0;
            return std::pair{cx + radius * t * std::sin(a), cy - radius * t * std::cos(a)};
        };

        const std::string sz = std::to_string(style.size_px);
        std::string o;
        o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + sz + "\" height=\"" + std::to_string(style.size_px + 20) +
             "\" data-format-version=\"" + std::to_string(format_version) + "\">\n";
        o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (!series.empty())
            o += "<text x=\"" + detail::fx(cx) + "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">phi = " +
                 format_double(series.front().cut.phi_plane_deg) + " deg cut</text>\n";

        o += "<g stroke=\"#bbbbbb\" fill=\"none\" stroke-width=\"0.8\">\n";
        for (double db = 0.0; db > style.floor_db - 1e-9; db -= style.ring_step_db)
        {
            const double r = radius * (db - style.floor_db) / -style.floor_db;
            o += "<circle cx=\"" + detail::fx(cx) + "\" cy=\"" + detail::fx(cy) + "\" r=\"" + detail::fx(r) + "\"/>\n";
        }
        for (int a = -180; a < 180; a += 30)
        {
            const auto [x, y] = to_xy(a, 0.0);
            o += "<line x1=\"" + detail::fx(cx) + "\" y1=\"" + detail::fx(cy) + "\" x2=\"" + detail::fx(x) + "\" y2=\"" +
                 detail::fx(y) + "\"/>\n";
        }
        o += "</g>\n<g font-size=\"10\" fill=\"#555555\" text-anchor=\"middle\">\n";
        for (int a = -150; a <= 180; a += 30)
        {
            const double r = radius + 14.0, rad = a * std::numbers::pi / 180.0;
            o += "<text x=\"" + detail::fx(cx + r * std::sin(rad)) + "\" y=\"" + detail::fx(cy - r * std::cos(rad) + 4.0) +
                 "\">" + std::to_string(a) + "</text>\n";
        }
        for (double db = 0.0; db > style.floor_db - 1e-9; db -= style.ring_step_db)
        {
            const auto [x, y] = to_xy(0.0, db);
            o += "<text x=\"" + detail::fx(x + 12.0) + "\" y=\"" + detail::fx(y + 10.0) + "\">" + format_double(db) +
                 " dB</text>\n";
        }
        o += "</g>\n";

        for (std::size_t s = 0; s < series.size(); ++s)
        {
            const char *color = colors[s % std::size(colors)];
            std::vector<std::string> runs(1);
            for (const auto &p : series[s].cut.points)
            {
                if (!p.power_db)
                {
                    if (!runs.back().empty())
                        runs.emplace_back();
                    continue;
                }
                const auto [x, y] = to_xy(p.theta_signed_deg, *p.power_db);
                runs.back() += (runs.back().empty() ? "" : " ") + detail::fx(x) + "," + detail::fx(y);
            }
            for (const auto &r : runs)
                if (!r.empty())
                    o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.6\" points=\"" + r +
                         "\"/>\n";
            const double ly = size - 10.0 + 14.0 * static_cast<double>(s) - 14.0 * static_cast<double>(series.size() - 1);
            o += "<text x=\"12\" y=\"" + detail::fx(ly) + "\" font-size=\"11\" fill=\"" + color + "\">" +
                 detail::xml_escape(series[s].label) + "</text>\n";
        }
        o += "</svg>\n";
        return o;
    }
}
