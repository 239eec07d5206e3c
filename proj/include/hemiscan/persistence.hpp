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

#include "hemiscan/acquisition.hpp"
#include "hemiscan/errors.hpp"
#include "hemiscan/geometry.hpp"
#include "hemiscan/planner.hpp"
#include "hemiscan/powermap.hpp"
#include "hemiscan/simbackend.hpp"
#include "hemiscan/timestamp.hpp"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hemiscan
{
    constexpr int format_version = 1;

    // Shortest decimal that parses back to the same double.
    inline std::string format_double(double v)
    {
        if (std::isnan(v))
            return "nan";
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }

    inline std::optional<double> parse_double(std::string_view s)
    {
        if (!s.empty() && s.front() == '+')
            s.remove_prefix(1);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            return std::nullopt;
        return v;
    }

    // ------------------------------------------------------------------------
    // Scan configuration

    struct ExternalBackend
    {
        std::string descriptor;
        friend bool operator==(const ExternalBackend &, const ExternalBackend &) = default;
    };

    struct ScanConfig
    {
        bool unsafe_ranges = false;
        std::string scan_id = "scan";
        GridSpec grid;
        AcquisitionConfig acquisition;
        Timestamp start_time = *parse_iso8601("2026-01-01T00:00:00Z");
        WorkspaceGeometry workspace;
        Pose base_pose;
        Pose offset_pose;
        std::variant<SimScene, ExternalBackend> backend = SimScene{};
    };

    struct ConfigIssue
    {
        std::string kind; // SyntaxError | RangeError | UnknownKey | TypeError | InvalidGrid | MissingKey
        std::string field;
        int line = 0;     // 1-based, 0 if unknown
        std::string allowed;
        std::string got;
        std::string message;
    };

    class ConfigError : public error
    {
    public:
        explicit ConfigError(std::vector<ConfigIssue> issues)
            : error("ConfigError", summary(issues)), issues_(std::move(issues)) {}

        const std::vector<ConfigIssue> &issues() const noexcept { return issues_; }

    private:
        static std::string summary(const std::vector<ConfigIssue> &issues)
        {
            std::string s = std::to_string(issues.size()) + " configuration error(s)";
            for (const auto &i : issues)
                s += "; " + i.kind + " " + i.field + (i.line ? " (line " + std::to_string(i.line) + ")" : "") + ": " +
                     i.message;
            return s;
        }

        std::vector<ConfigIssue> issues_;
    };

    namespace detail
    {
        struct Range
        {
            double lo, hi;
            bool contains(double v) const { return v >= lo && v <= hi; }
            std::string str() const { return "[" + format_double(lo) + ", " + format_double(hi) + "]"; }
        };

        class ConfigReader
        {
        public:
            explicit ConfigReader(bool unsafe) : unsafe_(unsafe) {}

            std::vector<ConfigIssue> issues;

            static int line_of(const YAML::Node &n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

            void add(std::string kind, std::string field, const YAML::Node &at, std::string message,
                     std::string allowed = {}, std::string got = {})
            {
                issues.push_back({std::move(kind), std::move(field), at ? line_of(at) : 0, std::move(allowed),
                                  std::move(got), std::move(message)});
            }

            static std::string join(const std::string &path, const std::string &key)
            {
                return path.empty() ? key : path + "." + key;
            }

            // Rejects keys outside `allowed`. Returns false if `node` is not a map.
            bool expect_map(const YAML::Node &node, const std::string &path, std::initializer_list<const char *> allowed)
            {
                if (!node.IsMap())
                {
                    add("TypeError", path, node, "expected a mapping");
                    return false;
                }
                for (const auto &kv : node)
                {
                    const auto key = kv.first.as<std::string>();
                    bool known = false;
                    for (const char *a : allowed)
                        known = known || key == a;
                    if (!known)
                        add("UnknownKey", join(path, key), kv.first, "unknown key '" + key + "'");
                }
                return true;
            }

            std::optional<double> scalar_number(const YAML::Node &n, const std::string &field)
            {
                if (n.IsScalar())
                    if (auto v = parse_double(n.Scalar()); v && std::isfinite(*v))
                        return v;
                add("TypeError", field, n, "expected a finite number", {}, n.IsScalar() ? n.Scalar() : "");
                return std::nullopt;
            }

            // Reads node[key] into `out` if present. `safe` applies unless
            // unsafe_ranges is set; `hard` always applies.
            void number(const YAML::Node &node, const std::string &path, const char *key, double &out,
                        std::optional<Range> safe, std::optional<Range> hard = std::nullopt)
            {
                const auto n = node[key];
                if (!n)
                    return;
                const auto field = join(path, key);
                auto v = scalar_number(n, field);
                if (!v)
                    return;
                const auto &r = (unsafe_ || !safe) ? hard : safe;
                if (r && !r->contains(*v))
                {
                    add("RangeError", field, n, "value out of range", r->str(), n.Scalar());
                    return;
                }
                out = *v;
            }

            void integer(const YAML::Node &node, const std::string &path, const char *key, long long &out, long long lo)
            {
                const auto n = node[key];
                if (!n)
                    return;
                const auto field = join(path, key);
                long long v = 0;
                const std::string s = n.IsScalar() ? n.Scalar() : "";
                const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
                if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
                {
                    add("TypeError", field, n, "expected an integer", {}, s);
                    return;
                }
                if (v < lo)
                {
                    add("RangeError", field, n, "value out of range", ">= " + std::to_string(lo), s);
                    return;
                }
                out = v;
            }

            void boolean(const YAML::Node &node, const std::string &path, const char *key, bool &out)
            {
                const auto n = node[key];
                if (!n)
                    return;
                if (n.IsScalar() && (n.Scalar() == "true" || n.Scalar() == "false"))
                    out = n.Scalar() == "true";
                else
                    add("TypeError", join(path, key), n, "expected true or false");
            }

            void string(const YAML::Node &node, const std::string &path, const char *key, std::string &out)
            {
                const auto n = node[key];
                if (!n)
                    return;
                if (n.IsScalar() && n.Scalar().find('\n') == std::string::npos)
                    out = n.Scalar();
                else
                    add("TypeError", join(path, key), n, "expected a single-line string");
            }

            std::optional<Eigen::Vector3d> vec3(const YAML::Node &n, const std::string &field)
            {
                if (!n.IsSequence() || n.size() != 3)
                {
                    add("TypeError", field, n, "expected a list of 3 numbers");
                    return std::nullopt;
                }
                Eigen::Vector3d v;
                for (std::size_t i = 0; i < 3; ++i)
                {
                    auto x = scalar_number(n[i], field + "[" + std::to_string(i) + "]");
                    if (!x)
                        return std::nullopt;
                    v[static_cast<int>(i)] = *x;
                }
                return v;
            }

            void box(const YAML::Node &n, const std::string &path, Aabb &out)
            {
                if (!expect_map(n, path, {"min", "max"}))
                    return;
                if (!n["min"] || !n["max"])
                {
                    add("MissingKey", path, n, "box needs min and max");
                    return;
                }
                auto lo = vec3(n["min"], path + ".min");
                auto hi = vec3(n["max"], path + ".max");
                if (!lo || !hi)
                    return;
                if ((lo->array() > hi->array()).any())
                {
                    add("RangeError", path, n, "box min exceeds max");
                    return;
                }
                out = {*lo, *hi};
            }

            void pose(const YAML::Node &node, const char *key, Pose &out)
            {
                const auto n = node[key];
                if (!n)
                    return;
                const std::string path = key;
                if (!expect_map(n, path, {"translation", "axis", "angle_deg"}))
                    return;
                Eigen::Vector3d t = Eigen::Vector3d::Zero(), axis = Eigen::Vector3d::UnitZ();
                double angle = 0.0;
                if (n["translation"])
                    if (auto v = vec3(n["translation"], path + ".translation"))
                        t = *v;
                if (n["axis"])
                    if (auto v = vec3(n["axis"], path + ".axis"))
                        axis = *v;
                number(n, path, "angle_deg", angle, std::nullopt);
                if (angle != 0.0 && axis.norm() == 0.0)
                {
                    add("RangeError", path + ".axis", n["axis"], "rotation axis must be non-zero");
                    return;
                }
                out = Pose::from_rotation_vector(angle == 0.0 ? Eigen::Vector3d::Zero()
                                                              : Eigen::Vector3d(axis.normalized() * deg_to_rad(angle)),
                                                 t);
            }

            bool unsafe() const { return unsafe_; }

        private:
            bool unsafe_;
        };
    }

    // Default (bench) limits. unsafe_ranges: true relaxes them to physical
    // limits only.
    struct ConfigLimits
    {
        static constexpr detail::Range radius_m{0.03, 0.15};
        static constexpr detail::Range theta_deg{0.0, 70.0};
        static constexpr detail::Range step_deg{10.0, 20.0};
        static constexpr detail::Range dwell_s{1.0, 2.0};
        static constexpr detail::Range frequency_hz{58e9, 63e9};
    };

    // Parses a YAML scan configuration. Every problem found is reported in a
    // single ConfigError.
    inline ScanConfig parse_config(const std::string &text)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw ConfigError({{"SyntaxError", "", e.mark.line + 1, {}, {}, e.msg}});
        }

        ScanConfig cfg;
        if (!root || root.IsNull())
            return cfg;

        bool unsafe = false;
        if (root.IsMap() && root["unsafe_ranges"])
        {
            const auto n = root["unsafe_ranges"];
            unsafe = n.IsScalar() && n.Scalar() == "true";
        }
        detail::ConfigReader rd(unsafe);
        if (!rd.expect_map(root, "", {"format_version", "unsafe_ranges", "scan_id", "grid", "acquisition", "workspace",
                                      "base_pose", "offset_pose", "backend"}))
            throw ConfigError(rd.issues);

        cfg.unsafe_ranges = unsafe;
        rd.boolean(root, "", "unsafe_ranges", cfg.unsafe_ranges);
        if (const auto v = root["format_version"]; v && !(v.IsScalar() && v.Scalar() == "1"))
            rd.add("RangeError", "format_version", v, "unsupported format version", "1", v.IsScalar() ? v.Scalar() : "");
        rd.string(root, "", "scan_id", cfg.scan_id);

        using L = ConfigLimits;
        if (const auto g = root["grid"];
            g && rd.expect_map(g, "grid", {"theta_min_deg", "theta_max_deg", "theta_step_deg", "phi_step_deg", "radius_m"}))
        {
            const std::size_t before = rd.issues.size();
            rd.number(g, "grid", "theta_min_deg", cfg.grid.theta_min_deg, L::theta_deg, detail::Range{0.0, 90.0});
            rd.number(g, "grid", "theta_max_deg", cfg.grid.theta_max_deg, L::theta_deg, detail::Range{0.0, 90.0});
            rd.number(g, "grid", "theta_step_deg", cfg.grid.theta_step_deg, L::step_deg, detail::Range{1e-6, 90.0});
            rd.number(g, "grid", "phi_step_deg", cfg.grid.phi_step_deg, L::step_deg, detail::Range{1e-6, 360.0});
            rd.number(g, "grid", "radius_m", cfg.grid.radius_m, L::radius_m, detail::Range{1e-6, 10.0});
            if (rd.issues.size() == before)
            {
                try
                {
                    validate(cfg.grid);
                }
                catch (const InvalidGrid &e)
                {
                    rd.add("InvalidGrid", "grid", g, e.what());
                }
            }
        }

        if (const auto a = root["acquisition"];
            a && rd.expect_map(a, "acquisition", {"dwell_s", "settle_checks", "settle_tolerance_db", "retries_per_point",
                                                  "frequency_hz", "start_time"}))
        {
            auto &acq = cfg.acquisition;
            rd.number(a, "acquisition", "dwell_s", acq.dwell_s, L::dwell_s, detail::Range{0.0, 10.0});
            rd.number(a, "acquisition", "frequency_hz", acq.frequency_hz, L::frequency_hz, detail::Range{1.0, 1e15});
            rd.number(a, "acquisition", "settle_tolerance_db", acq.settle_tolerance_db, std::nullopt,
                      detail::Range{0.0, 1e6});
            long long n = acq.settle_checks;
            rd.integer(a, "acquisition", "settle_checks", n, 0);
            acq.settle_checks = static_cast<int>(n);
            n = acq.retries_per_point;
            rd.integer(a, "acquisition", "retries_per_point", n, 0);
            acq.retries_per_point = static_cast<int>(n);
            if (const auto t = a["start_time"])
            {
                const auto ts = t.IsScalar() ? parse_iso8601(t.Scalar()) : std::nullopt;
                if (ts)
                    cfg.start_time = *ts;
                else
                    rd.add("TypeError", "acquisition.start_time", t, "expected an ISO 8601 UTC timestamp");
            }
        }

        if (const auto w = root["workspace"];
            w && rd.expect_map(w, "workspace", {"dut_box", "table_plane_z", "keep_out_boxes", "clearance_m"}))
        {
            auto &ws = cfg.workspace;
            if (w["dut_box"])
            {
                rd.box(w["dut_box"], "workspace.dut_box", ws.dut_box);
                if (!ws.dut_box.contains(Eigen::Vector3d::Zero()))
                    rd.add("RangeError", "workspace.dut_box", w["dut_box"], "dut_box must contain the origin");
            }
            rd.number(w, "workspace", "table_plane_z", ws.table_plane_z, std::nullopt, detail::Range{-10.0, 10.0});
            rd.number(w, "workspace", "clearance_m", ws.clearance_m, std::nullopt, detail::Range{0.0, 10.0});
            if (const auto k = w["keep_out_boxes"])
            {
                if (!k.IsSequence())
                    rd.add("TypeError", "workspace.keep_out_boxes", k, "expected a list of boxes");
                else
                    for (std::size_t i = 0; i < k.size(); ++i)
                    {
                        Aabb b;
                        const std::size_t before = rd.issues.size();
                        rd.box(k[i], "workspace.keep_out_boxes[" + std::to_string(i) + "]", b);
                        if (rd.issues.size() == before)
                            ws.keep_out_boxes.push_back(b);
                    }
            }
        }

        rd.pose(root, "base_pose", cfg.base_pose);
        rd.pose(root, "offset_pose", cfg.offset_pose);

        if (const auto b = root["backend"]; b && rd.expect_map(b, "backend", {"sim", "external"}))
        {
            if (b["sim"] && b["external"])
                rd.add("RangeError", "backend", b, "choose exactly one of sim or external");
            else if (const auto e = b["external"])
            {
                ExternalBackend ext;
                if (rd.expect_map(e, "backend.external", {"descriptor"}))
                    rd.string(e, "backend.external", "descriptor", ext.descriptor);
                cfg.backend = ext;
            }
            else if (const auto s = b["sim"];
                     s && rd.expect_map(s, "backend.sim", {"pattern", "tx_power_dbm", "ripple_amplitude_db",
                                                           "ripple_period_deg", "noise_sigma_db", "jitter_sigma_m", "seed"}))
            {
                SimScene sc;
                const std::string p = "backend.sim";
                rd.number(s, p, "tx_power_dbm", sc.tx_power_dbm, std::nullopt);
                rd.number(s, p, "ripple_amplitude_db", sc.ripple_amplitude_db, std::nullopt, detail::Range{0.0, 1e3});
                rd.number(s, p, "ripple_period_deg", sc.ripple_period_deg, std::nullopt, detail::Range{1e-9, 1e6});
                rd.number(s, p, "noise_sigma_db", sc.noise_sigma_db, std::nullopt, detail::Range{0.0, 1e3});
                rd.number(s, p, "jitter_sigma_m", sc.jitter_sigma_m, std::nullopt, detail::Range{0.0, 1.0});
                long long seed = static_cast<long long>(sc.seed);
                rd.integer(s, p, "seed", seed, 0);
                sc.seed = static_cast<std::uint64_t>(seed);
                if (const auto pat = s["pattern"];
                    pat && rd.expect_map(pat, p + ".pattern", {"type", "q", "a_m", "b_m"}))
                {
                    std::string type = "cos_q";
                    rd.string(pat, p + ".pattern", "type", type);
                    if (type == "isotropic")
                        sc.pattern = Isotropic{};
                    else if (type == "cos_q")
                    {
                        CosQ c;
                        rd.number(pat, p + ".pattern", "q", c.q, std::nullopt, detail::Range{0.0, 1e4});
                        sc.pattern = c;
                    }
                    else if (type == "uniform_rect_aperture")
                    {
                        RectAperture r;
                        rd.number(pat, p + ".pattern", "a_m", r.a_m, std::nullopt, detail::Range{1e-9, 10.0});
                        rd.number(pat, p + ".pattern", "b_m", r.b_m, std::nullopt, detail::Range{1e-9, 10.0});
                        sc.pattern = r;
                    }
                    else
                        rd.add("RangeError", p + ".pattern.type", pat["type"], "unknown pattern type",
                               "isotropic|cos_q|uniform_rect_aperture", type);
                }
                cfg.backend = sc;
            }
        }

        if (!rd.issues.empty())
            throw ConfigError(rd.issues);
        return cfg;
    }

    // ------------------------------------------------------------------------
    // MapFile
    //
    //   format_version: 1
    //   kind: hemiscan-map
    //   <metadata key>: <value>      (fixed keys, then free-form extras)
    //   records:
    //   phi_deg,theta_deg,r_m,power_dbm,status,timestamp
    //   <one CSV row per record>

    namespace detail
    {
        inline const std::set<std::string> &reserved_map_keys()
        {
            static const std::set<std::string> keys{"format_version", "kind", "frequency_hz", "grid", "source",
                                                    "scan_id", "created_at", "normalization_offset_db", "records"};
            return keys;
        }

        inline void check_line(const std::string &s, const char *what)
        {
            if (s.find_first_of("\r\n") != std::string::npos)
                throw MapFormatError(std::string(what) + " must be a single line");
        }

        inline std::string grid_to_string(const GridSpec &g)
        {
            return "theta_min_deg=" + format_double(g.theta_min_deg) + " theta_max_deg=" + format_double(g.theta_max_deg) +
                   " theta_step_deg=" + format_double(g.theta_step_deg) + " phi_step_deg=" + format_double(g.phi_step_deg) +
                   " radius_m=" + format_double(g.radius_m);
        }

        inline std::optional<GridSpec> grid_from_string(const std::string &s)
        {
            GridSpec g;
            std::istringstream in(s);
            std::string tok;
            int seen = 0;
            while (in >> tok)
            {
                const auto eq = tok.find('=');
                if (eq == std::string::npos)
                    return std::nullopt;
                const auto key = tok.substr(0, eq);
                const auto v = parse_double(std::string_view(tok).substr(eq + 1));
                if (!v)
                    return std::nullopt;
                if (key == "theta_min_deg") g.theta_min_deg = *v;
                else if (key == "theta_max_deg") g.theta_max_deg = *v;
                else if (key == "theta_step_deg") g.theta_step_deg = *v;
                else if (key == "phi_step_deg") g.phi_step_deg = *v;
                else if (key == "radius_m") g.radius_m = *v;
                else return std::nullopt;
                ++seen;
            }
            if (seen != 5)
                return std::nullopt;
            return g;
        }
    }

    inline std::string serialize_map(const PowerMap &m)
    {
        const auto &md = m.metadata;
        detail::check_line(md.source, "source");
        detail::check_line(md.scan_id, "scan_id");
        std::string out;
        out += "format_version: " + std::to_string(format_version) + "\n";
        out += "kind: hemiscan-map\n";
        out += "frequency_hz: " + format_double(md.frequency_hz) + "\n";
        if (md.grid)
            out += "grid: " + detail::grid_to_string(*md.grid) + "\n";
        out += "source: " + md.source + "\n";
        out += "scan_id: " + md.scan_id + "\n";
        out += "created_at: " + format_iso8601(md.created_at) + "\n";
        if (md.normalization_offset_db)
            out += "normalization_offset_db: " + format_double(*md.normalization_offset_db) + "\n";
        for (const auto &[k, v] : md.extra)
        {
            if (k.empty() || k.find_first_of(": \t\r\n") != std::string::npos || detail::reserved_map_keys().count(k))
                throw MapFormatError("invalid metadata key '" + k + "'");
            detail::check_line(v, "metadata value");
            out += k + ": " + v + "\n";
        }
        out += "records:\nphi_deg,theta_deg,r_m,power_dbm,status,timestamp\n";
        for (const auto &r : m.records)
        {
            out += format_double(r.phi_deg) + ',' + format_double(r.theta_deg) + ',' + format_double(r.r_m) + ',';
            out += r.power_dbm ? format_double(*r.power_dbm) : std::string("nan");
            out += ',';
            out += to_string(r.status);
            out += ',' + format_iso8601(r.timestamp) + '\n';
        }
        return out;
    }

    inline PowerMap parse_map(const std::string &text)
    {
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        auto fail = [&](const std::string &msg) -> MapFormatError {
            return MapFormatError(msg + " (line " + std::to_string(lineno) + ")");
        };
        auto next = [&]() -> bool {
            if (!std::getline(in, line))
                return false;
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            return true;
        };

        if (!next() || line != "format_version: 1")
            throw fail("expected 'format_version: 1'");
        if (!next() || line != "kind: hemiscan-map")
            throw fail("expected 'kind: hemiscan-map'");

        PowerMap m;
        bool have_freq = false, have_created = false, have_source = false, have_id = false;
        for (;;)
        {
            if (!next())
                throw fail("missing records section");
            if (line == "records:")
                break;
            const auto sep = line.find(": ");
            if (sep == std::string::npos)
                throw fail("expected 'key: value'");
            const auto key = line.substr(0, sep);
            const auto value = line.substr(sep + 2);
            if (key == "frequency_hz")
            {
                auto v = parse_double(value);
                if (!v)
                    throw fail("bad frequency_hz");
                m.metadata.frequency_hz = *v;
                have_freq = true;
            }
            else if (key == "grid")
            {
                m.metadata.grid = detail::grid_from_string(value);
                if (!m.metadata.grid)
                    throw fail("bad grid");
            }
            else if (key == "source")
                m.metadata.source = value, have_source = true;
            else if (key == "scan_id")
                m.metadata.scan_id = value, have_id = true;
            else if (key == "created_at")
            {
                auto t = parse_iso8601(value);
                if (!t)
                    throw fail("bad created_at");
                m.metadata.created_at = *t;
                have_created = true;
            }
            else if (key == "normalization_offset_db")
            {
                auto v = parse_double(value);
                if (!v)
                    throw fail("bad normalization_offset_db");
                m.metadata.normalization_offset_db = v;
            }
            else if (detail::reserved_map_keys().count(key))
                throw fail("duplicate or misplaced key '" + key + "'");
            else
                m.metadata.extra.emplace_back(key, value);
        }
        if (!have_freq || !have_created || !have_source || !have_id)
            throw fail("header lacks frequency_hz, source, scan_id or created_at");
        if (!next() || line != "phi_deg,theta_deg,r_m,power_dbm,status,timestamp")
            throw fail("expected record column header");

        while (next())
        {
            if (line.empty())
                continue;
            std::vector<std::string_view> f;
            std::string_view rest(line);
            for (;;)
            {
                const auto c = rest.find(',');
                f.push_back(rest.substr(0, c));
                if (c == std::string_view::npos)
                    break;
                rest.remove_prefix(c + 1);
            }
            if (f.size() != 6)
                throw fail("expected 6 fields");
            PowerRecord r;
            const auto phi = parse_double(f[0]), theta = parse_double(f[1]), rad = parse_double(f[2]);
            const auto st = parse_status(f[4]);
            const auto ts = parse_iso8601(f[5]);
            if (!phi || !theta || !rad || !st || !ts)
                throw fail("bad record field");
            r.phi_deg = *phi;
            r.theta_deg = *theta;
            r.r_m = *rad;
            r.status = *st;
            r.timestamp = *ts;
            if (f[3] != "nan")
            {
                const auto p = parse_double(f[3]);
                if (!p)
                    throw fail("bad power_dbm");
                r.power_dbm = *p;
            }
            if (r.status == RecordStatus::ok && !r.power_dbm)
                throw fail("ok record without power");
            m.records.push_back(r);
        }
        validate(m);
        return m;
    }

    // ------------------------------------------------------------------------
    // Plan file (JSON)

    inline nlohmann::ordered_json to_json(const Pose &p)
    {
        nlohmann::ordered_json rot = nlohmann::ordered_json::array();
        for (int i = 0; i < 3; ++i)
            rot.push_back({p.rotation(i, 0), p.rotation(i, 1), p.rotation(i, 2)});
        return {{"translation", {p.translation.x(), p.translation.y(), p.translation.z()}}, {"rotation", rot}};
    }

    inline std::string serialize_plan(const ScanPlan &plan, const GridSpec &grid)
    {
        nlohmann::ordered_json j;
        j["format_version"] = format_version;
        j["kind"] = "hemiscan-plan";
        j["grid"] = detail::grid_to_string(grid);
        j["grid_size"] = plan.grid_size();
        j["entries_count"] = plan.entries.size();
        j["skipped_count"] = plan.skipped.size();
        j["coverage"] = plan.coverage();
        j["t_base"] = to_json(plan.t_base);
        j["t_offset"] = to_json(plan.t_offset);
        auto &entries = j["entries"] = nlohmann::ordered_json::array();
        for (const auto &e : plan.entries)
            entries.push_back({{"index", e.index},
                               {"phi_deg", e.sample.phi_deg},
                               {"theta_deg", e.sample.theta_deg},
                               {"r_m", e.sample.r_m},
                               {"commanded", to_json(e.commanded)}});
        auto &skipped = j["skipped"] = nlohmann::ordered_json::array();
        for (const auto &s : plan.skipped)
            skipped.push_back({{"index", s.index},
                               {"phi_deg", s.sample.phi_deg},
                               {"theta_deg", s.sample.theta_deg},
                               {"r_m", s.sample.r_m},
                               {"reason", s.reason}});
        return j.dump(1) + "\n";
    }
}
