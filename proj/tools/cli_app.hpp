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

// Command-line front end. Kept in a header so the test suites can drive the
// exact same code path in-process.
//
// Exit codes: 0 success, 1 threshold not met, 2 usage / parse / runtime error.

#pragma once

#include "hemiscan/hemiscan.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hemiscan::cli
{
    enum exit_code : int
    {
        ok = 0,
        threshold_failed = 1,
        usage_error = 2
    };

    inline std::string read_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw error("IOError", "cannot open '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    inline void write_file(const std::string &path, const std::string &content, std::ostream &out)
    {
        if (path == "-")
        {
            out << content;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f || !(f << content))
            throw error("IOError", "cannot write '" + path + "'");
    }

    inline PowerMap load_map(const std::string &path) { return parse_map(read_file(path)); }

    // One JSON object on one line.
    inline void report_error(std::ostream &err, const error &e)
    {
        nlohmann::ordered_json j{{"error", e.kind()}, {"message", e.what()}};
        if (const auto *ce = dynamic_cast<const ConfigError *>(&e))
        {
            auto &issues = j["issues"] = nlohmann::ordered_json::array();
            for (const auto &i : ce->issues())
                issues.push_back({{"kind", i.kind},
                                  {"field", i.field},
                                  {"line", i.line},
                                  {"allowed", i.allowed},
                                  {"got", i.got},
                                  {"message", i.message}});
        }
        err << j.dump() << "\n";
    }

    inline std::string fixed(double v, int digits = 4)
    {
        std::ostringstream os;
        os << std::fixed << std::setprecision(digits) << v;
        return os.str();
    }

    struct Runner
    {
        std::ostream &out;
        std::ostream &err;

        int plan(const std::string &config_path, const std::string &out_path, double min_coverage)
        {
            const auto cfg = parse_config(read_file(config_path));
            const auto grid = generate_grid(cfg.grid);
            ScanPlan plan;
            try
            {
                plan = plan_scan(grid, cfg.base_pose, cfg.offset_pose, cfg.workspace);
            }
            catch (const EmptyPlan &e)
            {
                out << "points: " << grid.size() << "\nplanned: 0\nskipped: " << grid.size() << "\ncoverage: 0.00%\n";
                report_error(err, e);
                return threshold_failed;
            }
            out << "points: " << plan.grid_size() << "\nplanned: " << plan.entries.size()
                << "\nskipped: " << plan.skipped.size() << "\n";
            for (const auto &s : plan.skipped)
                out << "  skip #" << s.index << " phi=" << format_double(s.sample.phi_deg)
                    << " theta=" << format_double(s.sample.theta_deg) << " reason=" << s.reason << "\n";
            out << "coverage: " << fixed(100.0 * plan.coverage(), 2) << "%\n";
            if (!out_path.empty())
                write_file(out_path, serialize_plan(plan, cfg.grid), out);
            return plan.coverage() >= min_coverage - 1e-12 ? ok : threshold_failed;
        }

        int scan(const std::string &config_path, std::optional<std::uint64_t> seed, const std::string &out_path,
                 const std::string &events_path)
        {
            const auto cfg = parse_config(read_file(config_path));
            const auto *scene_ptr = std::get_if<SimScene>(&cfg.backend);
            if (!scene_ptr)
                throw error("UnsupportedBackend", "no driver available for backend '" +
                                                      std::get<ExternalBackend>(cfg.backend).descriptor + "'");
            SimScene scene = *scene_ptr;
            if (seed)
                scene.seed = *seed;

            const auto plan = plan_scan(generate_grid(cfg.grid), cfg.base_pose, cfg.offset_pose, cfg.workspace);
            auto ports = make_sim_ports(scene, cfg.base_pose, cfg.offset_pose);
            ManualClock clock(cfg.start_time);
            MapMetadata md;
            md.grid = cfg.grid;
            md.source = describe(scene);
            md.scan_id = cfg.scan_id;
            const auto res = run_scan(plan, cfg.acquisition, *ports.positioner, *ports.sensor, clock, md);

            write_file(out_path, serialize_map(res.map), out);
            if (!events_path.empty())
                write_file(events_path, serialize_events(res.events), out);
            const auto summary = replay_events(res.events);
            if (out_path != "-")
                out << "records: " << res.map.records.size() << "\nok: " << summary.points_ok
                    << "\nfailed: " << summary.points_failed << "\nskipped: " << plan.skipped.size()
                    << "\ntotal_dwell_s: " << format_double(summary.total_dwell_s) << "\n";
            return ok;
        }

        int reference(const std::string &config_path, const std::string &out_path)
        {
            const auto cfg = parse_config(read_file(config_path));
            const auto *scene = std::get_if<SimScene>(&cfg.backend);
            if (!scene)
                throw error("UnsupportedBackend", "reference maps need a sim backend");
            write_file(out_path, serialize_map(reference_map(*scene, cfg.grid, cfg.acquisition.frequency_hz, cfg.start_time)),
                       out);
            return ok;
        }

        int cut(const std::string &map_path, const std::vector<std::string> &overlays, double phi, bool norm,
                const std::string &format, const std::string &interp, const std::string &out_path)
        {
            const auto mode = interp == "nearest" ? CutInterpolation::nearest : CutInterpolation::linear_in_theta;
            auto make = [&](const std::string &path) {
                auto m = load_map(path);
                if (norm)
                    m = normalize(std::move(m));
                return extract_cut(m, phi, mode);
            };
            const auto primary = make(map_path);
            if (format == "csv")
            {
                write_file(out_path, cut_to_csv(primary), out);
                return ok;
            }
            std::vector<CutSeries> series{{map_path, primary}};
            for (const auto &p : overlays)
                series.push_back({p, make(p)});
            PolarStyle style;
            if (!norm)
            {
                // Raw dBm: scale the plot to the data peak.
                double peak = -std::numeric_limits<double>::infinity();
                for (const auto &s : series)
                    for (const auto &pt : s.cut.points)
                        if (pt.power_db)
                            peak = std::max(peak, *pt.power_db);
                for (auto &s : series)
                    for (auto &pt : s.cut.points)
                        if (pt.power_db)
                            *pt.power_db -= peak;
            }
            write_file(out_path, cut_to_svg(series, style), out);
            return ok;
        }

        int compare(const std::string &a_path, const std::string &b_path, double max_mae, bool norm)
        {
            auto a = load_map(a_path), b = load_map(b_path);
            if (norm)
            {
                a = normalize(std::move(a));
                b = normalize(std::move(b));
            }
            const auto res = mae_detail(a, b);
            out << "mae_db: " << format_double(res.mae_db) << "\ncommon_points: " << res.common
                << "\ndropped_a: " << res.dropped_a << "\ndropped_b: " << res.dropped_b << "\n";
            if (a.metadata.grid)
            {
                const double step = a.metadata.grid->phi_step_deg;
                for (double phi = 0.0; phi < 180.0 - 1e-9; phi += step)
                {
                    try
                    {
                        const auto m = mae_db(extract_cut(a, phi), extract_cut(b, phi));
                        out << "cut_mae_db phi=" << format_double(phi) << ": " << format_double(m) << "\n";
                    }
                    catch (const error &)
                    {
                        out << "cut_mae_db phi=" << format_double(phi) << ": n/a\n";
                    }
                }
            }
            return res.mae_db <= max_mae ? ok : threshold_failed;
        }

        int repeat(const std::vector<std::string> &paths, const std::string &statistic, double max_db, bool norm)
        {
            std::vector<PowerMap> maps;
            for (const auto &p : paths)
                maps.push_back(norm ? normalize(load_map(p)) : load_map(p));
            const double std_mean = repeatability_db(maps, RepeatabilityStatistic::per_point_std_mean);
            const double range = repeatability_db(maps, RepeatabilityStatistic::max_range);
            out << "maps: " << maps.size() << "\nper_point_std_mean_db: " << format_double(std_mean)
                << "\nmax_range_db: " << format_double(range) << "\n";
            const double gated = statistic == "max_range" ? range : std_mean;
            return gated <= max_db ? ok : threshold_failed;
        }

        int report(const std::vector<std::string> &paths, const std::string &ref_path, bool norm)
        {
            auto ref = load_map(ref_path);
            if (norm)
                ref = normalize(std::move(ref));
            std::vector<PowerMap> maps;
            std::vector<double> maes, coverage;
            for (const auto &p : paths)
            {
                auto m = load_map(p);
                if (norm)
                    m = normalize(std::move(m));
                maes.push_back(mae_db(m, ref));
                coverage.push_back(m.metadata.grid ? coverage_fraction(m) : std::numeric_limits<double>::quiet_NaN());
                maps.push_back(std::move(m));
            }
            const auto [lo, hi] = std::minmax_element(maes.begin(), maes.end());
            double mean = 0.0;
            for (double v : maes)
                mean += v;
            mean /= static_cast<double>(maes.size());

            std::string rep = "n/a (single scan)";
            if (maps.size() >= 2)
                rep = fixed(repeatability_db(maps, RepeatabilityStatistic::per_point_std_mean), 3) + " dB (std), " +
                      fixed(repeatability_db(maps, RepeatabilityStatistic::max_range), 3) + " dB (range)";
            const double cov_min = *std::min_element(coverage.begin(), coverage.end());

            out << "Summary of measurement performance (" << maps.size() << " scan(s) vs " << ref_path << ")\n";
            out << "| Metric | Value |\n|---|---|\n";
            out << "| Mean Absolute Error | " << fixed(*lo, 3) << " - " << fixed(*hi, 3) << " dB (mean " << fixed(mean, 3)
                << ") |\n";
            out << "| Intra-Day Repeatability | " << rep << " |\n";
            out << "| Scan Coverage Success | "
                << (std::isnan(cov_min) ? std::string("n/a") : fixed(100.0 * cov_min, 1) + "%") << " |\n";
            return ok;
        }
    };

    inline int run(std::vector<std::string> args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"hemiscan - plan, run and analyse hemispherical received-power scans", "hemiscan"};
        app.require_subcommand(1);
        Runner r{out, err};
        std::function<int()> action;

        std::string config, out_path, events_path, map_a, map_b, ref_path, format = "csv", interp = "nearest",
                                                                           statistic = "per_point_std_mean";
        std::vector<std::string> maps, overlays;
        double min_coverage = 1.0, phi = 0.0, max_mae = std::numeric_limits<double>::infinity(),
               max_db = std::numeric_limits<double>::infinity();
        bool norm = false;
        std::uint64_t seed = 0;

        auto *plan = app.add_subcommand("plan", "Generate and collision-check the scan plan");
        plan->add_option("config", config, "Scan configuration (YAML)")->required();
        plan->add_option("--out", out_path, "Write the plan (JSON)");
        plan->add_option("--min-coverage", min_coverage, "Required planned fraction of the grid")
            ->check(CLI::Range(0.0, 1.0));
        plan->callback([&] { action = [&] { return r.plan(config, out_path, min_coverage); }; });

        auto *scan = app.add_subcommand("scan", "Run the scan against the configured backend");
        scan->add_option("config", config, "Scan configuration (YAML)")->required();
        auto *seed_opt = scan->add_option("--seed", seed, "Override the simulation seed");
        scan->add_option("--out", out_path, "Map file to write ('-' for stdout)")->required();
        scan->add_option("--events", events_path, "Event log to write (NDJSON)");
        scan->callback([&] {
            action = [&] {
                return r.scan(config, seed_opt->count() ? std::optional(seed) : std::nullopt, out_path, events_path);
            };
        });

        auto *reference = app.add_subcommand("reference", "Dump the closed-form map of the configured sim scene");
        reference->add_option("config", config, "Scan configuration (YAML)")->required();
        reference->add_option("--out", out_path, "Map file to write ('-' for stdout)")->required();
        reference->callback([&] { action = [&] { return r.reference(config, out_path); }; });

        auto *cut = app.add_subcommand("cut", "Extract a phi-plane cut");
        cut->add_option("map", map_a, "Map file")->required();
        cut->add_option("--phi", phi, "Cut plane azimuth in degrees")->required();
        cut->add_flag("--normalize", norm, "Normalise to the map peak first");
        cut->add_option("--format", format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}));
        cut->add_option("--interp", interp, "nearest or linear_in_theta")
            ->check(CLI::IsMember({"nearest", "linear_in_theta"}));
        cut->add_option("--overlay", overlays, "Extra maps drawn on the same svg");
        cut->add_option("--out", out_path, "Output file (default stdout)");
        cut->callback([&] {
            action = [&] {
                return r.cut(map_a, overlays, phi, norm, format, interp, out_path.empty() ? "-" : out_path);
            };
        });

        auto *compare = app.add_subcommand("compare", "Mean absolute error between two maps");
        compare->add_option("map_a", map_a, "First map")->required();
        compare->add_option("map_b", map_b, "Second map")->required();
        compare->add_option("--max-mae-db", max_mae, "Exit 1 if the overall MAE exceeds this");
        compare->add_flag("--normalize", norm, "Normalise both maps to their own peak first");
        compare->callback([&] { action = [&] { return r.compare(map_a, map_b, max_mae, norm); }; });

        auto *repeat = app.add_subcommand("repeat", "Repeatability across repeated scans");
        repeat->add_option("maps", maps, "Two or more map files")->required();
        repeat->add_option("--statistic", statistic, "Gated statistic")
            ->check(CLI::IsMember({"per_point_std_mean", "max_range"}));
        repeat->add_option("--max-db", max_db, "Exit 1 if the gated statistic exceeds this");
        repeat->add_flag("--normalize", norm, "Normalise each map first");
        repeat->callback([&] { action = [&] { return r.repeat(maps, statistic, max_db, norm); }; });

        auto *report = app.add_subcommand("report", "Performance summary table");
        report->add_option("maps", maps, "Scan map files")->required();
        report->add_option("--reference", ref_path, "Reference map")->required();
        report->add_flag("--normalize", norm, "Normalise every map first");
        report->callback([&] { action = [&] { return r.report(maps, ref_path, norm); }; });

        std::reverse(args.begin(), args.end()); // CLI11 consumes a reversed vector
        try
        {
            app.parse(args);
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return ok;
        }
        catch (const CLI::CallForAllHelp &)
        {
            out << app.help("", CLI::AppFormatMode::All);
            return ok;
        }
        catch (const CLI::ParseError &e)
        {
            report_error(err, error("UsageError", e.what()));
            return usage_error;
        }

        try
        {
            return action();
        }
        catch (const error &e)
        {
            report_error(err, e);
            return usage_error;
        }
        catch (const std::exception &e)
        {
            report_error(err, error("InternalError", e.what()));
            return usage_error;
        }
    }
}
