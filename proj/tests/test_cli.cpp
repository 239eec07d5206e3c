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

#include "cli_app.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hemiscan;
namespace fs = std::filesystem;

namespace
{
    struct Outcome
    {
        int code;
        std::string out, err;
    };

    Outcome invoke(std::vector<std::string> args)
    {
        std::ostringstream out, err;
        const int code = cli::run(std::move(args), out, err);
        return {code, out.str(), err.str()};
    }

    struct TempDir
    {
        fs::path path;
        TempDir()
        {
            path = fs::temp_directory_path() /
                   ("hemiscan_cli_" + std::to_string(std::random_device{}()));
            fs::create_directories(path);
        }
        ~TempDir() { fs::remove_all(path); }
        std::string operator/(const std::string &name) const { return (path / name).string(); }
    };

    void write(const std::string &path, const std::string &text)
    {
        std::ofstream(path) << text;
    }

    std::string read(const std::string &path)
    {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    const std::string bench = HEMISCAN_CONFIG_DIR "/bench.yaml";
}

TEST_CASE("cli plan reports coverage", "[cli]")
{
    TempDir tmp;
    auto r = invoke({"plan", bench, "--out", tmp / "plan.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("points: 253\nplanned: 253\nskipped: 0\n") != std::string::npos);
    CHECK(r.out.find("coverage: 100.00%") != std::string::npos);
    const auto plan = nlohmann::json::parse(read(tmp / "plan.json"));
    CHECK(plan["entries"].size() == 253);

    write(tmp / "tight.yaml", "grid: {radius_m: 0.05}\nworkspace: {keep_out_boxes: [{min: [0.035, -0.01, 0.0], "
                              "max: [0.06, 0.01, 0.03]}]}\n");
    r = invoke({"plan", tmp / "tight.yaml"});
    CHECK(r.code == 1);
    CHECK(r.out.find("reason=keep_out[0]") != std::string::npos);
    CHECK(invoke({"plan", tmp / "tight.yaml", "--min-coverage", "0.9"}).code == 0);

    write(tmp / "empty.yaml", "unsafe_ranges: true\ngrid: {radius_m: 0.02}\n");
    r = invoke({"plan", tmp / "empty.yaml"});
    CHECK(r.code == 1);
    CHECK(r.out.find("coverage: 0.00%") != std::string::npos);
    CHECK(r.err.find("EmptyPlan") != std::string::npos);
}

TEST_CASE("cli scan, reference and compare", "[cli]")
{
    TempDir tmp;
    REQUIRE(invoke({"scan", bench, "--out", tmp / "scan.map", "--events", tmp / "scan.ndjson"}).code == 0);
    REQUIRE(invoke({"reference", bench, "--out", tmp / "ref.map"}).code == 0);
    CHECK(replay_events(parse_events(read(tmp / "scan.ndjson"))).points_ok == 253);

    auto r = invoke({"compare", tmp / "scan.map", tmp / "ref.map", "--max-mae-db", "1e-9"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("mae_db: ", 0) == 0);
    CHECK(std::stod(r.out.substr(8)) < 1e-9);
    CHECK(r.out.find("common_points: 253\n") != std::string::npos);
    CHECK(r.out.find("cut_mae_db phi=0: ") != std::string::npos);

    auto shifted = parse_map(read(tmp / "ref.map"));
    for (auto &rec : shifted.records)
        *rec.power_dbm += 1.5;
    write(tmp / "shift.map", serialize_map(shifted));
    CHECK(invoke({"compare", tmp / "scan.map", tmp / "shift.map", "--max-mae-db", "1.6"}).code == 0);
    CHECK(invoke({"compare", tmp / "scan.map", tmp / "shift.map", "--max-mae-db", "1.4"}).code == 1);
    CHECK(invoke({"compare", tmp / "scan.map", tmp / "shift.map", "--max-mae-db", "1e-9", "--normalize"}).code == 0);

    // same seed, same bytes; a different seed changes nothing in an ideal scene
    REQUIRE(invoke({"scan", bench, "--out", tmp / "again.map"}).code == 0);
    CHECK(read(tmp / "again.map") == read(tmp / "scan.map"));
    const auto to_stdout = invoke({"scan", bench, "--out", "-"});
    CHECK(to_stdout.out == read(tmp / "scan.map"));
}

TEST_CASE("cli cut output", "[cli]")
{
    TempDir tmp;
    write(tmp / "iso.yaml", "backend: {sim: {pattern: {type: isotropic}}}\n");
    REQUIRE(invoke({"reference", tmp / "iso.yaml", "--out", tmp / "iso.map"}).code == 0);
    auto r = invoke({"cut", tmp / "iso.map", "--phi", "30", "--normalize"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line))
    {
        if (line.empty() || line[0] == '#' || line.rfind("theta", 0) == 0)
            continue;
        CHECK(line.substr(line.find(',') + 1) == "0");
        ++rows;
    }
    CHECK(rows == 15);

    REQUIRE(invoke({"reference", bench, "--out", tmp / "ref.map"}).code == 0);
    r = invoke({"cut", tmp / "ref.map", "--phi", "0", "--format", "svg", "--overlay", tmp / "iso.map", "--out",
             tmp / "cut.svg"});
    CHECK(r.code == 0);
    CHECK(read(tmp / "cut.svg").rfind("<svg", 0) == 0);

    r = invoke({"cut", tmp / "ref.map", "--phi", "5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("PlaneNotSampled") != std::string::npos);
    CHECK(invoke({"cut", tmp / "ref.map", "--phi", "5", "--interp", "linear_in_theta"}).code == 0);
}

TEST_CASE("cli repeat and report", "[cli]")
{
    TempDir tmp;
    const std::string cfg = HEMISCAN_CONFIG_DIR "/bench_jitter.yaml";
    std::vector<std::string> maps;
    for (int seed = 1; seed <= 3; ++seed)
    {
        maps.push_back(tmp / ("s" + std::to_string(seed) + ".map"));
        REQUIRE(invoke({"scan", cfg, "--seed", std::to_string(seed), "--out", maps.back()}).code == 0);
    }
    CHECK(read(maps[0]) != read(maps[1]));

    auto r = invoke({"repeat", maps[0], maps[1], maps[2], "--max-db", "0.2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("per_point_std_mean_db: ") != std::string::npos);
    CHECK(invoke({"repeat", maps[0], maps[1], maps[2], "--max-db", "0.001"}).code == 1);
    CHECK(invoke({"repeat", maps[0], "--max-db", "1"}).code == 2);

    REQUIRE(invoke({"reference", cfg, "--out", tmp / "ref.map"}).code == 0);
    r = invoke({"report", maps[0], maps[1], maps[2], "--reference", tmp / "ref.map"});
    CHECK(r.code == 0);
    CHECK(r.out.find("| Mean Absolute Error | ") != std::string::npos);
    CHECK(r.out.find("| Intra-Day Repeatability | ") != std::string::npos);
    CHECK(r.out.find("| Scan Coverage Success | 100.0% |") != std::string::npos);
}

TEST_CASE("cli usage and input errors exit 2", "[cli]")
{
    TempDir tmp;
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"scan", bench}).code == 2); // --out missing
    CHECK(invoke({"cut", "x.map", "--phi", "0", "--format", "png"}).code == 2);
    CHECK(invoke({"compare", tmp / "missing.map", tmp / "missing.map"}).code == 2);

    write(tmp / "bad.yaml", "grid:\n  radius_m: 0.20\n  bogus: 1\n");
    const auto r = invoke({"plan", tmp / "bad.yaml"});
    CHECK(r.code == 2);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"] == "ConfigError");
    CHECK(j["issues"].size() == 2);

    write(tmp / "ext.yaml", "backend: {external: {descriptor: lab}}\n");
    CHECK(invoke({"scan", tmp / "ext.yaml", "--out", tmp / "x.map"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}
