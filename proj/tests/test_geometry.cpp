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

#include <set>

using namespace hemiscan;
using Catch::Approx;

TEST_CASE("generate_grid sample counts", "[geometry]")
{
    SECTION("bench grid has a pole plus seven rings of 36")
    {
        GridSpec g{0, 70, 10, 10, 0.08};
        const auto grid = generate_grid(g);
        CHECK(grid.size() == 253);
        CHECK(grid_size(g) == 253);
        CHECK(grid.front() == SphericalSample{0, 0, 0.08});
    }
    SECTION("degenerate range at the pole is one sample")
    {
        const auto grid = generate_grid({0, 0, 10, 30, 0.05});
        REQUIRE(grid.size() == 1);
        CHECK(grid[0].is_pole());
    }
    SECTION("15 deg does not divide 70")
    {
        CHECK_THROWS_AS(generate_grid({0, 70, 15, 10, 0.08}), InvalidGrid);
    }
    SECTION("other invalid specs")
    {
        CHECK_THROWS_AS(generate_grid({0, 70, 10, 7, 0.08}), InvalidGrid);  // 7 does not divide 360
        CHECK_THROWS_AS(generate_grid({0, 95, 5, 10, 0.08}), InvalidGrid);  // past the equator
        CHECK_THROWS_AS(generate_grid({40, 20, 10, 10, 0.08}), InvalidGrid);
        CHECK_THROWS_AS(generate_grid({0, 70, 10, 10, 0.0}), InvalidGrid);
        CHECK_THROWS_AS(generate_grid({0, 70, 0, 10, 0.08}), InvalidGrid);
    }
    SECTION("no pole when theta_min > 0")
    {
        const auto grid = generate_grid({20, 60, 20, 20, 0.1});
        CHECK(grid.size() == 3 * 18);
        CHECK(grid.front().theta_deg == 20);
    }
}

TEST_CASE("generate_grid ordering is theta ascending with phi meander", "[geometry]")
{
    const auto grid = generate_grid({0, 30, 10, 90, 0.08});
    std::vector<std::pair<double, double>> got;
    for (const auto &s : grid)
        got.emplace_back(s.theta_deg, s.phi_deg);
    const std::vector<std::pair<double, double>> want{{0, 0},    {10, 0},  {10, 90},  {10, 180}, {10, 270},
                                                      {20, 270}, {20, 180}, {20, 90}, {20, 0},   {30, 0},
                                                      {30, 90},  {30, 180}, {30, 270}};
    CHECK(got == want);
}

TEST_CASE("grid has no duplicate directions", "[geometry]")
{
    for (const GridSpec g : {GridSpec{0, 70, 10, 10, 0.08}, GridSpec{0, 90, 15, 20, 0.05}, GridSpec{10, 70, 20, 15, 0.1}})
    {
        std::set<std::pair<double, double>> seen;
        for (const auto &s : generate_grid(g))
            CHECK(seen.emplace(s.phi_deg, s.theta_deg).second);
    }
}

TEST_CASE("SphericalSample::make normalises", "[geometry]")
{
    CHECK(SphericalSample::make(370, 20, 0.1).phi_deg == Approx(10));
    CHECK(SphericalSample::make(-90, 20, 0.1).phi_deg == Approx(270));
    CHECK(SphericalSample::make(123, 0, 0.1).phi_deg == 0.0);
    CHECK_THROWS_AS(SphericalSample::make(0, 91, 0.1), InvalidSample);
    CHECK_THROWS_AS(SphericalSample::make(0, 10, -0.1), InvalidSample);
}

TEST_CASE("spherical_to_pose examples", "[geometry]")
{
    SECTION("pole")
    {
        const auto p = spherical_to_pose({0, 0, 0.08});
        CHECK(p.translation.isApprox(Eigen::Vector3d(0, 0, 0.08)));
        CHECK((p.boresight() - Eigen::Vector3d(0, 0, -1)).norm() < 1e-15);
        // roll at the pole: probe +x along global +x
        CHECK((p.rotation.col(0) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
    }
    SECTION("equator on the x axis")
    {
        const auto p = spherical_to_pose({0, 90, 0.1});
        CHECK((p.translation - Eigen::Vector3d(0.1, 0, 0)).norm() < 1e-15);
        CHECK((p.boresight() - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-15);
    }
    SECTION("phi 90 theta 30")
    {
        // 0.06 * sin 30 = 0.03, 0.06 * cos 30 = 0.0519615242270663
        const auto p = spherical_to_pose({90, 30, 0.06});
        CHECK(std::abs(p.translation.x()) < 1e-15);
        CHECK(p.translation.y() == Approx(0.03).margin(1e-15));
        CHECK(p.translation.z() == Approx(0.0519615242270663).margin(1e-15));
    }
}

TEST_CASE("spherical_to_pose properties over grids", "[geometry][property]")
{
    for (const GridSpec g : {GridSpec{0, 70, 10, 10, 0.08}, GridSpec{0, 90, 5, 5, 0.05}})
        for (const auto &s : generate_grid(g))
        {
            const auto p = spherical_to_pose(s);
            CHECK(p.is_valid(1e-12));
            CHECK(pose_boresight_error(p) < 1e-9);
            CHECK(std::abs(p.translation.norm() - s.r_m) < 1e-12);
            if (!s.is_pole())
            {
                // probe +x lies in the plane of r_hat and global z
                const Eigen::Vector3d n = s.direction().cross(Eigen::Vector3d::UnitZ());
                CHECK(std::abs(n.normalized().dot(p.rotation.col(0))) < 1e-12);
            }
        }
}

TEST_CASE("compose_chain identities and product", "[geometry]")
{
    std::mt19937_64 rng(7);
    const Pose t = test::random_pose(rng);
    CHECK(compose_chain({}, t, {}).matrix().isApprox(t.matrix(), 1e-15));
    CHECK(compose_chain(t, {}, {}).matrix().isApprox(t.matrix(), 1e-15));

    // rotZ(90) then shift(1,0,0) as a 4x4 product, composed with shift(0,1,0).
    const auto base_m = test::matmul(test::to_mat4(Pose::rot_z(std::numbers::pi / 2)), test::to_mat4(Pose::shift(1, 0, 0)));
    const auto expected = test::matmul(base_m, test::to_mat4(Pose::shift(0, 1, 0)));
    CHECK(expected[0][3] == Approx(-1.0).margin(1e-15));
    CHECK(expected[1][3] == Approx(1.0).margin(1e-15));

    const Pose base = Pose::rot_z(std::numbers::pi / 2) * Pose::shift(1, 0, 0);
    const auto got = test::to_mat4(compose_chain(base, Pose::shift(0, 1, 0), {}));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(got[i][j] == Approx(expected[i][j]).margin(1e-15));
}

TEST_CASE("compose_chain matches the 4x4 oracle and is associative", "[geometry][property]")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial)
    {
        const Pose a = test::random_pose(rng), b = test::random_pose(rng), c = test::random_pose(rng);
        const Pose abc = compose_chain(a, b, c);
        CHECK(abc.is_valid());
        const auto oracle = test::matmul(test::matmul(test::to_mat4(a), test::to_mat4(b)), test::to_mat4(c));
        const auto got = test::to_mat4(abc);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(got[i][j] - oracle[i][j]) < 1e-12);
        CHECK(((a * b) * c).matrix().isApprox((a * (b * c)).matrix(), 1e-12));
        CHECK((((a * b) * c).matrix() - (a * (b * c)).matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pose_boresight_error", "[geometry]")
{
    SECTION("aimed away from the origin")
    {
        const Pose p = Pose::shift(0, 0, 0.1); // boresight +z, origin below
        CHECK(pose_boresight_error(p) == Approx(std::numbers::pi).margin(1e-12));
    }
    SECTION("offset rotation of 5 deg about probe x")
    {
        const auto tilt = Pose::rot_x(deg_to_rad(5.0));
        for (const auto &s : generate_grid({0, 70, 10, 30, 0.08}))
        {
            const auto p = compose_chain({}, spherical_to_pose(s), tilt);
            CHECK(std::abs(pose_boresight_error(p) - deg_to_rad(5.0)) < 1e-9);
        }
    }
    SECTION("degenerate")
    {
        CHECK_THROWS_AS(pose_boresight_error(Pose::identity()), DegenerateGeometry);
    }
}

TEST_CASE("closed-form grid size matches lattice enumeration", "[geometry][property]")
{
    std::mt19937_64 rng(99);
    const std::vector<int> phi_steps{5, 10, 15, 20, 30, 45, 60, 90, 120};
    for (int trial = 0; trial < 100; ++trial)
    {
        const int dtheta = std::uniform_int_distribution<int>(1, 30)(rng);
        const int max_k = 90 / dtheta;
        const int k0 = std::uniform_int_distribution<int>(0, max_k)(rng);
        const int k1 = std::uniform_int_distribution<int>(k0, max_k)(rng);
        const int dphi = phi_steps[std::uniform_int_distribution<std::size_t>(0, phi_steps.size() - 1)(rng)];
        const GridSpec g{double(k0 * dtheta), double(k1 * dtheta), double(dtheta), double(dphi), 0.1};

        std::size_t brute = 0;
        for (int th = 0; th <= 90; ++th)
            for (int ph = 0; ph < 360; ++ph)
            {
                const bool ring = th >= k0 * dtheta && th <= k1 * dtheta && (th - k0 * dtheta) % dtheta == 0;
                const bool az = th == 0 ? ph == 0 : ph % dphi == 0;
                brute += ring && az;
            }
        CHECK(grid_size(g) == brute);
        CHECK(generate_grid(g).size() == brute);
    }
}
