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

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hemiscan
{
    // Axis-aligned box in the DUT frame, metres.
    struct Aabb
    {
        Eigen::Vector3d min = Eigen::Vector3d::Zero();
        Eigen::Vector3d max = Eigen::Vector3d::Zero();

        static Aabb cube(double half) { return {Eigen::Vector3d::Constant(-half), Eigen::Vector3d::Constant(half)}; }

        // Strictly inside the box grown by `margin` on every face.
        bool contains(const Eigen::Vector3d &p, double margin = 0.0) const
        {
            for (int i = 0; i < 3; ++i)
                if (!(p[i] > min[i] - margin && p[i] < max[i] + margin))
                    return false;
            return true;
        }

        friend bool operator==(const Aabb &a, const Aabb &b) { return a.min == b.min && a.max == b.max; }
    };

    struct WorkspaceGeometry
    {
        Aabb dut_box = Aabb::cube(0.02);
        double table_plane_z = -0.01; // z below table_plane_z + clearance is forbidden
        std::vector<Aabb> keep_out_boxes;
        double clearance_m = 0.005;

        // DUT in a 4 cm cube standing 1 cm above the table, 5 mm clearance.
        static WorkspaceGeometry default_bench() { return {}; }

        friend bool operator==(const WorkspaceGeometry &, const WorkspaceGeometry &) = default;
    };

    inline void validate(const WorkspaceGeometry &ws)
    {
        if (!(ws.clearance_m >= 0.0))
            throw InvalidWorkspace("workspace clearance_m must be >= 0");
        if (!ws.dut_box.contains(Eigen::Vector3d::Zero()))
            throw InvalidWorkspace("workspace dut_box must contain the origin");
    }

    // Empty reason means clear.
    struct CollisionVerdict
    {
        std::string reason;

        bool clear() const { return reason.empty(); }
        explicit operator bool() const { return clear(); }
    };

    // Point-probe check of a DUT-frame pose against the inflated obstacles.
    inline CollisionVerdict collision_check(const Pose &pose, const WorkspaceGeometry &ws)
    {
        const Eigen::Vector3d &p = pose.translation;
        const double c = ws.clearance_m;
        if (ws.dut_box.contains(p, c))
            return {"dut_box"};
        if (p.z() < ws.table_plane_z + c)
            return {"table"};
        for (std::size_t i = 0; i < ws.keep_out_boxes.size(); ++i)
            if (ws.keep_out_boxes[i].contains(p, c))
                return {"keep_out[" + std::to_string(i) + "]"};
        return {};
    }

    struct PlanEntry
    {
        std::size_t index = 0;  // position in the input grid
        SphericalSample sample;
        Pose probe_in_dut;      // T_sample ∘ T_offset, the collision-checked pose
        Pose commanded;         // T_final, handed to the positioner
    };

    struct SkippedSample
    {
        std::size_t index = 0;
        SphericalSample sample;
        std::string reason;
    };

    struct ScanPlan
    {
        std::vector<PlanEntry> entries;
        std::vector<SkippedSample> skipped;
        Pose t_base;
        Pose t_offset;

        std::size_t grid_size() const { return entries.size() + skipped.size(); }

        double coverage() const
        {
            const auto n = grid_size();
            return n == 0 ? 0.0 : static_cast<double>(entries.size()) / static_cast<double>(n);
        }
    };

    // Evaluates every grid sample through the transform chain and partitions
    // them into reachable entries and skipped samples. Samples keep the grid
    // order. Throws EmptyPlan when nothing is reachable.
    inline ScanPlan plan_scan(const std::vector<SphericalSample> &grid, const Pose &t_base, const Pose &t_offset,
                              const WorkspaceGeometry &ws)
    {
        if (grid.empty())
            throw EmptyPlan("input grid is empty");
        validate(ws);
        ScanPlan plan;
        plan.t_base = t_base;
        plan.t_offset = t_offset;
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            const Pose t_sample = spherical_to_pose(grid[i]);
            const Pose t_final = compose_chain(t_base, t_sample, t_offset);
            // Obstacles live in the DUT frame.
            const Pose in_dut = t_sample * t_offset;
            const auto verdict = collision_check(in_dut, ws);
            if (verdict)
                plan.entries.push_back({i, grid[i], in_dut, t_final});
            else
                plan.skipped.push_back({i, grid[i], verdict.reason});
        }
        if (plan.entries.empty())
            throw EmptyPlan("all " + std::to_string(grid.size()) + " samples violate the workspace clearance");
        return plan;
    }
}
