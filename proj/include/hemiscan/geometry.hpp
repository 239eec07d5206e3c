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

#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

// Coordinate conventions
// ----------------------
// DUT frame: origin at the DUT centre, boresight along +z (ISO physics
// convention). theta is the polar angle from +z, phi the azimuth from +x
// towards +y. Angles are degrees at every public boundary and radians
// internally. Lengths are metres.

namespace hemiscan
{
    constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
    constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    namespace detail
    {
        // True if `range` is an integer multiple of `step` up to rounding.
        inline bool is_multiple(double range, double step, long *count = nullptr)
        {
            const double n = range / step;
            const double rounded = std::round(n);
            const bool ok = std::abs(n - rounded) <= 1e-9 * std::max(1.0, std::abs(n));
            if (ok && count)
                *count = static_cast<long>(rounded);
            return ok;
        }

        inline double wrap_360(double deg)
        {
            double w = std::fmod(deg, 360.0);
            if (w < 0.0)
                w += 360.0;
            if (w >= 360.0) // fmod of -tiny can round up to 360
                w = 0.0;
            return w;
        }
    }

    // One observation direction on the scan hemisphere.
    struct SphericalSample
    {
        double phi_deg = 0.0;   // [0, 360)
        double theta_deg = 0.0; // [0, 90], 0 is boresight
        double r_m = 0.0;       // > 0

        // Validating constructor. Wraps phi into [0, 360) and canonicalises
        // the pole (theta = 0) to phi = 0.
        static SphericalSample make(double phi_deg, double theta_deg, double r_m)
        {
            if (!std::isfinite(phi_deg) || !std::isfinite(theta_deg) || !std::isfinite(r_m))
                throw InvalidSample("non-finite spherical coordinate");
            if (theta_deg < 0.0 || theta_deg > 90.0)
                throw InvalidSample("theta_deg " + std::to_string(theta_deg) + " outside [0, 90]");
            if (!(r_m > 0.0))
                throw InvalidSample("r_m must be > 0");
            SphericalSample s;
            s.theta_deg = theta_deg;
            s.phi_deg = theta_deg == 0.0 ? 0.0 : detail::wrap_360(phi_deg);
            s.r_m = r_m;
            return s;
        }

        bool is_pole() const { return theta_deg == 0.0; }

        // Unit vector from the DUT origin towards the sample.
        Eigen::Vector3d direction() const
        {
            const double th = deg_to_rad(theta_deg), ph = deg_to_rad(phi_deg);
            return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        }

        Eigen::Vector3d position() const { return r_m * direction(); }

        friend bool operator==(const SphericalSample &, const SphericalSample &) = default;
    };

    // Rigid transform. Columns of `rotation` are the local axes expressed in
    // the parent frame.
    struct Pose
    {
        Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
        Eigen::Vector3d translation = Eigen::Vector3d::Zero();

        static Pose identity() { return {}; }

        static Pose shift(double x, double y, double z)
        {
            Pose p;
            p.translation = {x, y, z};
            return p;
        }

        static Pose rotation_about(const Eigen::Vector3d &axis, double angle_rad)
        {
            Pose p;
            p.rotation = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
            return p;
        }

        static Pose rot_x(double angle_rad) { return rotation_about(Eigen::Vector3d::UnitX(), angle_rad); }
        static Pose rot_y(double angle_rad) { return rotation_about(Eigen::Vector3d::UnitY(), angle_rad); }
        static Pose rot_z(double angle_rad) { return rotation_about(Eigen::Vector3d::UnitZ(), angle_rad); }

        // Rotation vector (axis scaled by angle in radians) plus translation.
        static Pose from_rotation_vector(const Eigen::Vector3d &rotvec, const Eigen::Vector3d &t)
        {
            Pose p;
            const double angle = rotvec.norm();
            if (angle > 0.0)
                p.rotation = Eigen::AngleAxisd(angle, rotvec / angle).toRotationMatrix();
            p.translation = t;
            return p;
        }

        // Probe boresight = local +z.
        Eigen::Vector3d boresight() const { return rotation.col(2); }

        Pose inverse() const
        {
            Pose p;
            p.rotation = rotation.transpose();
            p.translation = -(p.rotation * translation);
            return p;
        }

        Eigen::Matrix4d matrix() const
        {
            Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
            m.topLeftCorner<3, 3>() = rotation;
            m.topRightCorner<3, 1>() = translation;
            return m;
        }

        // Orthonormal with det +1 within `tol`.
        bool is_valid(double tol = 1e-9) const
        {
            if (!rotation.allFinite() || !translation.allFinite())
                return false;
            const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
            return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
        }

        // this ∘ rhs: apply rhs first, then this.
        Pose operator*(const Pose &rhs) const
        {
            Pose p;
            p.rotation = rotation * rhs.rotation;
            p.translation = rotation * rhs.translation + translation;
            return p;
        }

        friend bool operator==(const Pose &a, const Pose &b)
        {
            return a.rotation == b.rotation && a.translation == b.translation;
        }
    };

    // Angular sampling lattice of a constant-radius hemispherical scan.
    struct GridSpec
    {
        double theta_min_deg = 0.0;
        double theta_max_deg = 70.0;
        double theta_step_deg = 10.0;
        double phi_step_deg = 10.0;
        double radius_m = 0.08;

        friend bool operator==(const GridSpec &, const GridSpec &) = default;
    };

    // Throws InvalidGrid describing the first violated rule.
    inline void validate(const GridSpec &g)
    {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(g.theta_min_deg) || !finite(g.theta_max_deg) || !finite(g.theta_step_deg) ||
            !finite(g.phi_step_deg) || !finite(g.radius_m))
            throw InvalidGrid("non-finite grid parameter");
        if (g.theta_min_deg < 0.0 || g.theta_max_deg > 90.0)
            throw InvalidGrid("theta range must lie within [0, 90] deg");
        // theta_min == theta_max is accepted as a single ring (or the pole).
        if (g.theta_min_deg > g.theta_max_deg)
            throw InvalidGrid("theta_min_deg exceeds theta_max_deg");
        if (!(g.theta_step_deg > 0.0) || !(g.phi_step_deg > 0.0))
            throw InvalidGrid("angular steps must be > 0");
        if (!(g.radius_m > 0.0))
            throw InvalidGrid("radius_m must be > 0");
        if (!detail::is_multiple(g.theta_max_deg - g.theta_min_deg, g.theta_step_deg))
            throw InvalidGrid("theta_step_deg does not divide the theta range");
        if (!detail::is_multiple(360.0, g.phi_step_deg))
            throw InvalidGrid("phi_step_deg does not divide 360");
    }

    inline long phi_count(const GridSpec &g)
    {
        long n = 0;
        detail::is_multiple(360.0, g.phi_step_deg, &n);
        return n;
    }

    // Closed-form number of samples produced by generate_grid.
    inline std::size_t grid_size(const GridSpec &g)
    {
        validate(g);
        long steps = 0;
        detail::is_multiple(g.theta_max_deg - g.theta_min_deg, g.theta_step_deg, &steps);
        const bool has_pole = g.theta_min_deg == 0.0;
        const long rings = steps + 1 - (has_pole ? 1 : 0);
        return static_cast<std::size_t>((has_pole ? 1 : 0) + rings * phi_count(g));
    }

    // Lattice samples ordered by ascending theta. Azimuth meanders between
    // rings (ascending on the first ring, descending on the next, ...).
    inline std::vector<SphericalSample> generate_grid(const GridSpec &g)
    {
        validate(g);
        long steps = 0;
        detail::is_multiple(g.theta_max_deg - g.theta_min_deg, g.theta_step_deg, &steps);
        const long n_phi = phi_count(g);

        std::vector<SphericalSample> out;
        out.reserve(grid_size(g));
        long ring = 0;
        for (long k = 0; k <= steps; ++k)
        {
            const double theta = g.theta_min_deg + static_cast<double>(k) * g.theta_step_deg;
            if (theta == 0.0)
            {
                out.push_back({0.0, 0.0, g.radius_m});
                continue;
            }
            const bool ascending = (ring++ % 2) == 0;
            for (long j = 0; j < n_phi; ++j)
            {
                const long idx = ascending ? j : n_phi - 1 - j;
                out.push_back({static_cast<double>(idx) * g.phi_step_deg, theta, g.radius_m});
            }
        }
        return out;
    }

    // Probe pose relative to the DUT for one sample. The probe sits at the
    // sample point with local +z along -r_hat (aimed at the origin) and local
    // +x along theta_hat, which lies in the plane of r_hat and global +z. At
    // the pole theta_hat(phi = 0) = global +x, which fixes the roll there.
    inline Pose spherical_to_pose(const SphericalSample &s)
    {
        if (!(s.r_m > 0.0) || s.theta_deg < 0.0 || s.theta_deg > 90.0)
            throw InvalidSample("invalid spherical sample");
        const double phi = s.is_pole() ? 0.0 : deg_to_rad(s.phi_deg);
        const double th = deg_to_rad(s.theta_deg);
        const double st = std::sin(th), ct = std::cos(th), sp = std::sin(phi), cp = std::cos(phi);

        const Eigen::Vector3d r_hat(st * cp, st * sp, ct);
        const Eigen::Vector3d theta_hat(ct * cp, ct * sp, -st);
        const Eigen::Vector3d phi_hat(-sp, cp, 0.0);

        Pose p;
        p.rotation.col(0) = theta_hat;
        p.rotation.col(1) = -phi_hat;
        p.rotation.col(2) = -r_hat;
        p.translation = s.r_m * r_hat;
        return p;
    }

    // T_final = T_base ∘ T_sample ∘ T_offset.
    inline Pose compose_chain(const Pose &t_base, const Pose &t_sample, const Pose &t_offset)
    {
        return t_base * t_sample * t_offset;
    }

    // Angle in radians between the probe boresight and the line of sight from
    // the probe position to `target`.
    inline double pose_boresight_error(const Pose &pose, const Eigen::Vector3d &target = Eigen::Vector3d::Zero())
    {
        const Eigen::Vector3d los = target - pose.translation;
        if (los.norm() == 0.0)
            throw DegenerateGeometry("probe position coincides with the target");
        const Eigen::Vector3d b = pose.boresight();
        return std::atan2(b.cross(los).norm(), b.dot(los));
    }
}
