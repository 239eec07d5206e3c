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
#include "hemiscan/geometry.hpp"
#include "hemiscan/powermap.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <variant>

namespace hemiscan
{
    constexpr double speed_of_light = 299792458.0;

    // Analytic DUT patterns, boresight along +z.
    struct Isotropic
    {
        friend bool operator==(const Isotropic &, const Isotropic &) = default;
    };

    // D = 2 (q + 1) cos^q(theta) over the front hemisphere, 0 behind.
    struct CosQ
    {
        double q = 2.0;
        friend bool operator==(const CosQ &, const CosQ &) = default;
    };

    // Uniformly illuminated a x b aperture (a along x, b along y):
    // D = 4 pi a b / lambda^2 * [sinc(u) sinc(v)]^2,
    // u = pi a / lambda sin(theta) cos(phi), v = pi b / lambda sin(theta) sin(phi).
    struct RectAperture
    {
        double a_m = 0.01;
        double b_m = 0.01;
        friend bool operator==(const RectAperture &, const RectAperture &) = default;
    };

    using PatternModel = std::variant<Isotropic, CosQ, RectAperture>;

    inline std::string describe(const PatternModel &p)
    {
        return std::visit(
            [](const auto &m) -> std::string {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, Isotropic>)
                    return "isotropic";
                else if constexpr (std::is_same_v<T, CosQ>)
                    return "cos_q q=" + detail::num(m.q);
                else
                    return "uniform_rect_aperture a_m=" + detail::num(m.a_m) + " b_m=" + detail::num(m.b_m);
            },
            p);
    }

    // Linear directivity at polar angle theta and azimuth phi (radians).
    inline double directivity(const PatternModel &p, double theta_rad, double phi_rad, double wavelength_m)
    {
        const double pi = std::numbers::pi;
        const bool front = theta_rad <= pi / 2.0;
        return std::visit(
            [&](const auto &m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, Isotropic>)
                    return 1.0;
                else if constexpr (std::is_same_v<T, CosQ>)
                    return front ? 2.0 * (m.q + 1.0) * std::pow(std::cos(theta_rad), m.q) : 0.0;
                else
                {
                    if (!front)
                        return 0.0;
                    auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
                    const double st = std::sin(theta_rad);
                    const double u = pi * m.a_m / wavelength_m * st * std::cos(phi_rad);
                    const double v = pi * m.b_m / wavelength_m * st * std::sin(phi_rad);
                    const double f = sinc(u) * sinc(v);
                    return 4.0 * pi * m.a_m * m.b_m / (wavelength_m * wavelength_m) * f * f;
                }
            },
            p);
    }

    struct SimScene
    {
        PatternModel pattern = CosQ{2.0};
        double tx_power_dbm = 0.0;
        double ripple_amplitude_db = 0.0;
        double ripple_period_deg = 30.0;
        double noise_sigma_db = 0.0;
        double jitter_sigma_m = 0.0; // per-axis positioning error, 1 sigma
        std::uint64_t seed = 1;

        friend bool operator==(const SimScene &, const SimScene &) = default;
    };

    inline std::vector<std::string> check(const SimScene &s)
    {
        std::vector<std::string> problems;
        if (!(s.ripple_amplitude_db >= 0.0))
            problems.push_back("ripple_amplitude_db must be >= 0");
        if (!(s.ripple_period_deg > 0.0))
            problems.push_back("ripple_period_deg must be > 0");
        if (!(s.noise_sigma_db >= 0.0))
            problems.push_back("noise_sigma_db must be >= 0");
        if (!(s.jitter_sigma_m >= 0.0))
            problems.push_back("jitter_sigma_m must be >= 0");
        if (const auto *c = std::get_if<CosQ>(&s.pattern); c && !(c->q >= 0.0))
            problems.push_back("cos_q exponent must be >= 0");
        if (const auto *a = std::get_if<RectAperture>(&s.pattern); a && !(a->a_m > 0.0 && a->b_m > 0.0))
            problems.push_back("aperture dimensions must be > 0");
        return problems;
    }

    inline std::string describe(const SimScene &s)
    {
        return "sim pattern=" + describe(s.pattern) + " tx_power_dbm=" + detail::num(s.tx_power_dbm) +
               " ripple_amplitude_db=" + detail::num(s.ripple_amplitude_db) +
               " ripple_period_deg=" + detail::num(s.ripple_period_deg) +
               " noise_sigma_db=" + detail::num(s.noise_sigma_db) +
               " jitter_sigma_m=" + detail::num(s.jitter_sigma_m) + " seed=" + std::to_string(s.seed);
    }

    // Floor applied to pattern nulls so readings stay finite (-120 dB).
    constexpr double directivity_floor = 1e-12;

    // Deterministic received power at polar angle theta, azimuth phi (radians)
    // and range r: EIRP through the pattern, Friis spreading and the
    // multipath ripple term.
    inline double analytic_power_dbm(const SimScene &s, double theta_rad, double phi_rad, double r_m,
                                     double frequency_hz)
    {
        const double lambda = speed_of_light / frequency_hz;
        const double d = std::max(directivity(s.pattern, theta_rad, phi_rad, lambda), directivity_floor);
        const double friis = 20.0 * std::log10(lambda / (4.0 * std::numbers::pi * r_m));
        const double ripple = s.ripple_amplitude_db == 0.0
                                  ? 0.0
                                  : s.ripple_amplitude_db *
                                        std::sin(2.0 * std::numbers::pi * rad_to_deg(theta_rad) / s.ripple_period_deg +
                                                 phi_rad);
        return s.tx_power_dbm + 10.0 * std::log10(d) + friis + ripple;
    }

    inline double analytic_power_dbm(const SimScene &s, const SphericalSample &p, double frequency_hz)
    {
        return analytic_power_dbm(s, deg_to_rad(p.theta_deg), deg_to_rad(p.phi_deg), p.r_m, frequency_hz);
    }

    // Same closed form at a DUT-frame position. The pole maps to phi = 0.
    inline double analytic_power_dbm(const SimScene &s, const Eigen::Vector3d &pos, double frequency_hz)
    {
        const double rho = std::hypot(pos.x(), pos.y());
        const double theta = std::atan2(rho, pos.z());
        const double phi = rho == 0.0 ? 0.0 : std::atan2(pos.y(), pos.x());
        return analytic_power_dbm(s, theta, phi, pos.norm(), frequency_hz);
    }

    using SimRng = std::mt19937_64;

    // Per-axis Gaussian displacement with sigma jitter_sigma_m. No draws are
    // consumed when sigma is zero.
    inline Eigen::Vector3d draw_jitter(const SimScene &s, SimRng &rng)
    {
        if (s.jitter_sigma_m == 0.0)
            return Eigen::Vector3d::Zero();
        std::normal_distribution<double> n(0.0, s.jitter_sigma_m);
        const double x = n(rng), y = n(rng), z = n(rng);
        return {x, y, z};
    }

    inline double draw_noise(const SimScene &s, SimRng &rng)
    {
        if (s.noise_sigma_db == 0.0)
            return 0.0;
        std::normal_distribution<double> n(0.0, s.noise_sigma_db);
        return n(rng);
    }

    // Full stochastic observation of one sample: jittered position, then the
    // closed form plus measurement noise.
    inline double received_power_dbm(const SimScene &s, const SphericalSample &p, double frequency_hz, SimRng &rng)
    {
        if (s.jitter_sigma_m == 0.0)
            return analytic_power_dbm(s, p, frequency_hz) + draw_noise(s, rng);
        const Eigen::Vector3d pos = p.position() + draw_jitter(s, rng);
        return analytic_power_dbm(s, pos, frequency_hz) + draw_noise(s, rng);
    }

    // Direct closed-form evaluation over a whole grid (no impairments except
    // the deterministic ripple). Serves as the reference map.
    inline PowerMap reference_map(const SimScene &s, const GridSpec &grid, double frequency_hz,
                                  Timestamp created_at = {})
    {
        PowerMap m;
        m.metadata.frequency_hz = frequency_hz;
        m.metadata.grid = grid;
        m.metadata.source = "analytic " + describe(s);
        m.metadata.scan_id = "reference";
        m.metadata.created_at = created_at;
        for (const auto &p : generate_grid(grid))
            m.records.push_back(
                {p.phi_deg, p.theta_deg, p.r_m, analytic_power_dbm(s, p, frequency_hz), RecordStatus::ok, created_at});
        return m;
    }

    namespace detail
    {
        struct SimShared
        {
            SimScene scene;
            Pose t_base;
            Pose t_offset;
            SimRng rng;
            Pose achieved;
        };
    }

    class SimPositioner final : public PositionerPort
    {
    public:
        explicit SimPositioner(std::shared_ptr<detail::SimShared> st) : st_(std::move(st)) {}

        ArrivalReport move_to(const Pose &commanded) override
        {
            Pose p = commanded;
            p.translation += draw_jitter(st_->scene, st_->rng);
            st_->achieved = p;
            return {p, true};
        }

        void home() override { st_->achieved = st_->t_base * Pose::shift(0.0, 0.0, 0.5) * st_->t_offset; }

        double repeatability_m() const override { return 3.0 * st_->scene.jitter_sigma_m; }

    private:
        std::shared_ptr<detail::SimShared> st_;
    };

    // Evaluates the scene at the positioner's achieved pose.
    class SimPowerSensor final : public PowerSensorPort
    {
    public:
        explicit SimPowerSensor(std::shared_ptr<detail::SimShared> st) : st_(std::move(st)) {}

        double read_power(double frequency_hz) override
        {
            const Pose probe = st_->t_base.inverse() * st_->achieved * st_->t_offset.inverse();
            return analytic_power_dbm(st_->scene, probe.translation, frequency_hz) + draw_noise(st_->scene, st_->rng);
        }

    private:
        std::shared_ptr<detail::SimShared> st_;
    };

    struct SimPorts
    {
        std::unique_ptr<SimPositioner> positioner;
        std::unique_ptr<SimPowerSensor> sensor;
    };

    // Both ports share one seeded stream; they belong to one scan session.
    inline SimPorts make_sim_ports(const SimScene &scene, const Pose &t_base = {}, const Pose &t_offset = {})
    {
        auto st = std::make_shared<detail::SimShared>();
        st->scene = scene;
        st->t_base = t_base;
        st->t_offset = t_offset;
        st->rng.seed(scene.seed);
        return {std::make_unique<SimPositioner>(st), std::make_unique<SimPowerSensor>(st)};
    }
}
