#pragma once

// Quarter-car plant simulator: generates surrogate sensor datasets by driving
// a 2-DOF vertical-dynamics model with a current-controlled semi-active
// damper over a road obstacle (or exciting it with a body-force pulse while
// standing), executing the 14-run test program.

#include "dtwin/dataset.hpp"

#include <cstdint>
#include <vector>

namespace dtwin {

// Physical and numerical parameters of the quarter-car model.
//
// The damper force is F_D = k_D(I) * f(v_rel) with v_rel = dz_s/dt - dz_u/dt
// and f a piecewise-linear curve: slope scale damper_comp_scale for
// compression (v_rel < 0) and damper_reb_scale for rebound (v_rel >= 0).
// With both scales at 1 the damper is linear in relative velocity.
struct PlantParams {
    double m_s = 475.0;     // sprung (body corner) mass, kg
    double m_u = 45.0;      // unsprung (wheel) mass, kg
    double k_s = 30000.0;   // suspension spring stiffness, N/m
    double k_t = 250000.0;  // tire stiffness, N/m

    double k_d_min = 800.0;   // damping coefficient at I_min, N*s/m
    double k_d_max = 4000.0;  // damping coefficient at I_max, N*s/m
    double I_min = 0.0;       // valve current bounds, A
    double I_max = 1.6;

    double dt = 0.001;             // integration step, s (1 kHz sampling)
    double sensor_noise_sd = 0.02; // additive displacement sensor noise, mm

    double damper_comp_scale = 1.0;  // f slope scale, compression branch
    double damper_reb_scale = 1.0;   // f slope scale, rebound branch
};

enum class RoadKind { cosine_bump, flat, stationary_force };

[[nodiscard]] const char* road_kind_name(RoadKind k);
[[nodiscard]] RoadKind road_kind_from_name(const std::string& name);

// Road excitation for one run. The cosine-bump profile is a half-cosine ramp
// from road level up to bump_height over bump_length, placed kBumpStartM
// metres ahead of the start position; the surface stays at bump_height after
// the ramp (a smoothed curb edge). The stationary-force profile keeps the
// road flat and applies periodic downward force pulses of force_amplitude to
// the body instead.
struct RoadProfile {
    RoadKind kind = RoadKind::cosine_bump;
    double bump_height = 0.05;       // m
    double bump_length = 0.5;        // m
    double force_amplitude = 1500.0; // N (stationary-force runs)
};

// One row of the test program.
struct TestRunSpec {
    int run_id = 0;
    double I = 0.0;         // commanded valve current, A
    double V = 0.0;         // vehicle velocity, km/h
    double duration = 12.0; // s
    RoadProfile profile{};
};

// Placement of the bump edge along the road, m from the run start position.
inline constexpr double kBumpStartM = 1.0;

// Body-force pulse train used by stationary runs: half-period raised-cosine
// pulses of kPulseDurationS every kPulsePeriodS, starting at kPulseStartS.
inline constexpr double kPulseStartS = 1.0;
inline constexpr double kPulsePeriodS = 2.0;
inline constexpr double kPulseDurationS = 0.4;

// Road height under the wheel at longitudinal position x (m).
[[nodiscard]] double road_height(double x, const RoadProfile& profile);

// External vertical body force at time t (s) for a stationary-force run.
[[nodiscard]] double body_force(double t, const RoadProfile& profile);

// Linear current-to-damping map:
// k_D = k_d_min + (k_d_max - k_d_min) * (I - I_min) / (I_max - I_min).
// Rejects currents outside [I_min, I_max].
[[nodiscard]] double damping_coefficient(double I, const PlantParams& params);

// Integrates the 4-state quarter-car ODE with fixed-step RK4 at params.dt,
// records rod displacement (z_s - z_u) in mm plus seeded Gaussian sensor
// noise, and derives per-sample deltas (first sample of a run has delta 0).
// Deterministic for a fixed (spec, params, seed).
[[nodiscard]] std::vector<RawRecord> simulate_run(const TestRunSpec& spec,
                                                  const PlantParams& params, std::uint64_t seed);

// Noiseless displacement trace in mm (oracle hook for convergence checks).
[[nodiscard]] std::vector<double> simulate_run_noiseless(const TestRunSpec& spec,
                                                         const PlantParams& params);

// Noiseless state trajectory, one row [z_s, z_u, v_s, v_u] per sample instant,
// started from initial_state (oracle hook for dissipation checks).
[[nodiscard]] Eigen::MatrixXd simulate_run_states(
    const TestRunSpec& spec, const PlantParams& params,
    const Eigen::Vector4d& initial_state = Eigen::Vector4d::Zero());

// Runs every spec with a per-run derived seed and concatenates the records in
// ascending run_id order. Rejects duplicate run ids and empty programs.
[[nodiscard]] RawDataset generate_program(const std::vector<TestRunSpec>& specs,
                                          const PlantParams& params, std::uint64_t seed);

// The default 14-run test program: a 4-current x 3-velocity grid (runs 1-12),
// a stationary force-pulse run at 0.4 A (run 13), and a max-current run at
// 25 km/h (run 14); 12 s per run.
[[nodiscard]] std::vector<TestRunSpec> default_program();

}  // namespace dtwin
