#include "dtwin/plant.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace dtwin {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kKmhToMps = 1.0 / 3.6;

void validate(const PlantParams& p) {
    if (p.m_s <= 0.0 || p.m_u <= 0.0) {
        throw validation_error("masses must be strictly positive");
    }
    if (p.k_s <= 0.0 || p.k_t <= 0.0) {
        throw validation_error("stiffnesses must be strictly positive");
    }
    if (!(p.k_d_max > p.k_d_min && p.k_d_min > 0.0)) {
        throw validation_error("damping bounds must satisfy k_d_max > k_d_min > 0");
    }
    if (p.I_max <= p.I_min) {
        throw validation_error("current bounds must satisfy I_max > I_min");
    }
    if (p.dt <= 0.0) {
        throw validation_error("integration step dt must be positive");
    }
    if (p.sensor_noise_sd < 0.0) {
        throw validation_error("sensor noise sd must be non-negative");
    }
    if (p.damper_comp_scale <= 0.0 || p.damper_reb_scale <= 0.0) {
        throw validation_error("damper slope scales must be strictly positive");
    }
}

// State layout: [z_s, z_u, v_s, v_u] (positions in m, velocities in m/s).
Eigen::Vector4d deriv(const Eigen::Vector4d& s, double t, double k_d, double v_mps,
                      const TestRunSpec& spec, const PlantParams& p) {
    const double z_s = s[0];
    const double z_u = s[1];
    const double v_s = s[2];
    const double v_u = s[3];

    const double z_r = spec.profile.kind == RoadKind::cosine_bump
                           ? road_height(v_mps * t, spec.profile)
                           : 0.0;
    const double f_ext = body_force(t, spec.profile);

    const double v_rel = v_s - v_u;
    const double f_d =
        k_d * (v_rel < 0.0 ? p.damper_comp_scale * v_rel : p.damper_reb_scale * v_rel);

    const double spring = p.k_s * (z_s - z_u);
    const double f_s = -spring - f_d + f_ext;
    const double f_u = spring + f_d - p.k_t * (z_u - z_r);

    return {v_s, v_u, f_s / p.m_s, f_u / p.m_u};
}

// Noiseless rod-displacement trace in mm, sampled at t = k*dt before each
// step. Optionally records the full state row per sample into states_out.
std::vector<double> integrate(const TestRunSpec& spec, const PlantParams& p,
                              const Eigen::Vector4d& initial_state,
                              Eigen::MatrixXd* states_out = nullptr) {
    validate(p);
    const double k_d = damping_coefficient(spec.I, p);
    const double v_mps = spec.V * kKmhToMps;
    const auto n = static_cast<std::size_t>(std::llround(spec.duration / p.dt));
    if (n == 0) {
        throw validation_error("run duration shorter than one integration step");
    }

    std::vector<double> disp(n);
    if (states_out != nullptr) {
        states_out->resize(static_cast<Eigen::Index>(n), 4);
    }
    Eigen::Vector4d state = initial_state;
    const double dt = p.dt;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        disp[k] = (state[0] - state[1]) * 1000.0;
        if (states_out != nullptr) {
            states_out->row(static_cast<Eigen::Index>(k)) = state.transpose();
        }
        if (!state.allFinite()) {
            throw std::runtime_error("non-finite state at step " + std::to_string(k) +
                                     " (run " + std::to_string(spec.run_id) + ")");
        }
        const Eigen::Vector4d k1 = deriv(state, t, k_d, v_mps, spec, p);
        const Eigen::Vector4d k2 =
            deriv(state + 0.5 * dt * k1, t + 0.5 * dt, k_d, v_mps, spec, p);
        const Eigen::Vector4d k3 =
            deriv(state + 0.5 * dt * k2, t + 0.5 * dt, k_d, v_mps, spec, p);
        const Eigen::Vector4d k4 = deriv(state + dt * k3, t + dt, k_d, v_mps, spec, p);
        state += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return disp;
}

}  // namespace

const char* road_kind_name(RoadKind k) {
    switch (k) {
        case RoadKind::cosine_bump: return "cosine-bump";
        case RoadKind::flat: return "flat";
        case RoadKind::stationary_force: return "stationary-force";
    }
    throw validation_error("invalid road kind value");
}

RoadKind road_kind_from_name(const std::string& name) {
    if (name == "cosine-bump") return RoadKind::cosine_bump;
    if (name == "flat") return RoadKind::flat;
    if (name == "stationary-force") return RoadKind::stationary_force;
    throw validation_error("unknown road kind: '" + name + "'");
}

double road_height(double x, const RoadProfile& profile) {
    if (profile.kind != RoadKind::cosine_bump) {
        return 0.0;
    }
    const double u = x - kBumpStartM;
    if (u <= 0.0) return 0.0;
    if (u >= profile.bump_length) return profile.bump_height;
    return 0.5 * profile.bump_height * (1.0 - std::cos(kPi * u / profile.bump_length));
}

double body_force(double t, const RoadProfile& profile) {
    if (profile.kind != RoadKind::stationary_force || t < kPulseStartS) {
        return 0.0;
    }
    const double tp = std::fmod(t - kPulseStartS, kPulsePeriodS);
    if (tp <= kPulseDurationS) {
        return -0.5 * profile.force_amplitude * (1.0 - std::cos(2.0 * kPi * tp / kPulseDurationS));
    }
    return 0.0;
}

double damping_coefficient(double I, const PlantParams& params) {
    if (I < params.I_min || I > params.I_max) {
        throw validation_error("current " + format_double(I) + " A outside [" +
                               format_double(params.I_min) + ", " + format_double(params.I_max) +
                               "] A");
    }
    return params.k_d_min +
           (params.k_d_max - params.k_d_min) * (I - params.I_min) / (params.I_max - params.I_min);
}

std::vector<double> simulate_run_noiseless(const TestRunSpec& spec, const PlantParams& params) {
    return integrate(spec, params, Eigen::Vector4d::Zero());
}

Eigen::MatrixXd simulate_run_states(const TestRunSpec& spec, const PlantParams& params,
                                    const Eigen::Vector4d& initial_state) {
    Eigen::MatrixXd states;
    (void)integrate(spec, params, initial_state, &states);
    return states;
}

std::vector<RawRecord> simulate_run(const TestRunSpec& spec, const PlantParams& params,
                                    std::uint64_t seed) {
    if (spec.profile.bump_height < 0.0 || spec.profile.bump_length <= 0.0) {
        throw validation_error("bump_height must be >= 0 and bump_length > 0");
    }
    std::vector<double> disp = integrate(spec, params, Eigen::Vector4d::Zero());

    if (params.sensor_noise_sd > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, params.sensor_noise_sd);
        for (double& d : disp) d += noise(rng);
    }

    const auto n = disp.size();
    std::vector<RawRecord> records(n);
    for (std::size_t k = 0; k < n; ++k) {
        RawRecord& rec = records[k];
        rec.t = static_cast<double>(k) * params.dt;
        rec.run_id = spec.run_id;
        rec.V = spec.V;
        rec.I = spec.I;
        rec.displacement = disp[k];
        rec.delta_displacement = k == 0 ? 0.0 : disp[k] - disp[k - 1];
    }
    return records;
}

RawDataset generate_program(const std::vector<TestRunSpec>& specs, const PlantParams& params,
                            std::uint64_t seed) {
    if (specs.empty()) {
        throw validation_error("test program is empty");
    }
    std::vector<TestRunSpec> ordered = specs;
    std::sort(ordered.begin(), ordered.end(),
              [](const TestRunSpec& a, const TestRunSpec& b) { return a.run_id < b.run_id; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i].run_id == ordered[i - 1].run_id) {
            throw validation_error("duplicate run_id " + std::to_string(ordered[i].run_id) +
                                   " in test program");
        }
    }

    RawDataset data;
    for (const TestRunSpec& spec : ordered) {
        // Per-run derived seed keeps runs independent yet reproducible.
        const std::uint64_t run_seed = seed * 1000 + static_cast<std::uint64_t>(spec.run_id);
        std::vector<RawRecord> records = simulate_run(spec, params, run_seed);
        data.records.insert(data.records.end(), records.begin(), records.end());
    }
    return data;
}

std::vector<TestRunSpec> default_program() {
    constexpr std::array<double, 4> currents{0.4, 1.0, 1.2, 1.5};
    constexpr std::array<double, 3> velocities{10.0, 15.0, 20.0};

    std::vector<TestRunSpec> program;
    program.reserve(14);
    int run_id = 1;
    for (double V : velocities) {
        for (double I : currents) {
            program.push_back({run_id++, I, V, 12.0, RoadProfile{}});
        }
    }
    RoadProfile stationary;
    stationary.kind = RoadKind::stationary_force;
    program.push_back({13, 0.4, 0.0, 12.0, stationary});
    program.push_back({14, 1.6, 25.0, 12.0, RoadProfile{}});
    return program;
}

}  // namespace dtwin
