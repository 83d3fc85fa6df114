#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fimstar/common.hpp"
#include "fimstar/geometry.hpp"

namespace fimstar {

// Full description of one simulation scenario: network dimensions, node
// placement, power model, reward weights, agent hyper-parameters and run
// control. Defaults follow the standard parameter table (8 users, M = 2,
// K_RIS = 16, N = 4, P_max = 0.5 W, batch 32, gamma 0.99, tau 0.01,
// learning rates 1e-3, replay capacity 1e6, 6000 episodes).
struct ScenarioConfig {
    // system
    int users_t = 4;
    int users_r = 4;
    int subcarriers = 4;
    int bs_elements_x = 2;
    int bs_elements_z = 1;
    int ris_elements_x = 4;
    int ris_elements_z = 4;
    int u_max = 2;
    double p_max_w = 0.5;
    double noise_dbm_per_hz = -170.0;
    double bandwidth_hz = 1.0e7;
    double carrier_frequency_hz = 2.4e9;
    double element_spacing_m = 0.05;
    double morph_range_wavelengths = 0.5;  // Delta_y in carrier wavelengths
    int paths = 4;                         // P

    // placement (meters; BS at the origin, users on the ground plane z = 0)
    std::array<double, 3> ris_position_m{30.0, 0.0, 5.0};
    std::array<double, 3> user_disc_center_m{40.0, 0.0, 0.0};
    double user_disc_radius_m = 10.0;
    double pathloss_ref_db = -30.0;  // C_0 at 1 m
    double pathloss_exp_direct = 3.5;
    double pathloss_exp_ris = 2.2;

    // power model
    double bs_static_dbm = 30.0;
    double ris_static_w = 0.1;
    double ris_per_element_w = 0.33e-3;
    double amp_efficiency = 0.8;

    // reward
    std::array<double, 5> reward_nu{0.6, 0.1, 0.1, 0.1, 0.1};

    // agent
    int batch_size = 32;
    double discount = 0.99;
    double soft_tau = 0.01;
    double lr_actor = 1e-3;
    double lr_critic = 1e-3;
    double lr_meta = 0.3;
    double entropy_weight = 0.2;
    double grad_clip = 5.0;  // critic global-norm clip; 0 disables
    std::uint64_t replay_capacity = 1000000;
    std::vector<int> actor_hidden{256, 256};
    std::vector<int> critic_hidden{256, 256};
    std::vector<int> meta_hidden{64, 64};

    // run control
    int episodes = 6000;
    int steps_per_episode = 20;  // T_max
    int grad_steps = 20;         // G_max
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<double> lr_grid{0.99, 0.1, 1e-3, 1e-5};
    std::vector<int> user_grid{4, 6, 8};

    int users() const { return users_t + users_r; }
    int bs_elements() const { return bs_elements_x * bs_elements_z; }
    int ris_elements() const { return ris_elements_x * ris_elements_z; }

    double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }
    double morph_range_m() const { return morph_range_wavelengths * wavelength_m(); }
    double noise_per_subcarrier_w() const {
        return dbm_to_watts(noise_dbm_per_hz) * bandwidth_hz / subcarriers;
    }

    // eta(d) = C_0 * (d / 1 m)^(-a)
    double pathloss(double distance_m, double exponent) const {
        return db_to_linear(pathloss_ref_db) * std::pow(distance_m, -exponent);
    }

    FimGeometry bs_geometry() const {
        return build_fim_geometry(bs_elements_x, bs_elements_z, element_spacing_m, element_spacing_m);
    }
    FimGeometry ris_geometry() const {
        return build_fim_geometry(ris_elements_x, ris_elements_z, element_spacing_m, element_spacing_m);
    }
    CarrierConfig carrier() const { return CarrierConfig::from_frequency_hz(carrier_frequency_hz); }

    void validate() const {
        auto positive = [](double v, const char* field) {
            require(v > 0.0, std::string(field) + " must be positive");
        };
        require(users_t >= 0 && users_r >= 0 && users() >= 1, "users_t/users_r must give at least one user");
        require(subcarriers >= 1, "subcarriers must be >= 1");
        require(bs_elements_x >= 1 && bs_elements_z >= 1, "bs_elements_x/bs_elements_z must be >= 1");
        require(ris_elements_x >= 1 && ris_elements_z >= 1, "ris_elements_x/ris_elements_z must be >= 1");
        require(u_max >= 1, "u_max must be >= 1");
        positive(p_max_w, "p_max_w");
        positive(bandwidth_hz, "bandwidth_hz");
        positive(carrier_frequency_hz, "carrier_frequency_hz");
        positive(element_spacing_m, "element_spacing_m");
        positive(morph_range_wavelengths, "morph_range_wavelengths");
        require(paths >= 1, "paths must be >= 1");
        positive(user_disc_radius_m, "user_disc_radius_m");
        positive(pathloss_exp_direct, "pathloss_exp_direct");
        positive(pathloss_exp_ris, "pathloss_exp_ris");
        positive(ris_static_w, "ris_static_w");
        positive(ris_per_element_w, "ris_per_element_w");
        require(amp_efficiency > 0.0 && amp_efficiency < 1.0, "amp_efficiency must lie in (0,1)");
        double nu_sum = 0.0;
        for (double nu : reward_nu) {
            require(nu >= 0.0 && nu <= 1.0, "reward_nu entries must lie in [0,1]");
            nu_sum += nu;
        }
        require(std::abs(nu_sum - 1.0) <= 1e-9, "reward_nu must sum to 1");
        require(batch_size >= 1, "batch_size must be >= 1");
        require(discount > 0.0 && discount < 1.0, "discount must lie in (0,1)");
        require(soft_tau > 0.0 && soft_tau <= 1.0, "soft_tau must lie in (0,1]");
        require(lr_actor >= 0.0 && lr_critic >= 0.0 && lr_meta >= 0.0,
                "learning rates must be nonnegative");
        positive(entropy_weight, "entropy_weight");
        require(grad_clip >= 0.0, "grad_clip must be nonnegative");
        require(replay_capacity >= 1, "replay_capacity must be >= 1");
        require(!actor_hidden.empty() && !critic_hidden.empty() && !meta_hidden.empty(),
                "network hidden layer lists must be nonempty");
        require(episodes >= 0, "episodes must be >= 0");
        require(steps_per_episode >= 1, "steps_per_episode must be >= 1");
        require(grad_steps >= 0, "grad_steps must be >= 0");
        require(!seeds.empty(), "seeds must be nonempty");
    }
};

}  // namespace fimstar
