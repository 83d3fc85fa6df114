#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "fimstar/common.hpp"
#include "fimstar/geometry.hpp"
#include "fimstar/rng.hpp"
#include "fimstar/scenario.hpp"

namespace fimstar {

// One multipath cluster: P complex path gains with their arrival angles and
// per-path powers summing to the link's large-scale pathloss eta.
struct PathCluster {
    std::vector<cd> gains;
    std::vector<double> elevations;
    std::vector<double> azimuths;
    std::vector<double> per_path_power;
    double total_pathloss = 0.0;

    int num_paths() const { return static_cast<int>(gains.size()); }

    void validate() const {
        const std::size_t p = gains.size();
        require(p >= 1, "PathCluster: at least one path required");
        require(elevations.size() == p && azimuths.size() == p && per_path_power.size() == p,
                "PathCluster: field lengths differ");
        double sum = 0.0;
        for (double s : per_path_power) {
            require(s >= 0.0, "PathCluster: per-path power must be nonnegative");
            sum += s;
        }
        require(std::abs(sum - total_pathloss) <= 1e-12 * std::max(1.0, std::abs(total_pathloss)),
                "PathCluster: per-path powers must sum to the total pathloss");
        for (double a : elevations) require(a >= 0.0 && a < kPi, "PathCluster: elevation outside [0,pi)");
        for (double a : azimuths) require(a >= 0.0 && a < kPi, "PathCluster: azimuth outside [0,pi)");
    }
};

// Gains are i.i.d. CSCG with a uniform power profile sigma_p^2 = eta / P;
// angles are uniform on [0, pi).
inline PathCluster sample_path_clusters(Rng& rng, int num_paths, double pathloss) {
    require(num_paths >= 1, "sample_path_clusters: num_paths must be >= 1");
    require(pathloss > 0.0, "sample_path_clusters: pathloss must be positive");
    PathCluster c;
    c.total_pathloss = pathloss;
    const double var = pathloss / num_paths;
    c.gains.resize(num_paths);
    c.elevations.resize(num_paths);
    c.azimuths.resize(num_paths);
    c.per_path_power.assign(num_paths, var);
    for (int p = 0; p < num_paths; ++p) {
        c.gains[p] = rng.cnormal(var);
        c.elevations[p] = rng.uniform(0.0, kPi);
        c.azimuths[p] = rng.uniform(0.0, kPi);
    }
    return c;
}

// g(y) = sum_p gamma_p * v(y, phi_p, theta_p)
inline CVec bs_user_channel(const FimGeometry& geom, const FimShape& shape, const PathCluster& cluster,
                            const CarrierConfig& carrier) {
    cluster.validate();
    CVec g(geom.size(), cd(0.0, 0.0));
    for (int p = 0; p < cluster.num_paths(); ++p) {
        const CVec v = steering_vector(geom, shape, cluster.azimuths[p], cluster.elevations[p], carrier);
        for (int m = 0; m < geom.size(); ++m) g[m] += cluster.gains[p] * v[m];
    }
    return g;
}

// Column k is the summed deformable steering response seen by RIS element k.
inline CMat bs_ris_channel(const FimGeometry& geom, const FimShape& shape,
                           const std::vector<PathCluster>& clusters_per_element,
                           const CarrierConfig& carrier) {
    require(!clusters_per_element.empty(), "bs_ris_channel: need one cluster per RIS element");
    const int k_ris = static_cast<int>(clusters_per_element.size());
    CMat h(geom.size(), k_ris);
    for (int k = 0; k < k_ris; ++k) {
        const CVec col = bs_user_channel(geom, shape, clusters_per_element[k], carrier);
        for (int m = 0; m < geom.size(); ++m) h(m, k) = col[m];
    }
    return h;
}

// Rigid (non-morphing) RIS array response: same lattice formulas with y = 0.
inline CVec ris_user_channel(const FimGeometry& ris_geom, const PathCluster& cluster,
                             const CarrierConfig& carrier) {
    const FimShape flat = FimShape::flat(ris_geom.size(), 1.0);
    return bs_user_channel(ris_geom, flat, cluster, carrier);
}

// All sampled channels for one task (episode). The multipath clusters are the
// quasi-static part; g and h_br are their evaluation at a surface shape and
// are refreshed whenever the FIM morphs. h_ru does not depend on the shape.
struct ChannelSet {
    int num_users = 0;
    int num_subcarriers = 0;
    int num_bs_elements = 0;
    int num_ris_elements = 0;

    std::vector<PathCluster> bs_user_paths;               // [u * N + n]
    std::vector<std::vector<PathCluster>> bs_ris_paths;   // [n][k]
    std::vector<PathCluster> ris_user_paths;              // [u * N + n]

    std::vector<CVec> g;     // [u * N + n], length M
    std::vector<CMat> h_br;  // [n], M x K_RIS
    std::vector<CVec> h_ru;  // [u * N + n], length K_RIS
    double noise_power = 0.0;

    std::vector<std::array<double, 3>> user_positions;
    std::vector<double> eta_direct;    // per user
    std::vector<double> eta_ris_user;  // per user
    double eta_bs_ris = 0.0;

    int flat(int u, int n) const { return u * num_subcarriers + n; }
    const CVec& g_at(int u, int n) const { return g[flat(u, n)]; }
    const CVec& h_ru_at(int u, int n) const { return h_ru[flat(u, n)]; }
    const CMat& h_br_at(int n) const { return h_br[n]; }
};

// Re-evaluates the shape-dependent channels at a new FIM shape.
inline void refresh_channels(ChannelSet& cs, const FimGeometry& bs_geom, const FimShape& shape,
                             const CarrierConfig& carrier) {
    const int un = cs.num_users * cs.num_subcarriers;
    cs.g.resize(un);
    for (int i = 0; i < un; ++i) cs.g[i] = bs_user_channel(bs_geom, shape, cs.bs_user_paths[i], carrier);
    cs.h_br.resize(cs.num_subcarriers);
    for (int n = 0; n < cs.num_subcarriers; ++n)
        cs.h_br[n] = bs_ris_channel(bs_geom, shape, cs.bs_ris_paths[n], carrier);
}

namespace detail {

// Users are placed uniformly in a ground-plane disc. The RIS panel lies in
// the y = 0 plane, so transmission-sector users draw from the y > 0 half of
// the disc and reflection-sector users from the y < 0 half.
inline std::array<double, 3> sample_user_position(Rng& rng, const ScenarioConfig& cfg,
                                                  bool transmission_sector) {
    const double lo = transmission_sector ? 0.0 : kPi;
    const double angle = rng.uniform(lo, lo + kPi);
    const double radius = cfg.user_disc_radius_m * std::sqrt(rng.uniform01());
    return {cfg.user_disc_center_m[0] + radius * std::cos(angle),
            cfg.user_disc_center_m[1] + radius * std::sin(angle),
            cfg.user_disc_center_m[2]};
}

inline double distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace detail

// Draws one task: user placement, pathloss per link, all multipath clusters,
// and the channel evaluation at the flat (y = 0) reference shape. A pure
// function of (seed, scenario).
inline ChannelSet sample_task(Rng& rng, const ScenarioConfig& cfg) {
    const int u_all = cfg.users();
    const int n_sub = cfg.subcarriers;
    const int k_ris = cfg.ris_elements();

    ChannelSet cs;
    cs.num_users = u_all;
    cs.num_subcarriers = n_sub;
    cs.num_bs_elements = cfg.bs_elements();
    cs.num_ris_elements = k_ris;
    cs.noise_power = cfg.noise_per_subcarrier_w();

    const std::array<double, 3> bs_pos{0.0, 0.0, 0.0};
    cs.user_positions.resize(u_all);
    cs.eta_direct.resize(u_all);
    cs.eta_ris_user.resize(u_all);
    for (int u = 0; u < u_all; ++u) {
        cs.user_positions[u] = detail::sample_user_position(rng, cfg, u < cfg.users_t);
        cs.eta_direct[u] = cfg.pathloss(detail::distance(cs.user_positions[u], bs_pos), cfg.pathloss_exp_direct);
        cs.eta_ris_user[u] =
            cfg.pathloss(detail::distance(cs.user_positions[u], cfg.ris_position_m), cfg.pathloss_exp_ris);
    }
    cs.eta_bs_ris = cfg.pathloss(detail::distance(cfg.ris_position_m, bs_pos), cfg.pathloss_exp_ris);

    cs.bs_user_paths.resize(static_cast<std::size_t>(u_all) * n_sub);
    for (int u = 0; u < u_all; ++u)
        for (int n = 0; n < n_sub; ++n)
            cs.bs_user_paths[cs.flat(u, n)] = sample_path_clusters(rng, cfg.paths, cs.eta_direct[u]);

    cs.bs_ris_paths.resize(n_sub);
    for (int n = 0; n < n_sub; ++n) {
        cs.bs_ris_paths[n].resize(k_ris);
        for (int k = 0; k < k_ris; ++k)
            cs.bs_ris_paths[n][k] = sample_path_clusters(rng, cfg.paths, cs.eta_bs_ris);
    }

    // h_ru is drawn independently per (u, n); sector selection happens later
    // through the applied sector matrix.
    cs.ris_user_paths.resize(static_cast<std::size_t>(u_all) * n_sub);
    const FimGeometry ris_geom = cfg.ris_geometry();
    const CarrierConfig carrier = cfg.carrier();
    cs.h_ru.resize(static_cast<std::size_t>(u_all) * n_sub);
    for (int u = 0; u < u_all; ++u)
        for (int n = 0; n < n_sub; ++n) {
            const int i = cs.flat(u, n);
            cs.ris_user_paths[i] = sample_path_clusters(rng, cfg.paths, cs.eta_ris_user[u]);
            cs.h_ru[i] = ris_user_channel(ris_geom, cs.ris_user_paths[i], carrier);
        }

    const FimShape flat_shape = FimShape::flat(cfg.bs_elements(), cfg.morph_range_m());
    refresh_channels(cs, cfg.bs_geometry(), flat_shape, carrier);
    return cs;
}

}  // namespace fimstar
