#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fimstar/channel.hpp"
#include "fimstar/common.hpp"
#include "fimstar/ris.hpp"
#include "fimstar/scenario.hpp"

namespace fimstar {

enum class Sector { transmission, reflection };

inline std::vector<Sector> sector_map(int users_t, int users_r) {
    std::vector<Sector> s(static_cast<std::size_t>(users_t) + users_r, Sector::reflection);
    for (int u = 0; u < users_t; ++u) s[u] = Sector::transmission;
    return s;
}

struct PowerModel {
    double p_static_bs_w = 1.0;
    double p_static_ris_w = 0.1;
    double p_per_element_ris_w = 0.33e-3;
    double amp_efficiency = 0.8;
    int u_max = 2;
    double p_max_w = 0.5;

    static PowerModel from(const ScenarioConfig& cfg) {
        return {dbm_to_watts(cfg.bs_static_dbm), cfg.ris_static_w, cfg.ris_per_element_w,
                cfg.amp_efficiency, cfg.u_max, cfg.p_max_w};
    }

    void validate() const {
        require(p_static_bs_w > 0.0 && p_static_ris_w > 0.0 && p_per_element_ris_w > 0.0,
                "PowerModel: static powers must be positive");
        require(amp_efficiency > 0.0 && amp_efficiency < 1.0, "PowerModel: amp_efficiency in (0,1)");
        require(u_max >= 1 && p_max_w > 0.0, "PowerModel: u_max >= 1 and p_max_w > 0 required");
    }
};

// The full decoded action: beamformers, subcarrier assignment, surface shape
// and RIS parameters.
struct AllocationDecision {
    std::vector<CVec> w;           // [u * N + n], each length M
    std::vector<std::uint8_t> alpha;  // [u * N + n], binary
    FimShape fim_shape;
    StarBdRisParams ris;
    int num_users = 0;
    int num_subcarriers = 0;

    int flat(int u, int n) const { return u * num_subcarriers + n; }
    bool scheduled(int u, int n) const { return alpha[flat(u, n)] == 1; }
};

struct LinkMetrics {
    std::vector<double> sinr;  // [u * N + n]
    double sum_rate = 0.0;
    double p_t1 = 0.0;
    double p_t2 = 0.0;
    double total_power = 0.0;
    double ee = 0.0;
};

// Composite downlink row vector  (h_ru)^H Phi^s (H_br)^H + g^H  for user u on
// subcarrier n, with the sector matrix chosen by the user's region. Returned
// as a length-M vector e with e[m] already conjugated, so the received
// amplitude for beam w is sum_m e[m] * w[m].
inline CVec effective_channel(int u, int n, const ChannelSet& cs, const SectorMatrices& sectors,
                              const std::vector<Sector>& sector_of_user) {
    require(u >= 0 && u < cs.num_users && n >= 0 && n < cs.num_subcarriers,
            "effective_channel: index out of range");
    require(static_cast<int>(sector_of_user.size()) == cs.num_users,
            "effective_channel: sector map length mismatch");
    const CVec& h_ru = cs.h_ru_at(u, n);
    const CMat& h_br = cs.h_br_at(n);
    const CVec& g = cs.g_at(u, n);
    require(static_cast<int>(h_ru.size()) == h_br.cols && h_br.rows == static_cast<int>(g.size()),
            "effective_channel: dimension mismatch");
    const CVec& phi =
        sector_of_user[u] == Sector::transmission ? sectors.phi_t : sectors.phi_r;
    require(phi.size() == h_ru.size(), "effective_channel: sector matrix dimension mismatch");

    const int m_dim = h_br.rows;
    const int k_dim = h_br.cols;
    CVec e(m_dim);
    for (int m = 0; m < m_dim; ++m) {
        cd acc(0.0, 0.0);
        for (int k = 0; k < k_dim; ++k) acc += std::conj(h_ru[k]) * phi[k] * std::conj(h_br(m, k));
        e[m] = acc + std::conj(g[m]);
    }
    return e;
}

namespace detail {

inline double received_power(const CVec& eff, const CVec& w) {
    cd acc(0.0, 0.0);
    for (std::size_t m = 0; m < eff.size(); ++m) acc += eff[m] * w[m];
    return std::norm(acc);
}

}  // namespace detail

// SINR of user u on subcarrier n with beam `desired` treated as the wanted
// signal; all other scheduled beams interfere. desired == u gives Gamma_u^n,
// any other index gives the cross term Gamma_u^n(i).
inline double sinr_for_beam(int u, int desired, int n, const AllocationDecision& d,
                            const ChannelSet& cs, const SectorMatrices& sectors,
                            const std::vector<Sector>& sector_of_user) {
    if (!d.scheduled(desired, n)) return 0.0;
    const CVec eff = effective_channel(u, n, cs, sectors, sector_of_user);
    const double wanted = detail::received_power(eff, d.w[d.flat(desired, n)]);
    double interference = 0.0;
    for (int j = 0; j < d.num_users; ++j) {
        if (j == desired || !d.scheduled(j, n)) continue;
        interference += detail::received_power(eff, d.w[d.flat(j, n)]);
    }
    return wanted / (interference + cs.noise_power);
}

inline double cross_sinr(int u, int i, int n, const AllocationDecision& d, const ChannelSet& cs,
                         const SectorMatrices& sectors, const std::vector<Sector>& sector_of_user) {
    return sinr_for_beam(u, i, n, d, cs, sectors, sector_of_user);
}

inline std::vector<double> sinr_matrix(const AllocationDecision& d, const ChannelSet& cs,
                                       const SectorMatrices& sectors,
                                       const std::vector<Sector>& sector_of_user) {
    std::vector<double> out(static_cast<std::size_t>(d.num_users) * d.num_subcarriers, 0.0);
    for (int u = 0; u < d.num_users; ++u)
        for (int n = 0; n < d.num_subcarriers; ++n)
            out[d.flat(u, n)] = sinr_for_beam(u, u, n, d, cs, sectors, sector_of_user);
    return out;
}

// R_T = sum_u sum_n log2(1 + Gamma_u^n)
inline double sum_rate(const std::vector<double>& sinr) {
    double r = 0.0;
    for (double v : sinr) {
        require(v >= 0.0, "sum_rate: SINR must be nonnegative");
        r += std::log2(1.0 + v);
    }
    return r;
}

struct PowerBreakdown {
    double total = 0.0;
    double p_t1 = 0.0;
    double p_t2 = 0.0;
};

inline PowerBreakdown total_power(const AllocationDecision& d, const PowerModel& pm) {
    pm.validate();
    PowerBreakdown p;
    p.p_t1 = pm.p_static_bs_w + pm.p_static_ris_w + d.ris.size() * pm.p_per_element_ris_w;
    double radiated = 0.0;
    for (int u = 0; u < d.num_users; ++u)
        for (int n = 0; n < d.num_subcarriers; ++n) {
            if (!d.scheduled(u, n)) continue;
            for (const cd& c : d.w[d.flat(u, n)]) radiated += std::norm(c);
        }
    p.p_t2 = radiated / pm.amp_efficiency;
    p.total = p.p_t1 + p.p_t2;
    return p;
}

inline double energy_efficiency(double rate, double power) {
    require(power > 0.0, "energy_efficiency: power must be positive");
    return rate / power;
}

inline LinkMetrics compute_link_metrics(const AllocationDecision& d, const ChannelSet& cs,
                                        const SectorMatrices& sectors,
                                        const std::vector<Sector>& sector_of_user,
                                        const PowerModel& pm) {
    LinkMetrics m;
    m.sinr = sinr_matrix(d, cs, sectors, sector_of_user);
    m.sum_rate = sum_rate(m.sinr);
    const PowerBreakdown p = total_power(d, pm);
    m.p_t1 = p.p_t1;
    m.p_t2 = p.p_t2;
    m.total_power = p.total;
    m.ee = energy_efficiency(m.sum_rate, m.total_power);
    return m;
}

// Residuals for constraints (2b)-(2g). Sign convention follows the reward
// shaping: every residual is >= 0 (up to floating tolerance where noted) iff
// the constraint is satisfied. The *_sum fields are the raw reward terms.
//
// SIC margins are measured in the rate domain, log2(1+Gamma_u(i)) -
// log2(1+Gamma_u(u)), over co-scheduled ordered pairs, and enter the reward
// hinged at zero (violations only). Raw SINR differences are heavy-tailed
// (chance interference nulls reach +-1e4) and reward excess margin, which a
// convex weight cannot normalize against the EE objective; decodability is a
// constraint, so over-satisfying it earns nothing.
struct ConstraintReport {
    double sic_margin_min = 0.0;   // (2b) min rate-domain margin over co-scheduled pairs; 0 when vacuous
    double sic_margin_sum = 0.0;   // reward term: hinged rate-domain margins, co-scheduled pairs
    double umax_slack_min = 0.0;   // (2c) min_n (U_max - sum_u alpha)
    double umax_slack_sum = 0.0;   // reward term
    double power_slack_min = 0.0;  // (2d) min_n (P_max - sum_u alpha ||w||^2)
    double power_slack_total = 0.0;  // reward term: P_max - total radiated
    double shape_margin = 0.0;     // (2e) min distance of y to its bounds
    double binary_residual = 0.0;  // (2f) 0 iff all alpha in {0,1}
    double ris_deviation = 0.0;    // (2g) |sum_k (sum_s |Phi^{s,k}|^2 - 1)|

    static constexpr double kTol = 1e-12;
    bool satisfied_2c() const { return umax_slack_min >= 0.0; }
    bool satisfied_2d() const { return power_slack_min >= -kTol; }
    bool satisfied_2e() const { return shape_margin >= 0.0; }
    bool satisfied_2f() const { return binary_residual == 0.0; }
    bool satisfied_2g() const { return ris_deviation <= kTol; }
};

inline ConstraintReport constraint_report(const AllocationDecision& d, const ChannelSet& cs,
                                          const SectorMatrices& sectors,
                                          const std::vector<Sector>& sector_of_user,
                                          const PowerModel& pm) {
    ConstraintReport rep;

    bool any_pair = false;
    double min_margin = 0.0;
    for (int n = 0; n < d.num_subcarriers; ++n) {
        std::vector<double> own_rate(d.num_users, 0.0);
        for (int u = 0; u < d.num_users; ++u)
            own_rate[u] = std::log2(1.0 + sinr_for_beam(u, u, n, d, cs, sectors, sector_of_user));
        for (int u = 0; u < d.num_users; ++u) {
            if (!d.scheduled(u, n)) continue;
            for (int i = 0; i < d.num_users; ++i) {
                if (i == u || !d.scheduled(i, n)) continue;
                const double cross =
                    std::log2(1.0 + sinr_for_beam(u, i, n, d, cs, sectors, sector_of_user));
                const double margin = cross - own_rate[u];
                rep.sic_margin_sum += std::min(0.0, margin);
                min_margin = any_pair ? std::min(min_margin, margin) : margin;
                any_pair = true;
            }
        }
    }
    rep.sic_margin_min = any_pair ? min_margin : 0.0;

    // (2c) and (2d)
    bool first = true;
    double radiated_total = 0.0;
    for (int n = 0; n < d.num_subcarriers; ++n) {
        int count = 0;
        double power = 0.0;
        for (int u = 0; u < d.num_users; ++u) {
            if (!d.scheduled(u, n)) continue;
            ++count;
            for (const cd& c : d.w[d.flat(u, n)]) power += std::norm(c);
        }
        const double u_slack = static_cast<double>(pm.u_max - count);
        const double p_slack = pm.p_max_w - power;
        rep.umax_slack_sum += u_slack;
        radiated_total += power;
        if (first) {
            rep.umax_slack_min = u_slack;
            rep.power_slack_min = p_slack;
            first = false;
        } else {
            rep.umax_slack_min = std::min(rep.umax_slack_min, u_slack);
            rep.power_slack_min = std::min(rep.power_slack_min, p_slack);
        }
    }
    rep.power_slack_total = pm.p_max_w - radiated_total;

    // (2e)
    bool first_m = true;
    for (double y : d.fim_shape.y) {
        const double margin = std::min(y - d.fim_shape.y_min, d.fim_shape.y_max - y);
        rep.shape_margin = first_m ? margin : std::min(rep.shape_margin, margin);
        first_m = false;
    }

    // (2f): alpha is stored as integers; anything outside {0,1} is a violation.
    for (std::uint8_t a : d.alpha)
        if (a != 0 && a != 1) rep.binary_residual = -1.0;

    // (2g)
    const SectorMatrices built = build_sector_matrices(d.ris);
    double dev = 0.0;
    for (int k = 0; k < built.size(); ++k)
        dev += std::norm(built.phi_t[k]) + std::norm(built.phi_r[k]) - 1.0;
    rep.ris_deviation = std::abs(dev);

    return rep;
}

}  // namespace fimstar
