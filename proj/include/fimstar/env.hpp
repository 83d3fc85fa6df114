#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "fimstar/channel.hpp"
#include "fimstar/common.hpp"
#include "fimstar/metrics.hpp"
#include "fimstar/ris.hpp"
#include "fimstar/rng.hpp"
#include "fimstar/scenario.hpp"

namespace fimstar {

using RealVec = std::vector<double>;

// Flat state layout: re/im-interleaved g block, then h_ru, then H_br, then
// all SINRs, then R_T. Total length 2(UNM + UNK + NMK) + UN + 1.
struct StateLayout {
    int users = 0, subcarriers = 0, bs_elements = 0, ris_elements = 0;
    int g_offset = 0;
    int h_ru_offset = 0;
    int h_br_offset = 0;
    int sinr_offset = 0;
    int rate_offset = 0;
    int length = 0;

    static StateLayout from_dims(int u, int n, int m, int k) {
        StateLayout l;
        l.users = u;
        l.subcarriers = n;
        l.bs_elements = m;
        l.ris_elements = k;
        l.g_offset = 0;
        l.h_ru_offset = l.g_offset + 2 * u * n * m;
        l.h_br_offset = l.h_ru_offset + 2 * u * n * k;
        l.sinr_offset = l.h_br_offset + 2 * n * m * k;
        l.rate_offset = l.sinr_offset + u * n;
        l.length = l.rate_offset + 1;
        return l;
    }

    static StateLayout from(const ScenarioConfig& cfg) {
        return from_dims(cfg.users(), cfg.subcarriers, cfg.bs_elements(), cfg.ris_elements());
    }
};

// Flat action layout in [-1,1]^D:
//   [0, M)                      FIM heights
//   [M, M + 2MUN)               beamformer re/im, index M + 2((u*N + n)*M + m)
//   [M + 2MUN, M + 2MUN + UN)   assignment logits
//   [..., ... + 3K)             RIS beta, then theta_T, then theta_R
struct ActionLayout {
    int users = 0, subcarriers = 0, bs_elements = 0, ris_elements = 0;
    int heights_offset = 0;
    int beams_offset = 0;
    int logits_offset = 0;
    int ris_offset = 0;
    int length = 0;

    static ActionLayout from_dims(int u, int n, int m, int k) {
        ActionLayout l;
        l.users = u;
        l.subcarriers = n;
        l.bs_elements = m;
        l.ris_elements = k;
        l.heights_offset = 0;
        l.beams_offset = m;
        l.logits_offset = l.beams_offset + 2 * m * u * n;
        l.ris_offset = l.logits_offset + u * n;
        l.length = l.ris_offset + 3 * k;
        return l;
    }

    static ActionLayout from(const ScenarioConfig& cfg) {
        return from_dims(cfg.users(), cfg.subcarriers, cfg.bs_elements(), cfg.ris_elements());
    }
};

struct RewardWeights {
    std::array<double, 5> nu{0.6, 0.1, 0.1, 0.1, 0.1};

    void validate() const {
        double sum = 0.0;
        for (double v : nu) {
            require(v >= 0.0 && v <= 1.0, "RewardWeights: each weight must lie in [0,1]");
            sum += v;
        }
        require(std::abs(sum - 1.0) <= 1e-9, "RewardWeights: weights must sum to 1");
    }
};

inline RealVec encode_state(const ChannelSet& cs, const LinkMetrics& metrics) {
    const StateLayout l =
        StateLayout::from_dims(cs.num_users, cs.num_subcarriers, cs.num_bs_elements, cs.num_ris_elements);
    RealVec s(l.length, 0.0);
    int idx = l.g_offset;
    for (int u = 0; u < cs.num_users; ++u)
        for (int n = 0; n < cs.num_subcarriers; ++n)
            for (const cd& c : cs.g_at(u, n)) {
                s[idx++] = c.real();
                s[idx++] = c.imag();
            }
    require(idx == l.h_ru_offset, "encode_state: g block size mismatch");
    for (int u = 0; u < cs.num_users; ++u)
        for (int n = 0; n < cs.num_subcarriers; ++n)
            for (const cd& c : cs.h_ru_at(u, n)) {
                s[idx++] = c.real();
                s[idx++] = c.imag();
            }
    require(idx == l.h_br_offset, "encode_state: h_ru block size mismatch");
    for (int n = 0; n < cs.num_subcarriers; ++n) {
        const CMat& h = cs.h_br_at(n);
        for (const cd& c : h.data) {
            s[idx++] = c.real();
            s[idx++] = c.imag();
        }
    }
    require(idx == l.sinr_offset, "encode_state: h_br block size mismatch");
    require(static_cast<int>(metrics.sinr.size()) == cs.num_users * cs.num_subcarriers,
            "encode_state: SINR block size mismatch");
    for (double v : metrics.sinr) s[idx++] = v;
    s[idx++] = metrics.sum_rate;
    require(idx == l.length, "encode_state: layout length mismatch");
    return s;
}

// Decodes a raw action in [-1,1]^D into a feasible decision. Heights map
// affinely into [y_min, y_max]; per subcarrier the top-U_max users with
// positive logit are scheduled (argmax fallback, lowest index on ties);
// scheduled beams are rescaled so the per-subcarrier power is
// min(raw power, P_max); the RIS block goes through project_raw.
inline AllocationDecision decode_action(const RealVec& a, const ScenarioConfig& cfg,
                                        const PowerModel& pm) {
    const ActionLayout l = ActionLayout::from(cfg);
    require(static_cast<int>(a.size()) == l.length, "decode_action: action length mismatch");
    for (double v : a) require(v >= -1.0 && v <= 1.0, "decode_action: entries must lie in [-1,1]");

    const int u_all = cfg.users();
    const int n_sub = cfg.subcarriers;
    const int m_dim = cfg.bs_elements();

    AllocationDecision d;
    d.num_users = u_all;
    d.num_subcarriers = n_sub;

    d.fim_shape = FimShape::flat(m_dim, cfg.morph_range_m());
    for (int m = 0; m < m_dim; ++m) {
        const double t = 0.5 * (a[l.heights_offset + m] + 1.0);
        d.fim_shape.y[m] = d.fim_shape.y_min + t * d.fim_shape.range();
    }

    d.w.assign(static_cast<std::size_t>(u_all) * n_sub, CVec(m_dim));
    for (int u = 0; u < u_all; ++u)
        for (int n = 0; n < n_sub; ++n)
            for (int m = 0; m < m_dim; ++m) {
                const int base = l.beams_offset + 2 * ((u * n_sub + n) * m_dim + m);
                d.w[d.flat(u, n)][m] = cd(a[base], a[base + 1]);
            }

    d.alpha.assign(static_cast<std::size_t>(u_all) * n_sub, 0);
    for (int n = 0; n < n_sub; ++n) {
        std::vector<int> order(u_all);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
            return a[l.logits_offset + lhs * n_sub + n] > a[l.logits_offset + rhs * n_sub + n];
        });
        int scheduled = 0;
        for (int u : order) {
            if (scheduled >= pm.u_max) break;
            if (a[l.logits_offset + u * n_sub + n] > 0.0) {
                d.alpha[d.flat(u, n)] = 1;
                ++scheduled;
            }
        }
        if (scheduled == 0) d.alpha[d.flat(order.front(), n)] = 1;
    }

    for (int n = 0; n < n_sub; ++n) {
        double raw_power = 0.0;
        for (int u = 0; u < u_all; ++u) {
            if (!d.scheduled(u, n)) continue;
            for (const cd& c : d.w[d.flat(u, n)]) raw_power += std::norm(c);
        }
        if (raw_power > pm.p_max_w) {
            const double scale = std::sqrt(pm.p_max_w / raw_power);
            for (int u = 0; u < u_all; ++u) {
                if (!d.scheduled(u, n)) continue;
                for (cd& c : d.w[d.flat(u, n)]) c *= scale;
            }
        }
    }

    std::vector<double> rb(a.begin() + l.ris_offset, a.begin() + l.ris_offset + cfg.ris_elements());
    std::vector<double> rt(a.begin() + l.ris_offset + cfg.ris_elements(),
                           a.begin() + l.ris_offset + 2 * cfg.ris_elements());
    std::vector<double> rr(a.begin() + l.ris_offset + 2 * cfg.ris_elements(),
                           a.begin() + l.ris_offset + 3 * cfg.ris_elements());
    d.ris = project_raw(rb, rt, rr);
    return d;
}

// Shaped reward r (five weighted terms) and the final reward R, which flips
// to -|r| when (2e) or (2f) is violated.
inline double reward(const AllocationDecision& d, const ChannelSet& cs, const SectorMatrices& sectors,
                     const std::vector<Sector>& sector_of_user, const PowerModel& pm,
                     const RewardWeights& weights) {
    weights.validate();
    const ConstraintReport rep = constraint_report(d, cs, sectors, sector_of_user, pm);
    const LinkMetrics m = compute_link_metrics(d, cs, sectors, sector_of_user, pm);
    const double r = weights.nu[0] * m.ee + weights.nu[1] * rep.sic_margin_sum +
                     weights.nu[2] * rep.umax_slack_sum + weights.nu[3] * rep.power_slack_total -
                     weights.nu[4] * rep.ris_deviation;
    if (rep.satisfied_2e() && rep.satisfied_2f()) return r;
    return -std::abs(r);
}

enum class RisMode { star, dris, none };

inline SectorMatrices apply_ris_mode(const StarBdRisParams& params, RisMode mode) {
    switch (mode) {
        case RisMode::star: return build_sector_matrices(params);
        case RisMode::dris: return d_ris_baseline(params);
        case RisMode::none: return zero_sectors(params.size());
    }
    throw std::invalid_argument("apply_ris_mode: unknown mode");
}

// Episodic wrapper. Channels are quasi-static within an episode: reset()
// draws a fresh task, step() re-evaluates the shape-dependent channels under
// the decoded action and re-encodes the state.
class Environment {
public:
    Environment(ScenarioConfig cfg, RisMode mode, std::uint64_t seed)
        : cfg_(std::move(cfg)),
          mode_(mode),
          rng_(seed),
          bs_geom_(cfg_.bs_geometry()),
          carrier_(cfg_.carrier()),
          pm_(PowerModel::from(cfg_)),
          sector_of_user_(sector_map(cfg_.users_t, cfg_.users_r)) {
        cfg_.validate();
        weights_.nu = cfg_.reward_nu;
        weights_.validate();
    }

    int state_dim() const { return StateLayout::from(cfg_).length; }
    int action_dim() const { return ActionLayout::from(cfg_).length; }
    const ScenarioConfig& config() const { return cfg_; }
    const ChannelSet& channels() const { return task_; }
    RisMode mode() const { return mode_; }

    const RealVec& reset() {
        task_ = sample_task(rng_, cfg_);
        t_ = 0;
        const RealVec null_action(action_dim(), 0.0);
        state_ = evaluate(null_action).state;
        return state_;
    }

    struct StepResult {
        RealVec state;
        double reward = 0.0;
        bool done = false;
        LinkMetrics metrics;
    };

    StepResult step(const RealVec& action) {
        StepResult res = evaluate(action);
        ++t_;
        res.done = t_ >= cfg_.steps_per_episode;
        state_ = res.state;
        return res;
    }

private:
    StepResult evaluate(const RealVec& action) {
        const AllocationDecision d = decode_action(action, cfg_, pm_);
        const SectorMatrices sectors = apply_ris_mode(d.ris, mode_);
        refresh_channels(task_, bs_geom_, d.fim_shape, carrier_);
        StepResult res;
        res.metrics = compute_link_metrics(d, task_, sectors, sector_of_user_, pm_);
        res.reward = reward(d, task_, sectors, sector_of_user_, pm_, weights_);
        res.state = encode_state(task_, res.metrics);
        return res;
    }

    ScenarioConfig cfg_;
    RisMode mode_;
    Rng rng_;
    FimGeometry bs_geom_;
    CarrierConfig carrier_;
    PowerModel pm_;
    RewardWeights weights_;
    std::vector<Sector> sector_of_user_;
    ChannelSet task_;
    RealVec state_;
    int t_ = 0;
};

}  // namespace fimstar
