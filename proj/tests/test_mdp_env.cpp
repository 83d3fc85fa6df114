#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fimstar/env.hpp"
#include "fimstar/rng.hpp"

using namespace fimstar;

namespace {

ScenarioConfig desk_config() {
    ScenarioConfig cfg;
    cfg.users_t = 2;
    cfg.users_r = 2;
    cfg.subcarriers = 2;
    cfg.ris_elements_x = 4;
    cfg.ris_elements_z = 2;
    cfg.episodes = 5;
    return cfg;
}

cd random_entry(Rng& rng) { return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}; }

ChannelSet make_channels(Rng& rng, int users, int subcarriers, int m_dim, int k_dim, double noise) {
    ChannelSet cs;
    cs.num_users = users;
    cs.num_subcarriers = subcarriers;
    cs.num_bs_elements = m_dim;
    cs.num_ris_elements = k_dim;
    cs.noise_power = noise;
    cs.g.assign(static_cast<std::size_t>(users) * subcarriers, CVec(m_dim));
    cs.h_ru.assign(static_cast<std::size_t>(users) * subcarriers, CVec(k_dim));
    cs.h_br.assign(subcarriers, CMat(m_dim, k_dim));
    for (auto& v : cs.g)
        for (cd& e : v) e = random_entry(rng);
    for (auto& v : cs.h_ru)
        for (cd& e : v) e = random_entry(rng);
    for (auto& h : cs.h_br)
        for (cd& e : h.data) e = random_entry(rng);
    return cs;
}

}  // anonymous namespace

TEST_CASE("state layout length formula") {
    // Parameter-table dimensions: U=8, N=4, M=2, K=16
    const StateLayout l = StateLayout::from_dims(8, 4, 2, 16);
    CHECK(l.length == 2 * (64 + 512 + 128) + 32 + 1);
    CHECK(l.length == 1441);
}

TEST_CASE("encode_state zero inputs give the zero vector") {
    Rng rng(1);
    ChannelSet cs = make_channels(rng, 2, 2, 2, 3, 1.0);
    for (auto& v : cs.g)
        for (cd& e : v) e = cd(0.0, 0.0);
    for (auto& v : cs.h_ru)
        for (cd& e : v) e = cd(0.0, 0.0);
    for (auto& h : cs.h_br)
        for (cd& e : h.data) e = cd(0.0, 0.0);
    LinkMetrics m;
    m.sinr.assign(4, 0.0);
    m.sum_rate = 0.0;
    const RealVec s = encode_state(cs, m);
    for (double v : s) CHECK(v == 0.0);
}

TEST_CASE("encode_state round-trips block extraction") {
    Rng rng(2);
    const ChannelSet cs = make_channels(rng, 3, 2, 2, 4, 1.0);
    LinkMetrics m;
    m.sinr.assign(6, 0.5);
    m.sum_rate = 1.25;
    const RealVec s = encode_state(cs, m);
    const StateLayout l = StateLayout::from_dims(3, 2, 2, 4);
    CHECK(static_cast<int>(s.size()) == l.length);

    // extract g_{u=1}^{n=1} back out of the flat vector
    const int u = 1, n = 1, m_dim = 2;
    const int base = l.g_offset + 2 * ((u * 2 + n) * m_dim);
    for (int i = 0; i < m_dim; ++i) {
        CHECK(s[base + 2 * i] == cs.g_at(u, n)[i].real());
        CHECK(s[base + 2 * i + 1] == cs.g_at(u, n)[i].imag());
    }
    CHECK(s[l.rate_offset] == 1.25);
}

TEST_CASE("decode_action zero-action semantics") {
    const ScenarioConfig cfg = desk_config();
    const PowerModel pm = PowerModel::from(cfg);
    const ActionLayout l = ActionLayout::from(cfg);
    const RealVec zero(l.length, 0.0);
    const AllocationDecision d = decode_action(zero, cfg, pm);

    for (double b : d.ris.beta) CHECK(b == doctest::Approx(0.5).epsilon(1e-15));
    for (double y : d.fim_shape.y)
        CHECK(y == doctest::Approx(0.5 * cfg.morph_range_m()).epsilon(1e-12));
    for (const CVec& w : d.w)
        for (const cd& e : w) CHECK(e == cd(0.0, 0.0));
    // exactly one user per subcarrier, argmax tie-break = lowest index
    for (int n = 0; n < cfg.subcarriers; ++n) {
        int count = 0;
        for (int u = 0; u < cfg.users(); ++u) count += d.alpha[d.flat(u, n)];
        CHECK(count == 1);
        CHECK(d.alpha[d.flat(0, n)] == 1);
    }
}

TEST_CASE("decode_action rescales over-budget subcarriers") {
    const ScenarioConfig cfg = desk_config();
    const PowerModel pm = PowerModel::from(cfg);
    const ActionLayout l = ActionLayout::from(cfg);
    RealVec a(l.length, 0.0);
    // schedule users 0 and 1 on subcarrier 0
    a[l.logits_offset + 0 * cfg.subcarriers + 0] = 0.9;
    a[l.logits_offset + 1 * cfg.subcarriers + 0] = 0.8;
    // raw beams: all four complex entries of the two scheduled users are
    // 0.5 + 0.5j, giving 4 * 0.5 = 2 W of raw power on subcarrier 0
    for (int u = 0; u < 2; ++u)
        for (int m = 0; m < cfg.bs_elements(); ++m) {
            const int base = l.beams_offset + 2 * ((u * cfg.subcarriers + 0) * cfg.bs_elements() + m);
            a[base] = 0.5;
            a[base + 1] = 0.5;
        }
    const AllocationDecision d = decode_action(a, cfg, pm);
    double power = 0.0;
    for (int u = 0; u < cfg.users(); ++u) {
        if (!d.scheduled(u, 0)) continue;
        for (const cd& e : d.w[d.flat(u, 0)]) power += std::norm(e);
    }
    CHECK(power == doctest::Approx(0.5).epsilon(1e-12));
    // P_max/raw = 0.25, so every entry shrank by sqrt(0.25) = 0.5
    CHECK(d.w[d.flat(0, 0)][0].real() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("decoded actions satisfy constraints (2c)-(2g)") {
    const ScenarioConfig cfg = desk_config();
    const PowerModel pm = PowerModel::from(cfg);
    const ActionLayout l = ActionLayout::from(cfg);
    Rng rng(3);
    ChannelSet cs = make_channels(rng, cfg.users(), cfg.subcarriers, cfg.bs_elements(),
                                  cfg.ris_elements(), 1e-3);
    const std::vector<Sector> smap = sector_map(cfg.users_t, cfg.users_r);
    for (int trial = 0; trial < 500; ++trial) {
        RealVec a(l.length);
        for (double& v : a) v = rng.uniform(-1.0, 1.0);
        const AllocationDecision d = decode_action(a, cfg, pm);
        const SectorMatrices m = build_sector_matrices(d.ris);
        const ConstraintReport rep = constraint_report(d, cs, m, smap, pm);
        CHECK(rep.satisfied_2c());
        CHECK(rep.satisfied_2d());
        CHECK(rep.satisfied_2e());
        CHECK(rep.satisfied_2f());
        CHECK(rep.satisfied_2g());
        CHECK(check_joint_unitary(m) <= 1e-12);
    }
}

TEST_CASE("reward branches and slack behavior") {
    const ScenarioConfig cfg = desk_config();
    const PowerModel pm = PowerModel::from(cfg);
    const ActionLayout l = ActionLayout::from(cfg);
    Rng rng(4);
    ChannelSet cs = make_channels(rng, cfg.users(), cfg.subcarriers, cfg.bs_elements(),
                                  cfg.ris_elements(), 1e-3);
    const std::vector<Sector> smap = sector_map(cfg.users_t, cfg.users_r);
    RewardWeights weights;
    weights.nu = cfg.reward_nu;

    // decoded actions always take the r branch: recompute r by hand and match
    RealVec a(l.length);
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    const AllocationDecision d = decode_action(a, cfg, pm);
    const SectorMatrices m = build_sector_matrices(d.ris);
    const ConstraintReport rep = constraint_report(d, cs, m, smap, pm);
    const LinkMetrics lm = compute_link_metrics(d, cs, m, smap, pm);
    const double expect = weights.nu[0] * lm.ee + weights.nu[1] * rep.sic_margin_sum +
                          weights.nu[2] * rep.umax_slack_sum +
                          weights.nu[3] * rep.power_slack_total -
                          weights.nu[4] * rep.ris_deviation;
    CHECK(reward(d, cs, m, smap, pm, weights) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(rep.ris_deviation <= 1e-12);

    // direct (2e) violation flips the sign
    AllocationDecision bad = d;
    bad.fim_shape.y[0] = bad.fim_shape.y_max * 4.0;
    const double flipped = reward(bad, cs, m, smap, pm, weights);
    CHECK(flipped <= 0.0);

    // direct (2f) violation flips the sign as well
    AllocationDecision bin = d;
    bin.alpha[0] = 3;
    CHECK(reward(bin, cs, m, smap, pm, weights) <= 0.0);

    // pushing radiated power toward P_max strictly decreases the nu_4 slack
    RealVec small = a, large = a;
    for (int i = l.beams_offset; i < l.logits_offset; ++i) {
        small[i] *= 0.05;
        large[i] = large[i] >= 0 ? 0.9 : -0.9;
    }
    const auto rep_small = constraint_report(decode_action(small, cfg, pm), cs, m, smap, pm);
    const auto rep_large = constraint_report(decode_action(large, cfg, pm), cs, m, smap, pm);
    CHECK(rep_large.power_slack_total < rep_small.power_slack_total);
}

TEST_CASE("reward is invariant under consistent user permutation") {
    const ScenarioConfig cfg = desk_config();
    const PowerModel pm = PowerModel::from(cfg);
    const ActionLayout l = ActionLayout::from(cfg);
    Rng rng(5);
    ChannelSet cs = make_channels(rng, cfg.users(), cfg.subcarriers, cfg.bs_elements(),
                                  cfg.ris_elements(), 1e-3);
    std::vector<Sector> smap = sector_map(cfg.users_t, cfg.users_r);
    RewardWeights weights;
    weights.nu = cfg.reward_nu;

    RealVec a(l.length);
    for (double& v : a) v = rng.uniform(-1.0, 1.0);

    const std::vector<int> perm{3, 1, 0, 2};
    RealVec pa = a;
    ChannelSet pcs = cs;
    std::vector<Sector> psmap = smap;
    const int n_sub = cfg.subcarriers, m_dim = cfg.bs_elements();
    for (int u = 0; u < cfg.users(); ++u) {
        psmap[u] = smap[perm[u]];
        for (int n = 0; n < n_sub; ++n) {
            pcs.g[pcs.flat(u, n)] = cs.g_at(perm[u], n);
            pcs.h_ru[pcs.flat(u, n)] = cs.h_ru_at(perm[u], n);
            pa[l.logits_offset + u * n_sub + n] = a[l.logits_offset + perm[u] * n_sub + n];
            for (int m = 0; m < m_dim; ++m)
                for (int reim = 0; reim < 2; ++reim)
                    pa[l.beams_offset + 2 * ((u * n_sub + n) * m_dim + m) + reim] =
                        a[l.beams_offset + 2 * ((perm[u] * n_sub + n) * m_dim + m) + reim];
        }
    }
    const AllocationDecision d = decode_action(a, cfg, pm);
    const AllocationDecision pd = decode_action(pa, cfg, pm);
    const SectorMatrices m = build_sector_matrices(d.ris);
    const double r1 = reward(d, cs, m, smap, pm, weights);
    const double r2 = reward(pd, pcs, m, psmap, pm, weights);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-10));
}

TEST_CASE("environment reset and step semantics") {
    const ScenarioConfig cfg = desk_config();

    Environment env1(cfg, RisMode::star, 42);
    Environment env2(cfg, RisMode::star, 42);
    const RealVec s1 = env1.reset();
    const RealVec s2 = env2.reset();
    CHECK(s1 == s2);  // same seed, identical initial state
    CHECK(static_cast<int>(s1.size()) == env1.state_dim());

    // null decision: zero beams, so the R_T component is zero
    const StateLayout l = StateLayout::from(cfg);
    CHECK(s1[l.rate_offset] == 0.0);
    for (int i = l.sinr_offset; i < l.rate_offset; ++i) CHECK(s1[i] == 0.0);

    // quasi-static channels: identical actions give identical rewards
    Rng rng(6);
    RealVec a(env1.action_dim());
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    const auto r1 = env1.step(a);
    const auto r2 = env1.step(a);
    CHECK(r1.reward == r2.reward);
    CHECK(std::isfinite(r1.reward));
    CHECK(r1.state == r2.state);

    // zero action: finite reward
    Environment env3(cfg, RisMode::star, 7);
    env3.reset();
    const auto rz = env3.step(RealVec(env3.action_dim(), 0.0));
    CHECK(std::isfinite(rz.reward));
    CHECK(rz.metrics.sum_rate == 0.0);

    // done exactly at T_max
    Environment env4(cfg, RisMode::star, 8);
    env4.reset();
    for (int t = 0; t < cfg.steps_per_episode - 1; ++t)
        CHECK_FALSE(env4.step(RealVec(env4.action_dim(), 0.0)).done);
    CHECK(env4.step(RealVec(env4.action_dim(), 0.0)).done);
}

TEST_CASE("ris modes wire through the environment") {
    const ScenarioConfig cfg = desk_config();
    Rng rng(9);
    RealVec a;
    {
        Environment env(cfg, RisMode::star, 11);
        env.reset();
        a.assign(env.action_dim(), 0.0);
        for (double& v : a) v = rng.uniform(-1.0, 1.0);
    }
    double ee_star = 0.0, ee_none = 0.0;
    {
        Environment env(cfg, RisMode::star, 11);
        env.reset();
        ee_star = env.step(a).metrics.ee;
    }
    {
        Environment env(cfg, RisMode::none, 11);
        env.reset();
        ee_none = env.step(a).metrics.ee;
    }
    CHECK(ee_star != ee_none);  // the surface contributes to the composite channel
    CHECK(std::isfinite(ee_star));
    CHECK(std::isfinite(ee_none));
}
