#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fimstar/agent.hpp"
#include "fimstar/env.hpp"
#include "fimstar/rng.hpp"

using namespace fimstar;

namespace {

void check_close(double got, double want, double tol, double floor = 1e-8) {
    const double denom = std::max({floor, std::abs(got), std::abs(want)});
    CHECK(std::abs(got - want) / denom <= tol);
}

// Small bundle with hand-sized networks for gradient checks.
AgentBundle tiny_bundle(Rng& rng, int state_dim = 3, int action_dim = 2) {
    AgentBundle b;
    b.actor = build_mlp({state_dim, 5, 4, 2 * action_dim}, rng);
    b.critic = build_mlp({state_dim + action_dim, 6, 1}, rng);
    b.meta_critic = build_mlp({state_dim + action_dim, 4, 1}, rng);
    randomize_mlp(b.actor, rng, 0.4);
    randomize_mlp(b.critic, rng, 0.4);
    randomize_mlp(b.meta_critic, rng, 0.4);
    b.actor_target = b.actor;
    b.critic_target = b.critic;
    randomize_mlp(b.critic_target, rng, 0.4);
    b.grad_clip = 1e9;  // keep the toy gradients unclipped
    return b;
}

ReplayBuffer::Batch random_batch(Rng& rng, int n, int state_dim, int action_dim) {
    ReplayBuffer::Batch batch;
    batch.s.resize(n, state_dim);
    batch.a.resize(n, action_dim);
    batch.s2.resize(n, state_dim);
    batch.r.resize(n);
    batch.done.resize(n);
    batch.indices.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < state_dim; ++j) {
            batch.s(i, j) = rng.uniform(-1.0, 1.0);
            batch.s2(i, j) = rng.uniform(-1.0, 1.0);
        }
        for (int j = 0; j < action_dim; ++j) batch.a(i, j) = rng.uniform(-0.9, 0.9);
        batch.r[i] = rng.uniform(-1.0, 1.0);
        batch.done[i] = 0.0;
    }
    return batch;
}

Mat random_noise(Rng& rng, int n, int d) {
    Mat noise(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) noise(i, j) = rng.normal();
    return noise;
}

template <typename LossFn>
void check_net_grads(Mlp& net, const MlpGrad& analytic, LossFn loss, double tol = 1e-4) {
    const double h = 1e-5;
    for (long long i = 0; i < param_count(net); ++i) {
        const double orig = get_param(net, i);
        set_param(net, i, orig + h);
        const double lp = loss();
        set_param(net, i, orig - h);
        const double lm = loss();
        set_param(net, i, orig);
        check_close(get_grad(analytic, i), (lp - lm) / (2.0 * h), tol);
    }
}

ScenarioConfig tiny_env_config() {
    ScenarioConfig cfg;
    cfg.users_t = 1;
    cfg.users_r = 1;
    cfg.subcarriers = 1;
    cfg.ris_elements_x = 2;
    cfg.ris_elements_z = 2;
    cfg.actor_hidden = {48, 48};
    cfg.critic_hidden = {48, 48};
    cfg.meta_hidden = {24, 24};
    cfg.episodes = 40;
    return cfg;
}

}  // anonymous namespace

TEST_CASE("replay buffer ring semantics") {
    ReplayBuffer buf(4);
    Rng rng(1);
    for (int i = 0; i < 6; ++i) {
        Transition t;
        t.s = Vec::Constant(1, static_cast<double>(i));
        t.a = Vec::Constant(1, 0.0);
        t.s2 = t.s;
        t.r = static_cast<double>(i);
        buf.push(t);
    }
    CHECK(buf.size() == 4);  // never exceeds capacity
    // items 0 and 1 were overwritten by 4 and 5
    bool saw_old = false;
    for (int i = 0; i < 200; ++i) {
        const auto b = buf.sample(1, rng);
        if (b.r[0] < 2.0) saw_old = true;
    }
    CHECK_FALSE(saw_old);
    CHECK_THROWS_AS(buf.sample(0, rng), std::invalid_argument);
    CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
}

TEST_CASE("replay sampling is uniform (chi-square, p = 0.01)") {
    ReplayBuffer buf(200);
    for (int i = 0; i < 100; ++i) {
        Transition t;
        t.s = Vec::Constant(1, static_cast<double>(i));
        t.a = Vec::Constant(1, 0.0);
        t.s2 = t.s;
        t.r = 0.0;
        buf.push(t);
    }
    Rng rng(2024);
    std::vector<int> counts(100, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[buf.sample(1, rng).indices[0]];
    const double expect = draws / 100.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 134.642);  // chi-square critical value, df = 99, p = 0.01
}

TEST_CASE("critic TD loss closed forms") {
    Rng rng(3);
    AgentBundle b = tiny_bundle(rng);
    b.discount = 0.0;  // myopic: target collapses to the (zero) reward
    b.value_l2 = 0.0;
    b.actor.b.back().tail(2).array() = -50.0;  // deterministic policy at the clamp floor

    ReplayBuffer::Batch batch = random_batch(rng, 4, 3, 2);
    batch.r.setZero();
    const Mat noise = random_noise(rng, 4, 2);
    const double loss = detail::critic_loss_grad(b, batch, noise, nullptr);
    const Mat v = forward(b.critic, policy::concat_cols(batch.s, batch.a));
    double want = 0.0;
    for (int i = 0; i < 4; ++i) want += v(i, 0) * v(i, 0);
    want /= 4.0;
    CHECK(loss == doctest::Approx(want).epsilon(1e-12));

    // duplicated transitions leave the mean loss unchanged
    ReplayBuffer::Batch twice;
    twice.s = Mat(2, 3);
    twice.a = Mat(2, 2);
    twice.s2 = Mat(2, 3);
    twice.s << batch.s.row(0), batch.s.row(0);
    twice.a << batch.a.row(0), batch.a.row(0);
    twice.s2 << batch.s2.row(0), batch.s2.row(0);
    twice.r = Vec::Zero(2);
    twice.done = Vec::Zero(2);
    twice.indices = {0, 0};
    ReplayBuffer::Batch once = twice;
    once.s = batch.s.topRows(1);
    once.a = batch.a.topRows(1);
    once.s2 = batch.s2.topRows(1);
    once.r = Vec::Zero(1);
    once.done = Vec::Zero(1);
    once.indices = {0};
    const Mat noise2 = random_noise(rng, 1, 2);
    Mat noise2_twice(2, 2);
    noise2_twice << noise2.row(0), noise2.row(0);
    CHECK(detail::critic_loss_grad(b, twice, noise2_twice, nullptr) ==
          doctest::Approx(detail::critic_loss_grad(b, once, noise2, nullptr)).epsilon(1e-12));

    ReplayBuffer::Batch empty;
    empty.s = Mat(0, 3);
    CHECK_THROWS_AS(detail::critic_loss_grad(b, empty, Mat(0, 2), nullptr), std::invalid_argument);
}

TEST_CASE("critic gradient matches finite differences") {
    Rng rng(4);
    AgentBundle b = tiny_bundle(rng);
    b.discount = 0.9;
    b.bootstrap_continuation = true;  // full soft-Bellman target path
    const ReplayBuffer::Batch batch = random_batch(rng, 2, 3, 2);
    const Mat noise = random_noise(rng, 2, 2);
    MlpGrad grad = MlpGrad::zeros_like(b.critic);
    detail::critic_loss_grad(b, batch, noise, &grad);
    check_net_grads(b.critic, grad,
                    [&]() { return detail::critic_loss_grad(b, batch, noise, nullptr); });
}

TEST_CASE("actor objective gradient matches finite differences") {
    Rng rng(5);
    AgentBundle b = tiny_bundle(rng);
    const ReplayBuffer::Batch batch = random_batch(rng, 3, 3, 2);
    const Mat noise = random_noise(rng, 3, 2);
    const detail::ActorGradients g = detail::actor_gradients(b, batch.s, noise, true);
    CHECK(g.j_value ==
          doctest::Approx(actor_objective_value(b.actor, b.critic, batch.s, noise, b.entropy_weight_per_dim(), b.mean_penalty))
              .epsilon(1e-12));
    check_net_grads(b.actor, g.grad_j, [&]() {
        return actor_objective_value(b.actor, b.critic, batch.s, noise, b.entropy_weight_per_dim(), b.mean_penalty);
    });
}

TEST_CASE("squashed log-prob gradient matches finite differences") {
    // zero critic isolates the lambda * log pi term of J
    Rng rng(6);
    AgentBundle b = tiny_bundle(rng);
    for (Mat& w : b.critic.w) w.setZero();
    for (Vec& v : b.critic.b) v.setZero();
    const ReplayBuffer::Batch batch = random_batch(rng, 2, 3, 2);
    const Mat noise = random_noise(rng, 2, 2);
    const detail::ActorGradients g = detail::actor_gradients(b, batch.s, noise, false);
    check_net_grads(b.actor, g.grad_j, [&]() {
        return actor_objective_value(b.actor, b.critic, batch.s, noise, b.entropy_weight_per_dim(), b.mean_penalty);
    });
}

TEST_CASE("meta-critic loss values and gradients") {
    Rng rng(7);
    AgentBundle b = tiny_bundle(rng);
    const ReplayBuffer::Batch batch = random_batch(rng, 3, 3, 2);
    const Mat noise = random_noise(rng, 3, 2);

    // zero meta-critic evaluates to zero
    Mlp zero_meta = b.meta_critic;
    for (Mat& w : zero_meta.w) w.setZero();
    for (Vec& v : zero_meta.b) v.setZero();
    CHECK(meta_critic_loss(zero_meta, b.actor, batch.s, noise) == 0.0);

    // batch of identical states equals the single-state evaluation
    ReplayBuffer::Batch same = batch;
    same.s.row(1) = batch.s.row(0);
    same.s.row(2) = batch.s.row(0);
    Mat same_noise = noise;
    same_noise.row(1) = noise.row(0);
    same_noise.row(2) = noise.row(0);
    CHECK(meta_critic_loss(b.meta_critic, b.actor, same.s, same_noise) ==
          doctest::Approx(meta_critic_loss(b.meta_critic, b.actor, same.s.topRows(1),
                                           same_noise.topRows(1)))
              .epsilon(1e-12));

    // gradients with respect to eta and the actor both pass finite differences
    const detail::ActorGradients g = detail::actor_gradients(b, batch.s, noise, true);
    CHECK(g.mc_value ==
          doctest::Approx(meta_critic_loss(b.meta_critic, b.actor, batch.s, noise)).epsilon(1e-12));
    check_net_grads(b.meta_critic, g.grad_mc_eta,
                    [&]() { return meta_critic_loss(b.meta_critic, b.actor, batch.s, noise); });
    check_net_grads(b.actor, g.grad_mc_actor,
                    [&]() { return meta_critic_loss(b.meta_critic, b.actor, batch.s, noise); });
}

TEST_CASE("actor update identities") {
    Rng rng(8);
    const ReplayBuffer::Batch batch = random_batch(rng, 2, 3, 2);
    const Mat noise = random_noise(rng, 2, 2);

    // lr_actor = 0 leaves everything in place
    AgentBundle frozen = tiny_bundle(rng);
    frozen.lr_actor = 0.0;
    const Mlp before = frozen.actor;
    const ActorUpdateResult res = actor_update(frozen, batch, noise);
    for (long long i = 0; i < param_count(before); ++i) {
        CHECK(get_param(res.theta_old, i) == get_param(before, i));
        CHECK(get_param(res.theta_new, i) == get_param(before, i));
        CHECK(get_param(frozen.actor, i) == get_param(before, i));
    }

    // zero meta-critic final layer: theta_new == theta_old (vanilla SAC step)
    AgentBundle vanilla = tiny_bundle(rng);
    vanilla.meta_critic.w.back().setZero();
    vanilla.meta_critic.b.back().setZero();
    const ActorUpdateResult res2 = actor_update(vanilla, batch, noise);
    for (long long i = 0; i < param_count(res2.theta_old); ++i)
        CHECK(get_param(res2.theta_new, i) == get_param(res2.theta_old, i));
}

TEST_CASE("ablation: no entropy and no meta-critic reduce to deterministic policy gradients") {
    Rng rng(9);
    AgentBundle b = tiny_bundle(rng);
    b.entropy_weight = 1e-300;  // numerically zero entropy term
    b.mean_penalty = 0.0;
    const ReplayBuffer::Batch batch = random_batch(rng, 2, 3, 2);
    const Mat noise = Mat::Zero(2, 2);  // deterministic reparameterization
    const detail::ActorGradients g = detail::actor_gradients(b, batch.s, noise, false);
    // objective collapses to -mean V(s, a(theta)); check against finite differences
    auto dpg_loss = [&]() {
        const policy::BatchEval e = policy::eval_policy(b.actor, batch.s, noise);
        const Mat v = forward(b.critic, policy::concat_cols(batch.s, e.action));
        return -v.col(0).mean();
    };
    check_net_grads(b.actor, g.grad_j, dpg_loss);
}

TEST_CASE("meta update gating and provenance") {
    Rng rng(10);
    const ReplayBuffer::Batch batch = random_batch(rng, 2, 3, 2);
    const Mat noise = random_noise(rng, 2, 2);
    const ReplayBuffer::Batch val = random_batch(rng, 2, 3, 2);
    const Mat noise_val = random_noise(rng, 2, 2);

    // lr_meta = 0 leaves eta unchanged
    AgentBundle b = tiny_bundle(rng);
    b.lr_meta = 0.0;
    const Mlp eta_before = b.meta_critic;
    const ActorUpdateResult res = actor_update(b, batch, noise);
    meta_update(b, val, noise_val, res);
    for (long long i = 0; i < param_count(eta_before); ++i)
        CHECK(get_param(b.meta_critic, i) == get_param(eta_before, i));

    // zero meta-critic network: improvement is zero, eta unchanged
    AgentBundle z = tiny_bundle(rng);
    for (Mat& w : z.meta_critic.w) w.setZero();
    for (Vec& v : z.meta_critic.b) v.setZero();
    const Mlp z_eta = z.meta_critic;
    const ActorUpdateResult zres = actor_update(z, batch, noise);
    const double improvement = meta_update(z, val, noise_val, zres);
    CHECK(improvement == 0.0);
    for (long long i = 0; i < param_count(z_eta); ++i)
        CHECK(get_param(z.meta_critic, i) == get_param(z_eta, i));

    // stale provenance is rejected
    AgentBundle p = tiny_bundle(rng);
    const ActorUpdateResult first = actor_update(p, batch, noise);
    actor_update(p, batch, noise);
    CHECK_THROWS_AS(meta_update(p, val, noise_val, first), std::invalid_argument);
}

TEST_CASE("meta update matches the hand-derived 1-D chain") {
    const double s0 = 0.7, sv = -0.4;
    const double xi = 0.3, xiv = -0.8;
    const double lr = 0.05, lr_meta = 0.03, lambda = 0.2;
    const double w_mu = 0.31, b_mu = -0.12, w_ls = -0.21, b_ls = -0.45;
    const double cw_s = 0.17, cw_a = -0.53, cb = 0.09;
    const double mw_s = 0.27, mw_a = 0.61, mb = -0.33;

    AgentBundle b;
    b.actor.w = {Mat(2, 1)};
    b.actor.w[0] << w_mu, w_ls;
    b.actor.b = {Vec(2)};
    b.actor.b[0] << b_mu, b_ls;
    b.critic.w = {Mat(1, 2)};
    b.critic.w[0] << cw_s, cw_a;
    b.critic.b = {Vec(1)};
    b.critic.b[0] << cb;
    b.meta_critic.w = {Mat(1, 2)};
    b.meta_critic.w[0] << mw_s, mw_a;
    b.meta_critic.b = {Vec(1)};
    b.meta_critic.b[0] << mb;
    b.actor_target = b.actor;
    b.critic_target = b.critic;
    b.entropy_weight = lambda;
    b.lr_actor = lr;
    b.lr_meta = lr_meta;
    b.grad_clip = 1e9;
    b.mean_penalty = 0.0;
    b.use_meta = true;

    ReplayBuffer::Batch trn;
    trn.s = Mat::Constant(1, 1, s0);
    trn.a = Mat::Constant(1, 1, 0.0);
    trn.s2 = trn.s;
    trn.r = Vec::Zero(1);
    trn.done = Vec::Zero(1);
    trn.indices = {0};
    ReplayBuffer::Batch val = trn;
    val.s = Mat::Constant(1, 1, sv);

    const ActorUpdateResult res = actor_update(b, trn, Mat::Constant(1, 1, xi));
    meta_update(b, val, Mat::Constant(1, 1, xiv), res);

    // hand computation with plain scalar arithmetic
    const double eps = kSquashEps;
    auto policy_parts = [&](double wmu, double bmu, double wls, double bls, double st, double noise_,
                            double* t_out, double* ls_out) {
        const double mu = wmu * st + bmu;
        const double ls = wls * st + bls;  // inside the clamp for these constants
        const double pre = mu + std::exp(ls) * noise_;
        *t_out = std::tanh(pre);
        *ls_out = ls;
        return mu;
    };
    double t, ls;
    policy_parts(w_mu, b_mu, w_ls, b_ls, s0, xi, &t, &ls);
    const double sigma = std::exp(ls);
    const double dj_dpre = lambda * (2.0 * t * (1.0 - t * t) / (1.0 - t * t + eps)) - cw_a * (1.0 - t * t);
    const double dj_dls = dj_dpre * sigma * xi - lambda;
    const double gw_mu = dj_dpre * s0, gb_mu = dj_dpre;
    const double gw_ls = dj_dls * s0, gb_ls = dj_dls;

    const double w_mu_old = w_mu - lr * gw_mu, b_mu_old = b_mu - lr * gb_mu;
    const double w_ls_old = w_ls - lr * gw_ls, b_ls_old = b_ls - lr * gb_ls;

    // meta-critic auxiliary gradient at the pre-update actor
    const double dmc_dpre = mw_a * (1.0 - t * t);
    const double w_mu_new = w_mu_old - lr * dmc_dpre * s0;
    const double b_mu_new = b_mu_old - lr * dmc_dpre;
    const double w_ls_new = w_ls_old - lr * dmc_dpre * sigma * xi * s0;
    const double b_ls_new = b_ls_old - lr * dmc_dpre * sigma * xi;

    auto j_val = [&](double wmu, double bmu, double wls, double bls) {
        double tv, lsv;
        policy_parts(wmu, bmu, wls, bls, sv, xiv, &tv, &lsv);
        const double logp = -lsv - 0.5 * xiv * xiv - 0.5 * std::log(kTwoPi) -
                            std::log(1.0 - tv * tv + eps);
        const double v = cw_s * sv + cw_a * tv + cb;
        return lambda * logp - v;
    };
    const double improvement = j_val(w_mu_new, b_mu_new, w_ls_new, b_ls_new) -
                               j_val(w_mu_old, b_mu_old, w_ls_old, b_ls_old);

    // d L_mc / d eta at the pre-update actor: (s0, t, 1)
    const double mw_s_expect = mw_s - lr_meta * improvement * s0;
    const double mw_a_expect = mw_a - lr_meta * improvement * t;
    const double mb_expect = mb - lr_meta * improvement * 1.0;

    CHECK(std::abs(b.meta_critic.w[0](0, 0) - mw_s_expect) <= 1e-10);
    CHECK(std::abs(b.meta_critic.w[0](0, 1) - mw_a_expect) <= 1e-10);
    CHECK(std::abs(b.meta_critic.b[0][0] - mb_expect) <= 1e-10);

    // the live actor took the combined step of both gradients
    CHECK(std::abs(b.actor.w[0](0, 0) - w_mu_new) <= 1e-12);
    CHECK(std::abs(b.actor.b[0][0] - b_mu_new) <= 1e-12);
    CHECK(std::abs(b.actor.w[0](1, 0) - w_ls_new) <= 1e-12);
    CHECK(std::abs(b.actor.b[0][1] - b_ls_new) <= 1e-12);
}

TEST_CASE("train contract: empty run and determinism") {
    const ScenarioConfig cfg = tiny_env_config();

    // E_max = 0: empty log, untouched networks
    {
        Environment env(cfg, RisMode::star, 3);
        Rng init(4), agent_rng(5);
        AgentBundle b = make_agent(cfg, env.state_dim(), env.action_dim(), init, true);
        const Mlp actor_before = b.actor;
        const auto logs = train(b, env, 0, agent_rng);
        CHECK(logs.empty());
        for (long long i = 0; i < param_count(actor_before); ++i)
            CHECK(get_param(b.actor, i) == get_param(actor_before, i));
    }

    // fixed seed: bitwise-identical logs
    auto one_run = [&]() {
        Environment env(cfg, RisMode::star, 3);
        Rng init(4), agent_rng(5);
        AgentBundle b = make_agent(cfg, env.state_dim(), env.action_dim(), init, true);
        return train(b, env, 6, agent_rng);
    };
    const auto la = one_run();
    const auto lb = one_run();
    REQUIRE(la.size() == lb.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
        CHECK(la[i].reward == lb[i].reward);
        CHECK(la[i].ee == lb[i].ee);
        CHECK(la[i].critic_loss == lb[i].critic_loss);
        CHECK(la[i].actor_loss == lb[i].actor_loss);
        CHECK(la[i].meta_loss == lb[i].meta_loss);
    }
}

TEST_CASE("learning beats the random policy on a small run" * doctest::timeout(600)) {
    ScenarioConfig cfg = tiny_env_config();
    cfg.episodes = 80;

    Environment learn_env(cfg, RisMode::star, 11);
    Rng init(12), agent_rng(13);
    AgentBundle b = make_agent(cfg, learn_env.state_dim(), learn_env.action_dim(), init, true);
    const auto learned = train(b, learn_env, cfg.episodes, agent_rng);

    Environment rand_env(cfg, RisMode::star, 11);  // identical task stream
    Rng rand_rng(13);
    const auto randoms = run_random_policy(rand_env, cfg.episodes, rand_rng);

    auto final_mean = [](const std::vector<EpisodeLog>& logs, int window) {
        double acc = 0.0;
        for (int i = static_cast<int>(logs.size()) - window; i < static_cast<int>(logs.size()); ++i)
            acc += logs[i].ee;
        return acc / window;
    };
    const double learned_ee = final_mean(learned, 20);
    const double random_ee = final_mean(randoms, 20);
    MESSAGE("learned final-window EE ", learned_ee, " vs random ", random_ee);
    CHECK(learned_ee > random_ee);
}

TEST_CASE("evaluate_policy semantics") {
    const ScenarioConfig cfg = tiny_env_config();

    // zero-weight actor emits the null action; EE matches the null decision
    {
        Environment env(cfg, RisMode::star, 21);
        Rng init(22);
        AgentBundle b = make_agent(cfg, env.state_dim(), env.action_dim(), init, true);
        for (Mat& w : b.actor.w) w.setZero();
        for (Vec& v : b.actor.b) v.setZero();
        Rng eval_rng(23);
        const EvalStats stats = evaluate_policy(b, env, 1, eval_rng, true);

        Environment ref(cfg, RisMode::star, 21);
        ref.reset();
        double ee = 0.0;
        for (int t = 0; t < cfg.steps_per_episode; ++t)
            ee += ref.step(RealVec(ref.action_dim(), 0.0)).metrics.ee;
        ee /= cfg.steps_per_episode;
        CHECK(stats.ee == doctest::Approx(ee).epsilon(1e-12));
    }

    // deterministic evaluation repeats exactly
    {
        Rng init(31);
        Environment env_a(cfg, RisMode::star, 30);
        AgentBundle b = make_agent(cfg, env_a.state_dim(), env_a.action_dim(), init, true);
        Rng r1(32), r2(32);
        const EvalStats a = evaluate_policy(b, env_a, 2, r1, true);
        Environment env_b(cfg, RisMode::star, 30);
        const EvalStats c = evaluate_policy(b, env_b, 2, r2, true);
        CHECK(a.ee == c.ee);
        CHECK(a.rate == c.rate);
        CHECK(a.power == c.power);
    }

    // near-deterministic policy: stochastic mean within 3 standard errors
    {
        ScenarioConfig small = cfg;
        small.steps_per_episode = 5;
        Environment env(small, RisMode::star, 40);
        Rng init(41);
        AgentBundle b = make_agent(small, env.state_dim(), env.action_dim(), init, true);
        b.actor.b.back().tail(env.action_dim()).array() = -30.0;  // sigma at the clamp floor
        Rng det_rng(42), sto_rng(43);
        Environment env_det(small, RisMode::star, 40);
        const EvalStats det = evaluate_policy(b, env_det, 50, det_rng, true);
        Environment env_sto(small, RisMode::star, 40);
        const EvalStats sto = evaluate_policy(b, env_sto, 50, sto_rng, false);
        CHECK(sto.ee == doctest::Approx(det.ee).epsilon(1e-6));
    }
}
