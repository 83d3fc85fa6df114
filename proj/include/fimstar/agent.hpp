#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fimstar/env.hpp"
#include "fimstar/net.hpp"
#include "fimstar/rng.hpp"
#include "fimstar/scenario.hpp"

namespace fimstar {

// Agent-side state featurization: per-block scaling that brings channel
// entries, SINRs and the rate to O(1) before they reach the networks. SINR
// entries pass through log2(1 + x), i.e. the per-user rate.
struct StateScaler {
    int g_end = 0;
    int h_ru_end = 0;
    int h_br_end = 0;
    int sinr_end = 0;
    double g_scale = 1.0;
    double h_ru_scale = 1.0;
    double h_br_scale = 1.0;
    double sinr_scale = 0.125;
    double rate_scale = 1.0 / 32.0;

    static StateScaler from(const ScenarioConfig& cfg) {
        const StateLayout l = StateLayout::from(cfg);
        StateScaler s;
        s.g_end = l.h_ru_offset;
        s.h_ru_end = l.h_br_offset;
        s.h_br_end = l.sinr_offset;
        s.sinr_end = l.rate_offset;
        const auto dist = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
            const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
            return std::sqrt(dx * dx + dy * dy + dz * dz);
        };
        const std::array<double, 3> origin{0.0, 0.0, 0.0};
        const double d_direct = std::max(1.0, dist(cfg.user_disc_center_m, origin));
        const double d_ru = std::max(1.0, dist(cfg.user_disc_center_m, cfg.ris_position_m));
        const double d_br = std::max(1.0, dist(cfg.ris_position_m, origin));
        s.g_scale = 1.0 / std::sqrt(cfg.pathloss(d_direct, cfg.pathloss_exp_direct));
        s.h_ru_scale = 1.0 / std::sqrt(cfg.pathloss(d_ru, cfg.pathloss_exp_ris));
        s.h_br_scale = 1.0 / std::sqrt(cfg.pathloss(d_br, cfg.pathloss_exp_ris));
        return s;
    }

    Vec apply(const RealVec& raw) const {
        Vec out(static_cast<Eigen::Index>(raw.size()));
        for (int i = 0; i < static_cast<int>(raw.size()); ++i) {
            double v = raw[i];
            if (i < g_end)
                v *= g_scale;
            else if (i < h_ru_end)
                v *= h_ru_scale;
            else if (i < h_br_end)
                v *= h_br_scale;
            else if (i < sinr_end)
                v = std::log2(1.0 + v) * sinr_scale;
            else
                v *= rate_scale;
            out[i] = v;
        }
        return out;
    }
};

struct Transition {
    Vec s;
    Vec a;
    Vec s2;
    double r = 0.0;
    bool done = false;
};

// Uniform-sampling ring buffer.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::uint64_t capacity) : capacity_(capacity) {
        require(capacity >= 1, "ReplayBuffer: capacity must be >= 1");
    }

    std::uint64_t capacity() const { return capacity_; }
    std::size_t size() const { return data_.size(); }

    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[next_] = std::move(t);
            next_ = (next_ + 1) % capacity_;
        }
    }

    struct Batch {
        Mat s, a, s2;
        Vec r;
        Vec done;
        std::vector<std::size_t> indices;
        int size() const { return static_cast<int>(indices.size()); }
    };

    Batch sample(int n, Rng& rng) const {
        require(n >= 1, "ReplayBuffer::sample: batch size must be >= 1");
        require(!data_.empty(), "ReplayBuffer::sample: buffer is empty");
        Batch b;
        b.indices.resize(n);
        const int ds = static_cast<int>(data_.front().s.size());
        const int da = static_cast<int>(data_.front().a.size());
        b.s.resize(n, ds);
        b.a.resize(n, da);
        b.s2.resize(n, ds);
        b.r.resize(n);
        b.done.resize(n);
        for (int i = 0; i < n; ++i) {
            const std::size_t idx = static_cast<std::size_t>(rng.integer(data_.size()));
            b.indices[i] = idx;
            const Transition& t = data_[idx];
            b.s.row(i) = t.s.transpose();
            b.a.row(i) = t.a.transpose();
            b.s2.row(i) = t.s2.transpose();
            b.r[i] = t.r;
            b.done[i] = t.done ? 1.0 : 0.0;
        }
        return b;
    }

private:
    std::vector<Transition> data_;
    std::uint64_t capacity_;
    std::size_t next_ = 0;
};

struct AgentBundle {
    Mlp actor;
    Mlp critic;
    Mlp actor_target;
    Mlp critic_target;
    Mlp meta_critic;
    double discount = 0.99;
    double entropy_weight = 0.2;
    double lr_actor = 1e-3;
    double lr_critic = 1e-3;
    double lr_meta = 1e-3;
    double soft_tau = 0.01;
    // Global-norm clip for the critic step only. The critic's TD gradients
    // spike with the heavy reward tails; the actor/meta steps stay unclipped
    // so their learning rates keep their plain-SGD meaning.
    double grad_clip = 5.0;
    // L2 leash on the pre-squash policy mean. Keeps the actor out of tanh
    // saturation, where decode_action's power rescaling makes the reward
    // flat in the beam magnitudes and value extrapolation runs unchecked.
    double mean_penalty = 0.01;
    // Probability of rescaling the sampled beam block by a uniform factor
    // during collection. decode_action's power cap makes beam magnitudes
    // reward-flat above the cap, so on-policy sampling alone never covers the
    // low-power region; the critic needs that data to see the power/EE
    // tradeoff. Evaluation is unaffected.
    double explore_scale_prob = 0.25;
    // Probability of resampling the assignment-logit block uniformly. The
    // top-U_max decoding is piecewise constant in the logits, so the policy
    // gets no gradient toward other scheduling patterns; without persistent
    // pattern coverage runs lock into whichever co-scheduling mode they first
    // adopt.
    double explore_logit_prob = 0.15;
    // Ridge on the critic output inside the TD loss. A single critic has no
    // twin-Q minimum to damp bootstrapped overestimation; the ridge caps the
    // loop gain of the actor-critic inflation cycle.
    double value_l2 = 0.02;
    // Channels are quasi-static within an episode, so the continuation value
    // is action-independent: bootstrapping it adds a state constant to the
    // critic (invisible to the actor gradient) plus estimation noise that a
    // single critic under plain SGD cannot survive. The truncated target
    // regresses the soft immediate reward; the full soft-Bellman target stays
    // available behind this switch.
    bool bootstrap_continuation = false;
    // TD targets are clamped to the envelope of discounted returns actually
    // observed (plus slack): values beyond every seen trajectory are phantom
    // bootstrap products, the fuel of single-critic inflation.
    double return_min = 0.0;
    double return_max = 0.0;
    double return_slack = 5.0;
    bool return_bounds_set = false;

    void observe_return(double ret) {
        if (!return_bounds_set) {
            return_min = return_max = ret;
            return_bounds_set = true;
        } else {
            return_min = std::min(return_min, ret);
            return_max = std::max(return_max, ret);
        }
    }
    bool use_meta = true;
    std::uint64_t update_counter = 0;
    StateScaler scaler;

    // The configured entropy weight acts per action dimension: the joint
    // log-density of a D-dimensional policy scales linearly with D, and a
    // fixed joint weight would drown the reward signal for large actions.
    double entropy_weight_per_dim() const {
        return entropy_weight / (actor.out_dim() / 2);
    }

    void validate() const {
        actor.validate();
        critic.validate();
        meta_critic.validate();
        require(actor.widths() == actor_target.widths(), "AgentBundle: actor target architecture differs");
        require(critic.widths() == critic_target.widths(), "AgentBundle: critic target architecture differs");
        require(discount > 0.0 && discount < 1.0, "AgentBundle: discount must lie in (0,1)");
        require(entropy_weight > 0.0, "AgentBundle: entropy weight must be positive");
    }
};

// Initial policy spread. sigma ~ exp(-1.6) ~ 0.2 keeps the decoded transmit
// power below the per-subcarrier cap at the start of training; beyond the cap
// the power rescaling in decode_action makes beam magnitudes reward-flat, so
// a wide initial policy would never see the power/EE tradeoff.
inline constexpr double kInitLogStd = -1.6;

// The meta-critic starts as a transmit-magnitude auxiliary penalty:
// hidden pairs (+1, -1) rectify each beamformer action component, the next
// layers sum them, and a small output scale kappa makes
//   mc(s, a) ~ kappa * sum_j |a_beam_j|.
// The improvement-weighted meta rule then tunes the advice: for this
// positive rectified shape, shrinking the output scale weakens the advice
// and growing it strengthens it, so the validation signal steers its
// influence in the right direction from the first episodes.
inline void init_meta_critic_as_power_advice(Mlp& meta, int state_dim, const ActionLayout& layout,
                                             double kappa) {
    for (Mat& w : meta.w) w.setZero();
    for (Vec& v : meta.b) v.setZero();
    const int h1 = static_cast<int>(meta.w.front().rows());
    const int n_beam = layout.logits_offset - layout.beams_offset;
    const int pairs = std::min(h1 / 2, n_beam);
    for (int j = 0; j < pairs; ++j) {
        const int col = state_dim + layout.beams_offset + j;
        meta.w.front()(2 * j, col) = 1.0;
        meta.w.front()(2 * j + 1, col) = -1.0;
    }
    for (std::size_t l = 1; l + 1 < meta.w.size(); ++l)
        meta.w[l].row(0).head(l == 1 ? 2 * pairs : 1).setConstant(1.0);
    meta.w.back()(0, 0) = kappa;
}

inline AgentBundle make_agent(const ScenarioConfig& cfg, int state_dim, int action_dim, Rng& rng,
                              bool use_meta) {
    AgentBundle b;
    std::vector<int> aw{state_dim};
    aw.insert(aw.end(), cfg.actor_hidden.begin(), cfg.actor_hidden.end());
    aw.push_back(2 * action_dim);
    std::vector<int> cw{state_dim + action_dim};
    cw.insert(cw.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
    cw.push_back(1);
    std::vector<int> mw{state_dim + action_dim};
    mw.insert(mw.end(), cfg.meta_hidden.begin(), cfg.meta_hidden.end());
    mw.push_back(1);
    b.actor = build_mlp(aw, rng, FinalLayerInit::zero);
    b.actor.b.back().tail(action_dim).array() = kInitLogStd;
    b.critic = build_mlp(cw, rng, FinalLayerInit::zero);
    b.meta_critic = build_mlp(mw, rng, FinalLayerInit::small);
    init_meta_critic_as_power_advice(b.meta_critic, state_dim, ActionLayout::from(cfg), 0.05);
    b.actor_target = b.actor;
    b.critic_target = b.critic;
    b.discount = cfg.discount;
    b.entropy_weight = cfg.entropy_weight;
    b.lr_actor = cfg.lr_actor;
    b.lr_critic = cfg.lr_critic;
    b.lr_meta = cfg.lr_meta;
    b.soft_tau = cfg.soft_tau;
    b.grad_clip = cfg.grad_clip;
    b.use_meta = use_meta;
    b.scaler = StateScaler::from(cfg);
    b.validate();
    return b;
}

namespace policy {

// Batched reparameterized head evaluation; one noise row per sample.
struct BatchEval {
    ForwardCache cache;
    Mat mean, log_std, clamp_mask, sigma, pre, action;
    Vec log_prob;  // per sample
};

inline BatchEval eval_policy(const Mlp& actor, const Mat& states, const Mat& noise) {
    BatchEval e;
    const Mat head = forward_cached(actor, states, e.cache);
    const int d = static_cast<int>(head.cols()) / 2;
    require(noise.rows() == states.rows() && noise.cols() == d, "eval_policy: noise shape mismatch");
    e.mean = head.leftCols(d);
    const Mat raw = head.rightCols(d);
    e.log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    e.clamp_mask = ((raw.array() > kLogStdMin) && (raw.array() < kLogStdMax)).cast<double>().matrix();
    e.sigma = e.log_std.array().exp().matrix();
    e.pre = e.mean + e.sigma.cwiseProduct(noise);
    e.action = e.pre.array().tanh().matrix();
    e.log_prob.resize(states.rows());
    for (int i = 0; i < states.rows(); ++i) {
        double lp = 0.0;
        for (int j = 0; j < d; ++j) {
            lp += -e.log_std(i, j) - 0.5 * noise(i, j) * noise(i, j) - 0.5 * std::log(kTwoPi);
            lp -= std::log(1.0 - e.action(i, j) * e.action(i, j) + kSquashEps);
        }
        e.log_prob[i] = lp;
    }
    return e;
}

inline Mat concat_cols(const Mat& a, const Mat& b) {
    Mat out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

}  // namespace policy

// J(theta) = E[ lambda * log pi(a|s) - V(s, a) ] + c * mean(mu^2), with a
// reparameterized and c the (small) pre-squash mean leash.
inline double actor_objective_value(const Mlp& actor, const Mlp& critic, const Mat& states,
                                    const Mat& noise, double entropy_weight,
                                    double mean_penalty = 0.0) {
    const policy::BatchEval e = policy::eval_policy(actor, states, noise);
    const Mat x = policy::concat_cols(states, e.action);
    const Mat v = forward(critic, x);
    double j = 0.0;
    for (int i = 0; i < states.rows(); ++i) j += entropy_weight * e.log_prob[i] - v(i, 0);
    j /= states.rows();
    j += mean_penalty * e.mean.squaredNorm() / (states.rows() * e.mean.cols());
    return j;
}

// Mean meta-critic output over (state, action-from-actor) pairs.
inline double meta_critic_loss(const Mlp& meta, const Mlp& actor, const Mat& states,
                               const Mat& noise) {
    const policy::BatchEval e = policy::eval_policy(actor, states, noise);
    const Mat x = policy::concat_cols(states, e.action);
    const Mat out = forward(meta, x);
    return out.col(0).mean();
}

// The shaped reward is heavy-tailed: chance interference nulls drive raw
// SINR margins to +-1e4, which no TD target can track. The critic therefore
// learns on an asinh-squashed reward (monotone, linear near zero,
// logarithmic in the tails); logged and environment rewards are untouched.
inline double squash_reward(double r) { return std::asinh(r); }

namespace detail {

// Soft-Bellman TD loss with target
//   y = squash(r) + gamma * (1 - done) * (V'(s', a') - lambda * log pi(a'|s'))
// The target is a constant with respect to the live critic parameters.
inline double critic_loss_grad(const AgentBundle& b, const ReplayBuffer::Batch& batch,
                               const Mat& noise_next, MlpGrad* grad_out) {
    require(batch.size() >= 1, "critic_update: batch must contain at least one transition");
    // a' comes from the slow-moving target actor; a fresh-actor sample feeds
    // the critic's own estimation errors straight back into its targets.
    const policy::BatchEval next = policy::eval_policy(b.actor_target, batch.s2, noise_next);
    const Mat x2 = policy::concat_cols(batch.s2, next.action);
    const Mat v2 = forward(b.critic_target, x2);
    Vec y(batch.size());
    for (int i = 0; i < batch.size(); ++i) {
        const double continuation =
            b.bootstrap_continuation
                ? b.discount * (1.0 - batch.done[i]) *
                      (v2(i, 0) - b.entropy_weight_per_dim() * next.log_prob[i])
                : 0.0;
        y[i] = squash_reward(batch.r[i]) + continuation;
        if (b.return_bounds_set)
            y[i] = std::clamp(y[i], b.return_min - b.return_slack, b.return_max + b.return_slack);
    }

    ForwardCache cache;
    const Mat x = policy::concat_cols(batch.s, batch.a);
    const Mat v = forward_cached(b.critic, x, cache);
    double loss = 0.0;
    Mat dout(batch.size(), 1);
    for (int i = 0; i < batch.size(); ++i) {
        const double diff = v(i, 0) - y[i];
        loss += diff * diff + b.value_l2 * v(i, 0) * v(i, 0);
        dout(i, 0) = (2.0 * diff + 2.0 * b.value_l2 * v(i, 0)) / batch.size();
    }
    loss /= batch.size();
    if (grad_out != nullptr) backward(b.critic, cache, dout, grad_out);
    return loss;
}

}  // namespace detail

// One TD gradient step on the critic; returns the loss value.
inline double critic_update(AgentBundle& b, const ReplayBuffer::Batch& batch, const Mat& noise_next) {
    MlpGrad grad = MlpGrad::zeros_like(b.critic);
    const double loss = detail::critic_loss_grad(b, batch, noise_next, &grad);
    sgd_step(b.critic, grad, b.lr_critic, b.grad_clip);
    return loss;
}

namespace detail {

// Gradient of J with respect to the actor parameters, plus (optionally) the
// meta-critic auxiliary gradients with respect to both the actor and the
// meta-critic parameters, all evaluated at the same reparameterized sample.
struct ActorGradients {
    MlpGrad grad_j;
    MlpGrad grad_mc_actor;
    MlpGrad grad_mc_eta;
    double j_value = 0.0;
    double mc_value = 0.0;
};

inline ActorGradients actor_gradients(const AgentBundle& b, const Mat& states, const Mat& noise,
                                      bool with_meta) {
    ActorGradients out;
    const int batch = static_cast<int>(states.rows());
    const double inv_b = 1.0 / batch;
    const double lambda = b.entropy_weight_per_dim();

    policy::BatchEval e = policy::eval_policy(b.actor, states, noise);
    const int d = static_cast<int>(e.action.cols());

    ForwardCache critic_cache;
    const Mat x = policy::concat_cols(states, e.action);
    const Mat v = forward_cached(b.critic, x, critic_cache);
    out.j_value = 0.0;
    for (int i = 0; i < batch; ++i) out.j_value += lambda * e.log_prob[i] - v(i, 0);
    out.j_value *= inv_b;
    out.j_value += b.mean_penalty * e.mean.squaredNorm() * inv_b / d;

    // dJ/da through the critic: upstream -1/B on each V output.
    const Mat dout_v = Mat::Constant(batch, 1, -inv_b);
    const Mat dx = backward(b.critic, critic_cache, dout_v, nullptr);
    const Mat dj_da = dx.rightCols(d);

    const Mat one_minus_t2 =
        (1.0 - e.action.array().square()).matrix();  // tanh'(pre)
    const Mat squash_den = (1.0 - e.action.array().square() + kSquashEps).matrix();
    // d log pi / d pre (holding the noise fixed)
    const Mat dlogp_dpre =
        (2.0 * e.action.array() * one_minus_t2.array() / squash_den.array()).matrix();

    const Mat dj_dpre =
        (lambda * inv_b) * dlogp_dpre + dj_da.cwiseProduct(one_minus_t2);
    Mat dhead(batch, 2 * d);
    dhead.leftCols(d) = dj_dpre + (2.0 * b.mean_penalty * inv_b / d) * e.mean;
    dhead.rightCols(d) =
        (dj_dpre.cwiseProduct(e.sigma.cwiseProduct(noise)).array() - lambda * inv_b).matrix()
            .cwiseProduct(e.clamp_mask);

    out.grad_j = MlpGrad::zeros_like(b.actor);
    backward(b.actor, e.cache, dhead, &out.grad_j);

    out.grad_mc_actor = MlpGrad::zeros_like(b.actor);
    out.grad_mc_eta = MlpGrad::zeros_like(b.meta_critic);
    if (with_meta) {
        ForwardCache meta_cache;
        const Mat mc = forward_cached(b.meta_critic, x, meta_cache);
        out.mc_value = mc.col(0).mean();
        const Mat dout_mc = Mat::Constant(batch, 1, inv_b);
        const Mat dx_mc = backward(b.meta_critic, meta_cache, dout_mc, &out.grad_mc_eta);
        const Mat dmc_dpre = dx_mc.rightCols(d).cwiseProduct(one_minus_t2);
        Mat dhead_mc(batch, 2 * d);
        dhead_mc.leftCols(d) = dmc_dpre;
        dhead_mc.rightCols(d) =
            dmc_dpre.cwiseProduct(e.sigma.cwiseProduct(noise)).cwiseProduct(e.clamp_mask);
        backward(b.actor, e.cache, dhead_mc, &out.grad_mc_actor);
    }
    return out;
}

}  // namespace detail

struct ActorUpdateResult {
    Mlp theta_old;
    Mlp theta_new;
    double actor_loss = 0.0;
    double mc_loss = 0.0;
    MlpGrad grad_mc_eta;
    std::uint64_t token = 0;
};

// Eqs-style sequential update: theta_old descends J, theta_new additionally
// descends the meta-critic auxiliary loss; the live actor becomes theta_new.
inline ActorUpdateResult actor_update(AgentBundle& b, const ReplayBuffer::Batch& batch,
                                      const Mat& noise) {
    require(batch.size() >= 1, "actor_update: batch must contain at least one transition");
    detail::ActorGradients g = detail::actor_gradients(b, batch.s, noise, b.use_meta);

    ActorUpdateResult res;
    res.actor_loss = g.j_value;
    res.mc_loss = g.mc_value;
    res.grad_mc_eta = std::move(g.grad_mc_eta);

    res.theta_old = b.actor;
    sgd_step(res.theta_old, g.grad_j, b.lr_actor);
    res.theta_new = res.theta_old;
    sgd_step(res.theta_new, g.grad_mc_actor, b.lr_actor);
    b.actor = res.theta_new;
    res.token = ++b.update_counter;
    return res;
}

// First-order meta step. The validation improvement
//   s = J(D_val; theta_new) - J(D_val; theta_old)
// scales the meta-critic parameter gradient collected during the inner step;
// harmful advice (s > 0) is attenuated, helpful advice amplified.
inline double meta_update(AgentBundle& b, const ReplayBuffer::Batch& val, const Mat& noise_val,
                          const ActorUpdateResult& res) {
    require(res.token == b.update_counter,
            "meta_update: theta_old/theta_new do not come from the latest actor_update");
    if (!b.use_meta) return 0.0;
    const double j_old =
        actor_objective_value(res.theta_old, b.critic, val.s, noise_val,
                              b.entropy_weight_per_dim(), b.mean_penalty);
    const double j_new =
        actor_objective_value(res.theta_new, b.critic, val.s, noise_val,
                              b.entropy_weight_per_dim(), b.mean_penalty);
    const double improvement = j_new - j_old;
    MlpGrad grad = res.grad_mc_eta;
    grad.scale(improvement);
    sgd_step(b.meta_critic, grad, b.lr_meta);
    return improvement;
}

struct EpisodeLog {
    int episode = 0;
    double reward = 0.0;
    double ee = 0.0;
    double rate = 0.0;
    double power = 0.0;
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double meta_loss = 0.0;
};

inline RealVec to_real_vec(const Vec& v) { return RealVec(v.data(), v.data() + v.size()); }

// A diverged actor (huge learning rates) emits non-finite head values; the
// squashed output of an unbounded mean is a saturated element, so act as +1.
inline void sanitize_action(Vec& a) {
    for (int i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) a[i] = 1.0;
}

// Algorithm: per episode, collect T_max transitions, then run G_max gradient
// iterations, each sampling independent training and validation mini-batches.
inline std::vector<EpisodeLog> train(AgentBundle& b, Environment& env, int episodes, Rng& agent_rng) {
    std::vector<EpisodeLog> logs;
    ReplayBuffer buffer(env.config().replay_capacity);
    const int t_max = env.config().steps_per_episode;
    const int g_max = env.config().grad_steps;
    const int batch_size = env.config().batch_size;
    const int d = env.action_dim();
    const ActionLayout layout = ActionLayout::from(env.config());

    for (int ep = 0; ep < episodes; ++ep) {
        Vec state = b.scaler.apply(env.reset());
        EpisodeLog row;
        row.episode = ep;
        std::vector<double> step_rewards;
        step_rewards.reserve(t_max);
        for (int t = 0; t < t_max; ++t) {
            GaussianPolicyOutput pi = sample_squashed_gaussian(b.actor, state, agent_rng);
            sanitize_action(pi.action);
            if (b.explore_scale_prob > 0.0 && agent_rng.uniform01() < b.explore_scale_prob) {
                const double scale = agent_rng.uniform01();
                for (int j = layout.beams_offset; j < layout.logits_offset; ++j)
                    pi.action[j] *= scale;
            }
            if (b.explore_logit_prob > 0.0 && agent_rng.uniform01() < b.explore_logit_prob) {
                for (int j = layout.logits_offset; j < layout.ris_offset; ++j)
                    pi.action[j] = agent_rng.uniform(-1.0, 1.0);
            }
            const Environment::StepResult sr = env.step(to_real_vec(pi.action));
            const Vec next_state = b.scaler.apply(sr.state);
            buffer.push({state, pi.action, next_state, sr.reward, sr.done});
            state = next_state;
            step_rewards.push_back(sr.reward);
            row.reward += sr.reward;
            row.ee += sr.metrics.ee;
            row.rate += sr.metrics.sum_rate;
            row.power += sr.metrics.total_power;
        }
        double ret = 0.0;
        for (int t = t_max - 1; t >= 0; --t) {
            ret = squash_reward(step_rewards[t]) + b.discount * ret;
            b.observe_return(ret);
        }
        row.reward /= t_max;
        row.ee /= t_max;
        row.rate /= t_max;
        row.power /= t_max;

        if (static_cast<int>(buffer.size()) >= batch_size && g_max > 0) {
            double c_loss = 0.0, a_loss = 0.0, m_loss = 0.0;
            for (int g = 0; g < g_max; ++g) {
                const ReplayBuffer::Batch trn = buffer.sample(batch_size, agent_rng);
                Mat noise_next(batch_size, d);
                for (int i = 0; i < batch_size; ++i)
                    for (int j = 0; j < d; ++j) noise_next(i, j) = agent_rng.normal();
                c_loss += critic_update(b, trn, noise_next);

                Mat noise(batch_size, d);
                for (int i = 0; i < batch_size; ++i)
                    for (int j = 0; j < d; ++j) noise(i, j) = agent_rng.normal();
                const ActorUpdateResult res = actor_update(b, trn, noise);
                a_loss += res.actor_loss;

                const ReplayBuffer::Batch val = buffer.sample(batch_size, agent_rng);
                Mat noise_val(batch_size, d);
                for (int i = 0; i < batch_size; ++i)
                    for (int j = 0; j < d; ++j) noise_val(i, j) = agent_rng.normal();
                m_loss += meta_update(b, val, noise_val, res);

                soft_update(b.critic_target, b.critic, b.soft_tau);
                soft_update(b.actor_target, b.actor, b.soft_tau);
            }
            row.critic_loss = c_loss / g_max;
            row.actor_loss = a_loss / g_max;
            row.meta_loss = m_loss / g_max;
        }
        logs.push_back(row);
    }
    return logs;
}

// Uniform-random policy under the same environment stream; reference curve.
inline std::vector<EpisodeLog> run_random_policy(Environment& env, int episodes, Rng& agent_rng) {
    std::vector<EpisodeLog> logs;
    const int t_max = env.config().steps_per_episode;
    const int d = env.action_dim();
    for (int ep = 0; ep < episodes; ++ep) {
        env.reset();
        EpisodeLog row;
        row.episode = ep;
        for (int t = 0; t < t_max; ++t) {
            RealVec a(d);
            for (int j = 0; j < d; ++j) a[j] = agent_rng.uniform(-1.0, 1.0);
            const Environment::StepResult sr = env.step(a);
            row.reward += sr.reward;
            row.ee += sr.metrics.ee;
            row.rate += sr.metrics.sum_rate;
            row.power += sr.metrics.total_power;
        }
        row.reward /= t_max;
        row.ee /= t_max;
        row.rate /= t_max;
        row.power /= t_max;
        logs.push_back(row);
    }
    return logs;
}

struct EvalStats {
    double ee = 0.0;
    double rate = 0.0;
    double power = 0.0;
};

inline EvalStats evaluate_policy(const AgentBundle& b, Environment& env, int episodes, Rng& rng,
                                 bool deterministic) {
    EvalStats stats;
    const int t_max = env.config().steps_per_episode;
    long long steps = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        Vec state = b.scaler.apply(env.reset());
        for (int t = 0; t < t_max; ++t) {
            Vec a;
            if (deterministic) {
                a = mean_action(b.actor, state);
            } else {
                a = sample_squashed_gaussian(b.actor, state, rng).action;
            }
            sanitize_action(a);
            const Environment::StepResult sr = env.step(to_real_vec(a));
            state = b.scaler.apply(sr.state);
            stats.ee += sr.metrics.ee;
            stats.rate += sr.metrics.sum_rate;
            stats.power += sr.metrics.total_power;
            ++steps;
        }
    }
    if (steps > 0) {
        stats.ee /= steps;
        stats.rate /= steps;
        stats.power /= steps;
    }
    return stats;
}

}  // namespace fimstar
