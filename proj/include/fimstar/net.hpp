#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fimstar/common.hpp"
#include "fimstar/rng.hpp"

#include <json.hpp>

namespace fimstar {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Feed-forward network with ReLU hidden activations and identity output.
// Batches are row-major: one sample per row.
struct Mlp {
    std::vector<Mat> w;  // w[l] is out x in
    std::vector<Vec> b;

    int num_layers() const { return static_cast<int>(w.size()); }
    int in_dim() const { return static_cast<int>(w.front().cols()); }
    int out_dim() const { return static_cast<int>(w.back().rows()); }

    std::vector<int> widths() const {
        std::vector<int> out;
        out.push_back(in_dim());
        for (const Mat& m : w) out.push_back(static_cast<int>(m.rows()));
        return out;
    }

    // Weight count only (biases excluded), matching the layer-product
    // complexity expression.
    long long weight_count() const {
        long long n = 0;
        for (const Mat& m : w) n += m.size();
        return n;
    }

    void validate() const {
        require(!w.empty() && w.size() == b.size(), "Mlp: empty or inconsistent layer lists");
        for (std::size_t l = 0; l < w.size(); ++l) {
            require(w[l].rows() == b[l].size(), "Mlp: bias length mismatch");
            if (l + 1 < w.size())
                require(w[l + 1].cols() == w[l].rows(), "Mlp: consecutive layer dimensions must chain");
        }
    }
};

enum class FinalLayerInit { zero, small };

// He-uniform hidden layers; the final layer starts at zero (actor/critic) or
// small uniform (meta-critic, which must emit a nonzero gradient from the
// start to ever influence training).
inline Mlp build_mlp(const std::vector<int>& widths, Rng& rng,
                     FinalLayerInit final_init = FinalLayerInit::zero) {
    require(widths.size() >= 2, "build_mlp: need at least input and output widths");
    Mlp net;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int in = widths[l];
        const int out = widths[l + 1];
        require(in >= 1 && out >= 1, "build_mlp: widths must be positive");
        Mat w(out, in);
        const bool last = l + 2 == widths.size();
        const double bound = last ? (final_init == FinalLayerInit::zero ? 0.0 : 1e-2)
                                  : std::sqrt(6.0 / in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
        net.w.push_back(std::move(w));
        net.b.push_back(Vec::Zero(out));
    }
    return net;
}

inline void randomize_mlp(Mlp& net, Rng& rng, double scale) {
    for (Mat& w : net.w)
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-scale, scale);
    for (Vec& b : net.b)
        for (int i = 0; i < b.size(); ++i) b[i] = rng.uniform(-scale, scale);
}

struct ForwardCache {
    std::vector<Mat> inputs;  // inputs[l] is the (post-activation) input to layer l
    Mat output;
};

inline Mat forward_cached(const Mlp& net, const Mat& x, ForwardCache& cache) {
    require(x.cols() == net.in_dim(), "forward: input width mismatch");
    cache.inputs.clear();
    cache.inputs.reserve(net.w.size());
    Mat a = x;
    for (int l = 0; l < net.num_layers(); ++l) {
        cache.inputs.push_back(a);
        Mat z = a * net.w[l].transpose();
        z.rowwise() += net.b[l].transpose();
        if (l + 1 < net.num_layers())
            a = z.cwiseMax(0.0);
        else
            a = std::move(z);
    }
    cache.output = a;
    return a;
}

inline Mat forward(const Mlp& net, const Mat& x) {
    ForwardCache cache;
    return forward_cached(net, x, cache);
}

inline Vec forward1(const Mlp& net, const Vec& x) {
    const Mat out = forward(net, Mat(x.transpose()));
    return out.row(0).transpose();
}

struct MlpGrad {
    std::vector<Mat> dw;
    std::vector<Vec> db;

    static MlpGrad zeros_like(const Mlp& net) {
        MlpGrad g;
        for (const Mat& w : net.w) g.dw.push_back(Mat::Zero(w.rows(), w.cols()));
        for (const Vec& b : net.b) g.db.push_back(Vec::Zero(b.size()));
        return g;
    }

    void scale(double s) {
        for (Mat& m : dw) m *= s;
        for (Vec& v : db) v *= s;
    }

    double global_norm() const {
        double sq = 0.0;
        for (const Mat& m : dw) sq += m.squaredNorm();
        for (const Vec& v : db) sq += v.squaredNorm();
        return std::sqrt(sq);
    }
};

// Exact reverse-mode pass. `dout` is dL/d(output); returns dL/d(input).
// Parameter gradients accumulate into `acc` when provided.
inline Mat backward(const Mlp& net, const ForwardCache& cache, const Mat& dout, MlpGrad* acc) {
    require(static_cast<int>(cache.inputs.size()) == net.num_layers(),
            "backward: cache does not match network");
    require(dout.rows() == cache.output.rows() && dout.cols() == cache.output.cols(),
            "backward: upstream gradient shape mismatch");
    Mat delta = dout;
    for (int l = net.num_layers() - 1; l >= 0; --l) {
        if (l + 1 < net.num_layers()) {
            // ReLU mask of layer l's post-activation, which is layer l+1's input.
            delta = delta.cwiseProduct(
                (cache.inputs[l + 1].array() > 0.0).cast<double>().matrix());
        }
        if (acc != nullptr) {
            acc->dw[l] += delta.transpose() * cache.inputs[l];
            acc->db[l] += delta.colwise().sum().transpose();
        }
        delta = delta * net.w[l];
    }
    return delta;
}

// Plain SGD with optional global-norm clipping.
inline void sgd_step(Mlp& net, const MlpGrad& grad, double lr, double clip = 0.0) {
    double scale = 1.0;
    if (clip > 0.0) {
        const double norm = grad.global_norm();
        if (norm > clip) scale = clip / norm;
    }
    for (int l = 0; l < net.num_layers(); ++l) {
        net.w[l] -= lr * scale * grad.dw[l];
        net.b[l] -= lr * scale * grad.db[l];
    }
}

// theta' <- tau * theta + (1 - tau) * theta'
inline void soft_update(Mlp& target, const Mlp& source, double tau) {
    require(target.num_layers() == source.num_layers(), "soft_update: architecture mismatch");
    for (int l = 0; l < target.num_layers(); ++l) {
        require(target.w[l].rows() == source.w[l].rows() && target.w[l].cols() == source.w[l].cols(),
                "soft_update: layer shape mismatch");
        target.w[l] = tau * source.w[l] + (1.0 - tau) * target.w[l];
        target.b[l] = tau * source.b[l] + (1.0 - tau) * target.b[l];
    }
}

// ---- flat parameter access (tests, finite differences) ----

inline long long param_count(const Mlp& net) {
    long long n = 0;
    for (const Mat& w : net.w) n += w.size();
    for (const Vec& b : net.b) n += b.size();
    return n;
}

inline double get_param(const Mlp& net, long long idx) {
    for (const Mat& w : net.w) {
        if (idx < w.size()) return w.data()[idx];
        idx -= w.size();
    }
    for (const Vec& b : net.b) {
        if (idx < b.size()) return b[idx];
        idx -= b.size();
    }
    throw std::invalid_argument("get_param: index out of range");
}

inline void set_param(Mlp& net, long long idx, double value) {
    for (Mat& w : net.w) {
        if (idx < w.size()) {
            w.data()[idx] = value;
            return;
        }
        idx -= w.size();
    }
    for (Vec& b : net.b) {
        if (idx < b.size()) {
            b[idx] = value;
            return;
        }
        idx -= b.size();
    }
    throw std::invalid_argument("set_param: index out of range");
}

inline double get_grad(const MlpGrad& g, long long idx) {
    for (const Mat& w : g.dw) {
        if (idx < w.size()) return w.data()[idx];
        idx -= w.size();
    }
    for (const Vec& b : g.db) {
        if (idx < b.size()) return b[idx];
        idx -= b.size();
    }
    throw std::invalid_argument("get_grad: index out of range");
}

// ---- squashed Gaussian policy head ----

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEps = 1e-6;

// The actor emits [mean | raw log_std]; log_std is clamped to [-20, 2].
struct GaussianPolicyOutput {
    Vec mean;
    Vec log_std;
    Vec xi;      // standard normal draw
    Vec pre;     // mean + std .* xi
    Vec action;  // tanh(pre)
    double log_prob = 0.0;
};

inline double squashed_log_prob(const Vec& log_std, const Vec& xi, const Vec& action) {
    const int d = static_cast<int>(action.size());
    double lp = 0.0;
    for (int i = 0; i < d; ++i) {
        lp += -log_std[i] - 0.5 * xi[i] * xi[i] - 0.5 * std::log(kTwoPi);
        lp -= std::log(1.0 - action[i] * action[i] + kSquashEps);
    }
    return lp;
}

inline GaussianPolicyOutput squashed_gaussian_with_noise(const Mlp& actor, const Vec& state,
                                                         const Vec& xi) {
    const Vec head = forward1(actor, state);
    require(head.size() % 2 == 0, "squashed_gaussian: actor output width must be even");
    const int d = static_cast<int>(head.size()) / 2;
    require(xi.size() == d, "squashed_gaussian: noise length mismatch");
    GaussianPolicyOutput out;
    out.mean = head.head(d);
    out.log_std = head.tail(d).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    out.xi = xi;
    out.pre = out.mean + out.log_std.array().exp().matrix().cwiseProduct(xi);
    out.action = out.pre.array().tanh().matrix();
    out.log_prob = squashed_log_prob(out.log_std, xi, out.action);
    return out;
}

inline GaussianPolicyOutput sample_squashed_gaussian(const Mlp& actor, const Vec& state, Rng& rng) {
    const int d = actor.out_dim() / 2;
    Vec xi(d);
    for (int i = 0; i < d; ++i) xi[i] = rng.normal();
    return squashed_gaussian_with_noise(actor, state, xi);
}

inline Vec mean_action(const Mlp& actor, const Vec& state) {
    const Vec head = forward1(actor, state);
    const int d = static_cast<int>(head.size()) / 2;
    return head.head(d).array().tanh().matrix();
}

// ---- checkpoint serialization ----
// Layout: u32 little-endian header length, JSON header, then raw float64
// little-endian blocks (per layer: weights row-major, then bias).

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

inline constexpr const char* kCheckpointVersion = "fimstar-ckpt-1";

inline void save_mlp(std::ostream& os, const Mlp& net) {
    net.validate();
    nlohmann::json header;
    header["version"] = kCheckpointVersion;
    header["widths"] = net.widths();
    const std::string text = header.dump();
    const std::uint32_t len = static_cast<std::uint32_t>(text.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (int l = 0; l < net.num_layers(); ++l) {
        for (int r = 0; r < net.w[l].rows(); ++r)
            for (int c = 0; c < net.w[l].cols(); ++c) {
                const double v = net.w[l](r, c);
                os.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
        for (int i = 0; i < net.b[l].size(); ++i) {
            const double v = net.b[l][i];
            os.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
}

inline Mlp load_mlp(std::istream& is) {
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    require(is.good(), "load_mlp: truncated header length");
    std::string text(len, '\0');
    is.read(text.data(), static_cast<std::streamsize>(len));
    require(is.good(), "load_mlp: truncated header");
    const nlohmann::json header = nlohmann::json::parse(text);
    require(header.at("version").get<std::string>() == kCheckpointVersion,
            "load_mlp: unsupported checkpoint version");
    const std::vector<int> widths = header.at("widths").get<std::vector<int>>();
    require(widths.size() >= 2, "load_mlp: invalid widths");
    Mlp net;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        net.w.emplace_back(widths[l + 1], widths[l]);
        net.b.emplace_back(widths[l + 1]);
    }
    auto read_double = [&is]() {
        double v = 0.0;
        is.read(reinterpret_cast<char*>(&v), sizeof(v));
        require(is.good(), "load_mlp: truncated parameter block");
        return v;
    };
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        for (int r = 0; r < net.w[l].rows(); ++r)
            for (int c = 0; c < net.w[l].cols(); ++c) net.w[l](r, c) = read_double();
        for (int i = 0; i < net.b[l].size(); ++i) net.b[l][i] = read_double();
    }
    return net;
}

}  // namespace fimstar
