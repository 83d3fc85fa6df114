#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fimstar/common.hpp"

namespace fimstar {

// Per-element parameterization of the dual-sector surface:
//   Phi^{T,k} = sqrt(beta_k)   * exp(j theta_k^T)
//   Phi^{R,k} = sqrt(1-beta_k) * exp(j theta_k^R)
// which satisfies sum_s |Phi^{s,k}|^2 = 1 by construction.
struct StarBdRisParams {
    std::vector<double> beta;
    std::vector<double> phase_t;
    std::vector<double> phase_r;

    int size() const { return static_cast<int>(beta.size()); }

    void validate() const {
        require(beta.size() == phase_t.size() && beta.size() == phase_r.size(),
                "StarBdRisParams: field lengths differ");
        for (double b : beta)
            require(b >= 0.0 && b <= 1.0, "StarBdRisParams: beta outside [0,1]");
        for (double p : phase_t) require(std::isfinite(p), "StarBdRisParams: phase_t not finite");
        for (double p : phase_r) require(std::isfinite(p), "StarBdRisParams: phase_r not finite");
    }
};

// Diagonals of the two sector matrices. Off-diagonal entries are structurally
// zero under the cell-wise single-connected architecture, so only the
// diagonals are stored; to_dense() materializes full matrices when needed.
struct SectorMatrices {
    CVec phi_t;
    CVec phi_r;

    int size() const { return static_cast<int>(phi_t.size()); }

    CMat dense_t() const { return to_dense(phi_t); }
    CMat dense_r() const { return to_dense(phi_r); }

private:
    static CMat to_dense(const CVec& d) {
        const int k = static_cast<int>(d.size());
        CMat m(k, k);
        for (int i = 0; i < k; ++i) m(i, i) = d[i];
        return m;
    }
};

inline SectorMatrices build_sector_matrices(const StarBdRisParams& params) {
    params.validate();
    const int k = params.size();
    SectorMatrices m;
    m.phi_t.resize(k);
    m.phi_r.resize(k);
    for (int i = 0; i < k; ++i) {
        m.phi_t[i] = std::polar(std::sqrt(params.beta[i]), params.phase_t[i]);
        m.phi_r[i] = std::polar(std::sqrt(1.0 - params.beta[i]), params.phase_r[i]);
    }
    return m;
}

// Max-norm of sum_s (Phi^s)^H Phi^s - I. Zero iff the joint unitary
// constraint holds; for diagonal sectors the sum is diagonal as well.
inline double check_joint_unitary(const SectorMatrices& m) {
    double worst = 0.0;
    for (int i = 0; i < m.size(); ++i) {
        const double p = std::norm(m.phi_t[i]) + std::norm(m.phi_r[i]);
        worst = std::max(worst, std::abs(p - 1.0));
    }
    return worst;
}

// Maps squashed agent outputs in [-1,1] onto valid surface parameters.
inline StarBdRisParams project_raw(const std::vector<double>& raw_beta,
                                   const std::vector<double>& raw_phase_t,
                                   const std::vector<double>& raw_phase_r) {
    require(raw_beta.size() == raw_phase_t.size() && raw_beta.size() == raw_phase_r.size(),
            "project_raw: input lengths differ");
    const std::size_t k = raw_beta.size();
    StarBdRisParams p;
    p.beta.resize(k);
    p.phase_t.resize(k);
    p.phase_r.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        p.beta[i] = std::clamp(0.5 * (raw_beta[i] + 1.0), 0.0, 1.0);
        p.phase_t[i] = (raw_phase_t[i] + 1.0) * kPi;
        p.phase_r[i] = (raw_phase_r[i] + 1.0) * kPi;
    }
    return p;
}

// Conventional diagonal RIS: reflection only, full amplitude. Transmission
// side users are left with the direct link.
inline SectorMatrices d_ris_baseline(const StarBdRisParams& params) {
    params.validate();
    const int k = params.size();
    SectorMatrices m;
    m.phi_t.assign(k, cd(0.0, 0.0));
    m.phi_r.resize(k);
    for (int i = 0; i < k; ++i) m.phi_r[i] = std::polar(1.0, params.phase_r[i]);
    return m;
}

// Surface absent: both sectors zero. Used by the no-RIS ablation.
inline SectorMatrices zero_sectors(int k) {
    SectorMatrices m;
    m.phi_t.assign(k, cd(0.0, 0.0));
    m.phi_r.assign(k, cd(0.0, 0.0));
    return m;
}

}  // namespace fimstar
