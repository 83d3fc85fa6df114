// Independent naive-loop reference implementations used as test oracles.
// These deliberately avoid the library's assembly code paths: complex
// exponentials are built from cos/sin, matrices are dense, and every sum is
// an explicit loop.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "fimstar/channel.hpp"
#include "fimstar/common.hpp"
#include "fimstar/geometry.hpp"
#include "fimstar/metrics.hpp"
#include "fimstar/ris.hpp"

namespace oracle {

using fimstar::cd;
using fimstar::CMat;
using fimstar::CVec;

inline cd unit_phasor(double phase) { return {std::cos(phase), std::sin(phase)}; }

inline cd steering_entry(double x, double y, double z, double azimuth, double elevation,
                         double wavenumber) {
    const double phase = wavenumber * (x * std::sin(elevation) * std::cos(azimuth) +
                                       y * std::sin(elevation) * std::sin(azimuth) +
                                       z * std::cos(elevation));
    return unit_phasor(phase);
}

inline CVec channel_sum(const fimstar::FimGeometry& geom, const fimstar::FimShape& shape,
                        const fimstar::PathCluster& cluster, double wavenumber) {
    CVec out(geom.size(), cd(0.0, 0.0));
    for (int m = 0; m < geom.size(); ++m)
        for (int p = 0; p < cluster.num_paths(); ++p)
            out[m] += cluster.gains[p] * steering_entry(geom.x_coords[m], shape.y[m],
                                                        geom.z_coords[m], cluster.azimuths[p],
                                                        cluster.elevations[p], wavenumber);
    return out;
}

// (h_ru)^H Phi (H_br)^H + g^H with a dense Phi, as an explicit triple loop.
inline CVec effective_channel_dense(const CVec& h_ru, const CMat& phi, const CMat& h_br,
                                    const CVec& g) {
    const int m_dim = h_br.rows;
    const int k_dim = h_br.cols;
    CVec t(k_dim, cd(0.0, 0.0));
    for (int k2 = 0; k2 < k_dim; ++k2)
        for (int k = 0; k < k_dim; ++k) t[k2] += std::conj(h_ru[k]) * phi(k, k2);
    CVec e(m_dim, cd(0.0, 0.0));
    for (int m = 0; m < m_dim; ++m) {
        for (int k2 = 0; k2 < k_dim; ++k2) e[m] += t[k2] * std::conj(h_br(m, k2));
        e[m] += std::conj(g[m]);
    }
    return e;
}

inline double received_power(const CVec& eff, const CVec& w) {
    cd acc(0.0, 0.0);
    for (std::size_t m = 0; m < eff.size(); ++m) acc += eff[m] * w[m];
    return std::norm(acc);
}

// Gamma_u^n(i) straight from the SINR definition, with a dense sector matrix
// chosen per user.
inline double sinr(int u, int desired, int n, const fimstar::AllocationDecision& d,
                   const fimstar::ChannelSet& cs, const CMat& phi_t_dense, const CMat& phi_r_dense,
                   const std::vector<fimstar::Sector>& sector_of_user) {
    if (d.alpha[d.flat(desired, n)] == 0) return 0.0;
    const CMat& phi =
        sector_of_user[u] == fimstar::Sector::transmission ? phi_t_dense : phi_r_dense;
    const CVec e = effective_channel_dense(cs.h_ru_at(u, n), phi, cs.h_br_at(n), cs.g_at(u, n));
    const double wanted = received_power(e, d.w[d.flat(desired, n)]);
    double interference = 0.0;
    for (int j = 0; j < d.num_users; ++j) {
        if (j == desired || d.alpha[d.flat(j, n)] == 0) continue;
        interference += received_power(e, d.w[d.flat(j, n)]);
    }
    return wanted / (interference + cs.noise_power);
}

}  // namespace oracle
