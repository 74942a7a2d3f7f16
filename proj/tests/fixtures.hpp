#pragma once

// Shared models and slow reference computations for the tests. The reference
// routines use plain nested loops over std::vector so they share no code with
// the Eigen-based tables in the library.

#include <cstdint>
#include <random>
#include <vector>

#include "agemdp/augmentation.hpp"
#include "agemdp/model.hpp"

namespace fixtures {

using agemdp::Matrix;

inline Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

inline agemdp::RawModel case_study_raw(double p = 0.5, int z_max = 20) {
    agemdp::RawModel raw;
    raw.kernels = {mat2(0.9, 0.1, 0.1, 0.9), mat2(0.6, 0.4, 0.01, 0.99)};
    raw.cost = mat2(40, 60, 0, 20);
    raw.delay = agemdp::DelayPmf::two_point(p, 1, 10);
    raw.z_max = z_max;
    return raw;
}

inline agemdp::MarkovControlModel case_study(double p = 0.5, int z_max = 20) {
    return agemdp::validate_model(case_study_raw(p, z_max));
}

// Small instance for exhaustive enumeration: two source states, two actions,
// delay in {1, 2}. Costs are picked so the optimum (about 5.571) is strictly
// inside the bounds [2, 17/3] and no single-action policy attains it.
inline agemdp::MarkovControlModel tiny(int z_max = 2) {
    agemdp::RawModel raw;
    raw.kernels = {mat2(0.7, 0.3, 0.2, 0.8), mat2(0.4, 0.6, 0.3, 0.7)};
    raw.cost = mat2(2.0, 7.0, 9.0, 5.0);
    raw.delay = {{1, 2}, {0.6, 0.4}};
    raw.z_max = z_max;
    return agemdp::validate_model(raw);
}

using Vec = std::vector<double>;

inline Vec step(const Vec& dist, const Matrix& P) {
    Vec out(dist.size(), 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        for (std::size_t j = 0; j < dist.size(); ++j) {
            out[j] += dist[i] * P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

// Source-state distribution at the next sampling instant.
inline Vec sampled_state_dist(const agemdp::MarkovControlModel& m, const agemdp::AugmentedState& g,
                              const agemdp::Decision& d) {
    Vec dist(m.num_states(), 0.0);
    dist[g.source_state] = 1.0;
    for (int k = 0; k < g.delay; ++k) dist = step(dist, m.kernel(g.prev_action));
    for (int k = 0; k < d.wait; ++k) dist = step(dist, m.kernel(d.action));
    return dist;
}

inline Vec reference_kernel_row(const agemdp::MarkovControlModel& m, const agemdp::AugmentedState& g,
                                const agemdp::Decision& d) {
    const agemdp::AugmentedSpace space(m);
    const Vec x = sampled_state_dist(m, g, d);
    Vec row(space.num_states(), 0.0);
    for (std::size_t s = 0; s < m.num_states(); ++s) {
        for (std::size_t yi = 0; yi < m.delay().size(); ++yi) {
            row[space.index({s, m.delay().support[yi], d.action})] += x[s] * m.delay().probs[yi];
        }
    }
    return row;
}

inline double reference_frame_cost(const agemdp::MarkovControlModel& m, const agemdp::AugmentedState& g,
                                   const agemdp::Decision& d) {
    double total = 0.0;
    for (std::size_t yi = 0; yi < m.delay().size(); ++yi) {
        Vec dist(m.num_states(), 0.0);
        dist[g.source_state] = 1.0;
        for (int k = 0; k < g.delay; ++k) dist = step(dist, m.kernel(g.prev_action));
        double acc = 0.0;
        for (int t = 0; t < d.wait + m.delay().support[yi]; ++t) {
            for (std::size_t s = 0; s < dist.size(); ++s) acc += dist[s] * m.cost(s, d.action);
            dist = step(dist, m.kernel(d.action));
        }
        total += m.delay().probs[yi] * acc;
    }
    return total;
}

// Random row-stochastic matrix with strictly positive diagonal and a
// random sparsity pattern; rejection-sampled until it has one closed class.
template <typename Check>
Matrix random_lazy_unichain(std::mt19937_64& gen, int n, Check is_unichain) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        Matrix P = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            P(i, i) = 0.1 + u(gen);
            for (int j = 0; j < n; ++j) {
                if (j != i && u(gen) < 0.35) P(i, j) = u(gen);
            }
            P.row(i) /= P.row(i).sum();
        }
        if (is_unichain(P)) return P;
    }
}

}  // namespace fixtures
