#include "ctlab/coupling.hpp"

#include "ctlab/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctlab {

const char* coupling_mode_name(CouplingMode mode) {
    return mode == CouplingMode::OT ? "ot" : "independent";
}

CouplingMode coupling_mode_from_name(const std::string& name) {
    if (name == "ot") return CouplingMode::OT;
    if (name == "independent") return CouplingMode::Independent;
    throw std::invalid_argument("unknown coupling mode: " + name);
}

Tensor cost_matrix(const Tensor& data, const Tensor& noise) {
    if (data.shape().size() != 2 || noise.shape().size() != 2 ||
        data.shape() != noise.shape())
        throw std::invalid_argument("cost_matrix: batches must share an (n x d) shape");
    const std::size_t n = data.shape()[0], d = data.shape()[1];
    std::vector<double> m(n * n);
    kernels::cost_matrix(m.data(), noise.data().data(), data.data().data(), n, d);
    return Tensor({n, n}, std::move(m));
}

Assignment solve_assignment(const Tensor& m) {
    if (m.shape().size() != 2 || m.shape()[0] != m.shape()[1] || m.shape()[0] == 0)
        throw std::invalid_argument("solve_assignment: need a non-empty square matrix");
    const std::size_t n = m.shape()[0];
    const std::vector<double>& cost = m.data();
    for (double v : cost)
        if (!std::isfinite(v))
            throw std::invalid_argument("solve_assignment: non-finite cost entry");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // row/column potentials; p[j] is the row matched to column j (1-based, 0 = free)
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment out;
    out.permutation.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) out.permutation[p[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) out.cost += cost[i * n + out.permutation[i]];
    return out;
}

Tensor couple_batch(const Tensor& data, const Tensor& noise, CouplingMode mode) {
    if (data.shape() != noise.shape())
        throw std::invalid_argument("couple_batch: batch shapes differ");
    if (mode == CouplingMode::Independent) return noise;

    const Assignment a = solve_assignment(cost_matrix(data, noise));
    const std::size_t n = data.shape()[0], d = data.shape()[1];
    std::vector<double> reordered(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c)
            reordered[a.permutation[i] * d + c] = noise.data()[i * d + c];
    return Tensor({n, d}, std::move(reordered));
}

}  // namespace ctlab
