#include "sew/kernels.hpp"

#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sew::kernels {

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void for_each_node(const GridSpec& spec, const std::function<void(int, int)>& body, Exec exec) {
    if (exec == Exec::Serial) {
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) body(i, j);
        return;
    }
#pragma omp parallel for schedule(dynamic, 1)
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) body(i, j);
}

void sample_values(const ScalarField& f, const GridSpec& spec, std::span<double> values,
                   std::span<std::uint8_t> mask, Exec exec) {
    const Domain& dom = f.domain();
    for_each_node(
        spec,
        [&](int i, int j) {
            const std::size_t k = spec.index(i, j);
            const Point p = spec.node(i, j);
            if (dom.contains(p)) {
                values[k] = f.value(p);
                mask[k] = 1;
            } else {
                values[k] = std::numeric_limits<double>::quiet_NaN();
                mask[k] = 0;
            }
        },
        exec);
}

void evaluate(const GridSpec& spec, std::span<const std::uint8_t> include, const std::function<double(Point)>& g,
              std::span<double> out, Exec exec) {
    for_each_node(
        spec,
        [&](int i, int j) {
            const std::size_t k = spec.index(i, j);
            out[k] = include[k] ? g(spec.node(i, j)) : std::numeric_limits<double>::quiet_NaN();
        },
        exec);
}

Norms norms(const GridSpec& spec, std::span<const double> values, std::span<const std::uint8_t> include, Exec exec) {
    std::vector<double> row_sup(static_cast<std::size_t>(spec.ny), 0.0);
    std::vector<double> row_sq(static_cast<std::size_t>(spec.ny), 0.0);
    std::vector<std::size_t> row_n(static_cast<std::size_t>(spec.ny), 0);
    auto row = [&](int j) {
        double s = 0.0, q = 0.0;
        std::size_t n = 0;
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = spec.index(i, j);
            if (!include[k]) continue;
            const double v = values[k];
            s = std::max(s, std::abs(v));
            q += v * v;
            ++n;
        }
        row_sup[static_cast<std::size_t>(j)] = s;
        row_sq[static_cast<std::size_t>(j)] = q;
        row_n[static_cast<std::size_t>(j)] = n;
    };
    if (exec == Exec::Serial) {
        for (int j = 0; j < spec.ny; ++j) row(j);
    } else {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < spec.ny; ++j) row(j);
    }
    Norms r;
    double q = 0.0;
    for (std::size_t j = 0; j < row_sup.size(); ++j) {
        r.sup = std::max(r.sup, row_sup[j]);
        q += row_sq[j];
        r.count += row_n[j];
    }
    r.l2 = std::sqrt(q * spec.dx * spec.dy);
    return r;
}

}  // namespace sew::kernels
