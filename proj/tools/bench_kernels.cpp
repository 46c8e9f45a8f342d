// Serial vs OpenMP timings for the grid kernels, with a bitwise agreement check.
#include "sew/calculus.hpp"
#include "sew/catalog.hpp"
#include "sew/kernels.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

using namespace sew;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid kernel benchmark"};
    int n = 512, reps = 3;
    std::string field = "sinsin";
    app.add_option("--n", n, "grid size")->check(CLI::Range(16, 8192));
    app.add_option("--reps", reps, "repetitions (best is reported)")->check(CLI::Range(1, 100));
    app.add_option("--field", field, "catalog field");
    CLI11_PARSE(app, argc, argv);

    auto f = catalog_field(field);
    const GridPtr g = sample_grid(*f, n, n);
    const GridSpec spec = g->spec();
    std::printf("field %s, grid %dx%d, threads %d\n", field.c_str(), n, n, kernels::thread_count());
    std::printf("%-12s %12s %12s %8s %s\n", "kernel", "serial[s]", "openmp[s]", "speedup", "identical");

    auto row = [&](const char* name, auto&& run) {
        std::vector<double> a, b;
        const double ts = best_of(reps, [&] { a = run(kernels::Exec::Serial); });
        const double tp = best_of(reps, [&] { b = run(kernels::Exec::Parallel); });
        std::printf("%-12s %12.5f %12.5f %8.2f %s\n", name, ts, tp, ts / tp, same_bits(a, b) ? "yes" : "NO");
    };

    row("sample", [&](kernels::Exec e) {
        std::vector<double> v(spec.size());
        std::vector<std::uint8_t> m(spec.size());
        kernels::sample_values(*f, spec, v, m, e);
        return v;
    });
    row("fd-laplace", [&](kernels::Exec e) { return fd::laplacian(*g, e)->values(); });
    const GridPtr lap = fd::laplacian(*g);
    row("fd-bracket", [&](kernels::Exec e) { return fd::bracket(*g, *lap, e)->values(); });
    row("norms", [&](kernels::Exec e) {
        const auto r = kernels::norms(spec, g->values(), g->mask(), e);
        return std::vector<double>{r.sup, r.l2};
    });
    row("residual", [&](kernels::Exec e) {
        ResidualOptions o;
        o.resolution = n;
        o.exec = e;
        const auto r = steady_residual(f, o);
        return std::vector<double>{r.sup, r.l2};
    });
    return 0;
}
