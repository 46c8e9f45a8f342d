#include "doctest.h"
#include "sew/calculus.hpp"
#include "sew/catalog.hpp"
#include "sew/kernels.hpp"

#include <cstring>

using namespace sew;

TEST_CASE("serial and parallel sampling agree bit for bit") {
    auto f = catalog_field("two-bump");
    const GridSpec s = grid_for(f->domain(), 97, 83);
    std::vector<double> a(s.size()), b(s.size());
    std::vector<std::uint8_t> ma(s.size()), mb(s.size());
    kernels::sample_values(*f, s, a, ma, kernels::Exec::Serial);
    kernels::sample_values(*f, s, b, mb, kernels::Exec::Parallel);
    CHECK(ma == mb);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("norm reductions are deterministic") {
    auto f = catalog_field("perturbed");
    const auto serial = steady_residual(f, {.resolution = 128, .region = {}, .exec = kernels::Exec::Serial});
    const auto par = steady_residual(f, {.resolution = 128, .region = {}, .exec = kernels::Exec::Parallel});
    CHECK(serial.sup == par.sup);
    CHECK(serial.l2 == par.l2);
    CHECK(serial.nodes == par.nodes);
    const auto again = steady_residual(f, {.resolution = 128, .region = {}, .exec = kernels::Exec::Parallel});
    CHECK(again.l2 == par.l2);
}

TEST_CASE("finite differences agree across execution modes") {
    auto g = sample_grid(*catalog_field("disk-eigen"), 80, 80);
    const auto a = fd::laplacian(*g, kernels::Exec::Serial);
    const auto b = fd::laplacian(*g, kernels::Exec::Parallel);
    CHECK(a->mask() == b->mask());
    for (std::size_t k = 0; k < a->values().size(); ++k)
        if (a->mask()[k]) CHECK(a->values()[k] == b->values()[k]);
}
