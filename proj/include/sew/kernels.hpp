/// @file kernels.hpp
/// @brief Data-parallel grid kernels. Every kernel has a serial reference
/// path and an OpenMP path; both produce bit-identical results because
/// reductions are summed per row and rows are combined in index order.
#pragma once

#include "sew/grid.hpp"

#include <cstdint>
#include <functional>
#include <span>

namespace sew::kernels {

enum class Exec { Serial, Parallel };

/// Run body(i, j) for every node, rows distributed across threads.
void for_each_node(const GridSpec& spec, const std::function<void(int, int)>& body, Exec exec = Exec::Parallel);

/// values[k] = f(node k) where the node lies in the domain, NaN and mask 0 elsewhere.
void sample_values(const ScalarField& f, const GridSpec& spec, std::span<double> values,
                   std::span<std::uint8_t> mask, Exec exec = Exec::Parallel);

/// Evaluate g(node) on included nodes; NaN elsewhere.
void evaluate(const GridSpec& spec, std::span<const std::uint8_t> include, const std::function<double(Point)>& g,
              std::span<double> out, Exec exec = Exec::Parallel);

struct Norms {
    double sup = 0.0;
    double l2 = 0.0;
    std::size_t count = 0;
};

/// sup |v| and sqrt(sum v^2 dx dy) over included nodes.
Norms norms(const GridSpec& spec, std::span<const double> values, std::span<const std::uint8_t> include,
            Exec exec = Exec::Parallel);

/// Number of threads the parallel path uses.
int thread_count();

}  // namespace sew::kernels
