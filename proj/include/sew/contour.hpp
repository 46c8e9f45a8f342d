/// @file contour.hpp
/// @brief Marching-squares level-set extraction on masked grids.
#pragma once

#include "sew/grid.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sew {

struct Contour {
    std::vector<Point> points;
    bool closed = false;
};

/// Polylines of {v = level} through cells whose four corners are unmasked.
/// Saddle cells are resolved by the cell-center average. On periodic grids
/// the wrap-around cells are included and points are wrapped into the cell.
std::vector<Contour> marching_squares(const GridSpec& spec, std::span<const double> values,
                                      std::span<const std::uint8_t> mask, double level);

/// Newton-project contour vertices onto {f = level}. Vertices that fail to
/// converge within max_shift are left where they are and flagged 0 in
/// converged (when given).
void refine_contours(const ScalarField& f, double level, std::vector<Contour>& contours, double max_shift,
                     std::vector<std::vector<std::uint8_t>>* converged = nullptr);

double polyline_length(const std::vector<Point>& pts, bool closed);

}  // namespace sew
