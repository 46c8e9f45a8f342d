/// @file grid.hpp
/// @brief Uniform sampling grids and grid-backed fields.
#pragma once

#include "sew/field.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sew {

struct GridSpec {
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0, dx = 0.0, dy = 0.0;
    bool periodic = false;

    Point node(int i, int j) const { return {x0 + i * dx, y0 + j * dy}; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

/// Grid covering the domain's bounding box. Periodic domains use nx cells of
/// width Lx/nx; others place nodes on both ends of the box.
GridSpec grid_for(const Domain& domain, int nx, int ny);

/// Grid derivative cap.
inline constexpr int kGridOrder = 4;

/// Sampled field with masked nodes outside the domain. Evaluation uses
/// tensor-product Lagrange interpolation on 7-node stencils (degree 6),
/// falling back to 5-node stencils next to masked nodes.
class GridField final : public ScalarField {
public:
    GridField(std::string name, Domain domain, GridSpec spec, std::vector<double> values, std::vector<std::uint8_t> mask);

    const Domain& domain() const override { return domain_; }
    int max_order() const override { return kGridOrder; }
    FieldSource source() const override { return FieldSource::Grid; }
    std::string name() const override { return name_; }
    Jet jet(Point p, int order) const override;
    double value(Point p) const override { return jet(p, 0).value(); }

    const GridSpec& spec() const { return spec_; }
    const std::vector<double>& values() const { return values_; }
    /// 1 where the node lies inside the domain.
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    double at(int i, int j) const { return values_[spec_.index(i, j)]; }
    bool active(int i, int j) const { return mask_[spec_.index(i, j)] != 0; }
    std::size_t masked_count() const;

    /// CSV dump: header "# nx ny x0 y0 dx dy", then ny rows of nx values, "nan" where masked.
    void write_csv(std::ostream& os) const;

private:
    std::string name_;
    Domain domain_;
    GridSpec spec_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

using GridPtr = std::shared_ptr<const GridField>;

/// Sample a field at grid nodes (OpenMP over rows). Requires nx, ny >= 16.
GridPtr sample_grid(const ScalarField& field, int nx, int ny);

/// Taylor coefficients (order <= 4) at xi of the W Lagrange basis polynomials
/// on nodes 0..W-1: out[m][a] = (1/a!) d^a l_m (xi).
void lagrange_taylor(int width, double xi, int order, std::vector<std::array<double, kGridOrder + 1>>& out);

}  // namespace sew
