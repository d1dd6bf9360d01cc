#include "twolayer/grid.hpp"

#include <cmath>

#include "twolayer/error.hpp"

namespace twolayer {

CompositeGrid::CompositeGrid(int nx0, int nx1, double l0, double l1)
    : nx0_(nx0), nx1_(nx1), l0_(l0), l1_(l1) {
    if (nx0 < 4 || nx1 < 4) throw ValidationError("grid needs at least 4 cells per layer");
    if (!(l0 > 0.0) || !(l1 > l0) || !std::isfinite(l1)) {
        throw ValidationError("grid requires 0 < l0 < l1");
    }
}

double CompositeGrid::matrix_x(std::size_t i) const {
    // Node nx0 is pinned to l0 exactly so both layers share the interface coordinate.
    if (i == matrix_nodes() - 1) return l0_;
    return l0_ * static_cast<double>(i) / nx0_;
}

double CompositeGrid::tissue_x(std::size_t j) const {
    if (j == 0) return l0_;
    if (j == tissue_nodes() - 1) return l1_;
    return l0_ + (l1_ - l0_) * static_cast<double>(j) / nx1_;
}

std::vector<double> CompositeGrid::matrix_coordinates() const {
    std::vector<double> x(matrix_nodes());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = matrix_x(i);
    return x;
}

std::vector<double> CompositeGrid::tissue_coordinates() const {
    std::vector<double> x(tissue_nodes());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = tissue_x(j);
    return x;
}

double CompositeGrid::matrix_weight(std::size_t i) const {
    return (i == 0 || i == matrix_nodes() - 1) ? 0.5 * h0() : h0();
}

double CompositeGrid::tissue_weight(std::size_t j) const {
    return (j == 0 || j == tissue_nodes() - 1) ? 0.5 * h1() : h1();
}

double CompositeGrid::integrate_matrix(std::span<const double> f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += matrix_weight(i) * f[i];
    return s;
}

double CompositeGrid::integrate_tissue(std::span<const double> f) const {
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += tissue_weight(j) * f[j];
    return s;
}

}  // namespace twolayer
