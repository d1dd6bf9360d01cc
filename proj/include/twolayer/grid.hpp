#pragma once

#include <span>
#include <vector>

namespace twolayer {

/// Vertex-centred composite grid. Matrix nodes 0..nx0 cover [0, l0], tissue nodes
/// 0..nx1 cover [l0, l1]; the interface x = l0 appears in both node sets.
class CompositeGrid {
public:
    CompositeGrid(int nx0, int nx1, double l0, double l1);

    int nx0() const { return nx0_; }
    int nx1() const { return nx1_; }
    double l0() const { return l0_; }
    double l1() const { return l1_; }
    double h0() const { return l0_ / nx0_; }
    double h1() const { return (l1_ - l0_) / nx1_; }

    std::size_t matrix_nodes() const { return static_cast<std::size_t>(nx0_) + 1; }
    std::size_t tissue_nodes() const { return static_cast<std::size_t>(nx1_) + 1; }

    double matrix_x(std::size_t i) const;
    double tissue_x(std::size_t j) const;
    std::vector<double> matrix_coordinates() const;
    std::vector<double> tissue_coordinates() const;

    /// Trapezoidal integrals over each layer.
    double integrate_matrix(std::span<const double> f) const;
    double integrate_tissue(std::span<const double> f) const;

    /// Trapezoidal quadrature weights (h/2 at layer ends, h inside).
    double matrix_weight(std::size_t i) const;
    double tissue_weight(std::size_t j) const;

    bool operator==(const CompositeGrid&) const = default;

private:
    int nx0_;
    int nx1_;
    double l0_;
    double l1_;
};

}  // namespace twolayer
