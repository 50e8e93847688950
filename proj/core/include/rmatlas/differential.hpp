#pragma once

#include <array>
#include <cstddef>

#include "rmatlas/fields.hpp"

namespace rmatlas {

/// First-derivative stencil along one axis at one voxel: up to three (linear
/// offset, weight) pairs, weights already divided by the spacing.
struct AxisStencil {
  std::array<std::ptrdiff_t, 3> offset{};
  std::array<double, 3> weight{};
  int count = 0;
};

/// Second-order central difference where both neighbours are available,
/// second-order one-sided where the mask (or grid edge) truncates one side,
/// first-order when only one neighbour exists. Pass mask == nullptr to use
/// the whole grid. Throws Error when the voxel has no neighbour along `axis`.
AxisStencil derivative_stencil(const Grid& grid, const MaskField* mask, std::size_t voxel, int axis);

/// d(component)/dx_axis at `voxel` for any field.
double partial(const FieldBase& field, int component, const AxisStencil& st, std::size_t voxel);

/// Gamma^k_{ij} = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij) on masked voxels, zero elsewhere.
ChristoffelField christoffel_symbols(const MetricField& g, const MaskField& mask);

/// (nabla_V V)^k = V^i d_i V^k + Gamma^k_ij V^i V^j on masked voxels, zero elsewhere.
VectorField covariant_derivative_vv(const VectorField& v, const MetricField& g, const MaskField& mask);
VectorField covariant_derivative_vv(const VectorField& v, const ChristoffelField& gamma, const MaskField& mask);

/// div X = (1/sqrt(det g)) d_i (sqrt(det g) X^i).
ScalarField riemannian_divergence(const VectorField& x, const MetricField& g, const MaskField& mask);

/// grad alpha = g^{-1} (d alpha / dx^i).
VectorField riemannian_gradient(const ScalarField& alpha, const MetricField& g, const MaskField& mask);

/// Plain partial derivatives (d alpha / dx^i) on masked voxels.
VectorField differential(const ScalarField& alpha, const MaskField& mask);

}  // namespace rmatlas
