#pragma once

#include "uq/volume.hpp"

namespace uq {

// `radius` iterations with the 3x3x3 (26-neighbour) structuring element, i.e. a
// Chebyshev ball of the given radius. Voxels outside the grid count as false.
BinaryMask binary_dilate(const BinaryMask& mask, int radius);
BinaryMask binary_erode(const BinaryMask& mask, int radius);

// dilate(mask, r) XOR erode(mask, r): a shell about 2r voxels thick around the surface.
BinaryMask boundary_band(const BinaryMask& mask, int radius);

}  // namespace uq
