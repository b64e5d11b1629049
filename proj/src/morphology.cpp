#include "uq/morphology.hpp"

#include <vector>

namespace uq {
namespace {

// One step of a 3-wide running max (dilate) or min (erode) along `axis`,
// padding with false. Three axis passes make one 3x3x3 step.
void sweep(std::vector<std::uint8_t>& buf, std::vector<std::uint8_t>& tmp,
           const std::array<std::uint32_t, 3>& dims, int axis, bool dilate) {
    const Index nx = dims[0], ny = dims[1], nz = dims[2];
    const Index stride = axis == 0 ? 1 : (axis == 1 ? nx : nx * ny);
    const Index len = static_cast<Index>(dims[axis]);
    tmp = buf;
    for (Index z = 0; z < nz; ++z) {
        for (Index y = 0; y < ny; ++y) {
            for (Index x = 0; x < nx; ++x) {
                const Index pos[3] = {x, y, z};
                const Index p = pos[axis];
                const Index i = x + nx * (y + ny * z);
                const std::uint8_t lo = p > 0 ? buf[i - stride] : 0;
                const std::uint8_t hi = p + 1 < len ? buf[i + stride] : 0;
                if (dilate)
                    tmp[i] = buf[i] | lo | hi;
                else
                    tmp[i] = buf[i] & lo & hi;
            }
        }
    }
    buf.swap(tmp);
}

BinaryMask morph(const BinaryMask& mask, int radius, bool dilate) {
    if (radius < 0) throw Error(Errc::ConfigInvalid, "morphology radius must be non-negative");
    if (radius == 0) return mask;
    const auto& dims = mask.meta().dims;
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(mask.voxels()));
    for (Index i = 0; i < mask.voxels(); ++i) buf[static_cast<std::size_t>(i)] = mask(0, i) ? 1 : 0;
    std::vector<std::uint8_t> tmp;
    for (int step = 0; step < radius; ++step)
        for (int axis = 0; axis < 3; ++axis) sweep(buf, tmp, dims, axis, dilate);
    BinaryMask out(mask.meta());
    for (Index i = 0; i < mask.voxels(); ++i) out(0, i) = buf[static_cast<std::size_t>(i)] != 0;
    return out;
}

}  // namespace

BinaryMask binary_dilate(const BinaryMask& mask, int radius) { return morph(mask, radius, true); }

BinaryMask binary_erode(const BinaryMask& mask, int radius) { return morph(mask, radius, false); }

BinaryMask boundary_band(const BinaryMask& mask, int radius) {
    const auto grown = binary_dilate(mask, radius);
    const auto shrunk = binary_erode(mask, radius);
    BinaryMask band(mask.meta());
    band.channel(0) = grown.channel(0) != shrunk.channel(0);
    return band;
}

}  // namespace uq
