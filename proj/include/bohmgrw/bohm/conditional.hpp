#pragma once

#include <cmath>
#include <string>

#include "bohmgrw/field.hpp"
#include "bohmgrw/interp.hpp"

namespace bohmgrw::bohm {

/// System wave function obtained by inserting the actual environment
/// position into the joint wave function and renormalizing.
struct ConditionalWaveFunction {
  ComplexField1D field;
  double conditioning_point;
};

/// Unnormalized slice psi(., Y), cubic in y; samples outside the y grid read as zero.
inline ComplexField1D slice_at(const JointField2D& joint, double y) {
  const auto& gy = joint.grid_y();
  const auto ny = static_cast<long>(gy.size());
  const double s = (y - gy.x_min()) / gy.dx();
  ComplexField1D out(joint.grid_x());
  for (std::size_t ix = 0; ix < joint.grid_x().size(); ++ix) {
    out[ix] = interp::cubic(s, [&](long j) {
      return (j < 0 || j >= ny) ? cplx(0.0) : joint.at(ix, static_cast<std::size_t>(j));
    });
  }
  return out;
}

inline ConditionalWaveFunction conditional_wavefunction(const JointField2D& joint, double y) {
  auto slice = slice_at(joint, y);
  const double norm2 = slice.norm_squared();
  if (!(norm2 > 1e-14))
    throw Error(Errc::null_slice, "conditioning on y=" + std::to_string(y) + " gives slice norm " +
                                      sci(norm2));
  slice.normalize();
  return {std::move(slice), y};
}

}  // namespace bohmgrw::bohm
