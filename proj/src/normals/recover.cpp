#include <cmath>

#include "gradscan/error.hpp"
#include "gradscan/normals.hpp"

namespace gradscan::normals {

NormalMap recover_normals(const ImageBuffer& r_xp, const ImageBuffer& r_xn, const ImageBuffer& r_yp,
                          const ImageBuffer& r_yn, const ValidityMask& mask, const RecoverOptions& options) {
  if (!r_xp.same_shape(r_xn) || !r_xp.same_shape(r_yp) || !r_xp.same_shape(r_yn))
    throw_invalid("gradient frames differ in dimensions");
  if (r_xp.channels() != 1) throw_invalid("gradient frames must be single-channel");
  if (mask.width() != r_xp.width() || mask.height() != r_xp.height())
    throw_invalid("validity mask dimensions differ from the frames");
  if (!(options.eps_z > 0.0 && options.eps_z < 1.0)) throw_invalid("eps_z must lie in (0,1)");

  NormalMap nm(r_xp.width(), r_xp.height());
  nm.mask = mask;
  const double max_sq = 1.0 - options.eps_z * options.eps_z;
  const double max_radius = std::sqrt(max_sq);
  for (std::size_t i = 0; i < nm.pixel_count(); ++i) {
    if (!mask.valid(i)) {
      nm[i] = Normal{};
      continue;
    }
    double nx = options.scale * (r_xp.data()[i] - r_xn.data()[i]);
    double ny = options.scale * (r_yp.data()[i] - r_yn.data()[i]);
    double sq = nx * nx + ny * ny;
    if (sq > max_sq) {
      const double k = max_radius / std::sqrt(sq);
      nx *= k;
      ny *= k;
      sq = max_sq;
      nm.clamped.set(i, true);
    }
    nm[i] = Normal{nx, ny, std::sqrt(1.0 - sq)};
  }
  return nm;
}

NormalMap recover_normals(const radiometric::NormalizedFrames& frames, const RecoverOptions& options) {
  NormalMap nm = recover_normals(frames.x_pos, frames.x_neg, frames.y_pos, frames.y_neg, frames.mask, options);
  auto src = frames.albedo.data();
  nm.albedo.assign(src.begin(), src.end());
  return nm;
}

}  // namespace gradscan::normals
