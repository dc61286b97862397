#include <algorithm>

#include "gradscan/error.hpp"
#include "gradscan/integrate.hpp"

namespace gradscan::integrate {

GradientField::GradientField(int w, int h)
    : width(w),
      height(h),
      p(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0),
      q(p.size(), 0.0),
      mask(w, h, true) {}

GradientField gradients_from_normals(const normals::NormalMap& nm, double eps_nz) {
  if (!(eps_nz > 0.0)) throw_invalid("eps_nz must be positive");
  GradientField g(nm.width(), nm.height());
  g.mask = nm.mask;
  for (std::size_t i = 0; i < nm.pixel_count(); ++i) {
    if (!g.mask.valid(i)) continue;
    const normals::Normal& n = nm[i];
    if (n.z < eps_nz) g.mask.set(i, false);
    const double nz = std::max(n.z, eps_nz);
    g.p[i] = -n.x / nz;
    g.q[i] = -n.y / nz;
  }
  return g;
}

}  // namespace gradscan::integrate
