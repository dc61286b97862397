#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

#include "gradscan/error.hpp"
#include "gradscan/integrate.hpp"

namespace gradscan::integrate {
namespace {

// FFTW's planner is not re-entrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan plan) : plan_(plan) {
    if (plan_ == nullptr) throw_invalid("FFTW could not create a plan");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

// Writes the even-reflected 2W x 2H extension of the midpoint x-gradients.
// Along x the field is odd (zero on the two seams), along y it is even.
void extend_x(const GradientField& g, double* out, int pw, int ph) {
  const int w = g.width;
  const int h = g.height;
  for (int r = 0; r < h; ++r) {
    double* row = out + static_cast<std::size_t>(r) * pw;
    std::fill(row, row + pw, 0.0);
    for (int c = 0; c + 1 < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const double mid = 0.5 * ((g.mask.valid(i) ? g.p[i] : 0.0) + (g.mask.valid(i + 1) ? g.p[i + 1] : 0.0));
      row[c] = mid;
      row[2 * w - 2 - c] = -mid;
    }
  }
  for (int r = h; r < ph; ++r) {
    const double* src = out + static_cast<std::size_t>(ph - 1 - r) * pw;
    std::copy(src, src + pw, out + static_cast<std::size_t>(r) * pw);
  }
}

void extend_y(const GradientField& g, double* out, int pw, int ph) {
  const int w = g.width;
  const int h = g.height;
  std::fill(out, out + static_cast<std::size_t>(pw) * ph, 0.0);
  for (int r = 0; r + 1 < h; ++r) {
    double* row = out + static_cast<std::size_t>(r) * pw;
    double* mirrored = out + static_cast<std::size_t>(2 * h - 2 - r) * pw;
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const std::size_t below = i + static_cast<std::size_t>(w);
      const double mid =
          0.5 * ((g.mask.valid(i) ? g.q[i] : 0.0) + (g.mask.valid(below) ? g.q[below] : 0.0));
      row[c] = mid;
      row[pw - 1 - c] = mid;
      mirrored[c] = -mid;
      mirrored[pw - 1 - c] = -mid;
    }
  }
}

}  // namespace

DepthMap frankot_chellappa(const GradientField& g, std::optional<double> pixel_pitch_mm) {
  if (g.width < 1 || g.height < 1) throw_invalid("gradient field is empty");
  const std::size_t n = static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
  if (g.p.size() != n || g.q.size() != n || g.mask.width() != g.width || g.mask.height() != g.height)
    throw_invalid("gradient field components differ in size");
  for (std::size_t i = 0; i < n; ++i) {
    if (g.mask.valid(i) && !(std::isfinite(g.p[i]) && std::isfinite(g.q[i])))
      throw_invalid("gradient field holds non-finite values");
  }
  if (pixel_pitch_mm && !(*pixel_pitch_mm > 0.0)) throw_invalid("pixel pitch must be positive");
  const double pitch = pixel_pitch_mm.value_or(1.0);

  const int pw = 2 * g.width;
  const int ph = 2 * g.height;
  const int cols = pw / 2 + 1;  // r2c output width
  const std::size_t real_size = static_cast<std::size_t>(pw) * ph;
  const std::size_t spectrum_size = static_cast<std::size_t>(cols) * ph;

  auto gx = fftw_buffer<double>(real_size);
  auto gy = fftw_buffer<double>(real_size);
  auto gx_hat = fftw_buffer<fftw_complex>(spectrum_size);
  auto gy_hat = fftw_buffer<fftw_complex>(spectrum_size);

  std::unique_ptr<Plan> fwd_x;
  std::unique_ptr<Plan> fwd_y;
  std::unique_ptr<Plan> inverse;
  {
    std::lock_guard lock(planner_mutex());
    fwd_x = std::make_unique<Plan>(fftw_plan_dft_r2c_2d(ph, pw, gx.get(), gx_hat.get(), FFTW_ESTIMATE));
    fwd_y = std::make_unique<Plan>(fftw_plan_dft_r2c_2d(ph, pw, gy.get(), gy_hat.get(), FFTW_ESTIMATE));
    inverse = std::make_unique<Plan>(fftw_plan_dft_c2r_2d(ph, pw, gx_hat.get(), gx.get(), FFTW_ESTIMATE));
  }

  extend_x(g, gx.get(), pw, ph);
  extend_y(g, gy.get(), pw, ph);
  fwd_x->execute();
  fwd_y->execute();

  // Forward difference z[n+1] - z[n] has symbol (e^{i w} - 1) / pitch under
  // FFTW's e^{-i w n} forward convention.
  using cplx = std::complex<double>;
  for (int l = 0; l < ph; ++l) {
    const double wy = 2.0 * M_PI * l / ph;
    const cplx dy = (cplx(std::cos(wy), std::sin(wy)) - 1.0) / pitch;
    for (int k = 0; k < cols; ++k) {
      const std::size_t idx = static_cast<std::size_t>(l) * cols + k;
      const double wx = 2.0 * M_PI * k / pw;
      const cplx dx = (cplx(std::cos(wx), std::sin(wx)) - 1.0) / pitch;
      const double denom = std::norm(dx) + std::norm(dy);
      cplx z(0.0, 0.0);
      if (denom > 0.0) {
        const cplx px(gx_hat[idx][0], gx_hat[idx][1]);
        const cplx py(gy_hat[idx][0], gy_hat[idx][1]);
        z = (std::conj(dx) * px + std::conj(dy) * py) / denom;
      }
      gx_hat[idx][0] = z.real();
      gx_hat[idx][1] = z.imag();
    }
  }
  inverse->execute();

  DepthMap depth;
  depth.width = g.width;
  depth.height = g.height;
  depth.pixel_pitch_mm = pitch;
  depth.metric = pixel_pitch_mm.has_value();
  depth.mask = g.mask;
  depth.z.assign(n, 0.0);
  const double norm = 1.0 / static_cast<double>(real_size);
  double sum = 0.0;
  std::size_t valid = 0;
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * g.width + c;
      const double v = gx[static_cast<std::size_t>(r) * pw + c] * norm;
      depth.z[i] = v;
      if (g.mask.valid(i)) {
        sum += v;
        ++valid;
      }
    }
  }
  const double mean = valid > 0 ? sum / static_cast<double>(valid) : 0.0;
  for (std::size_t i = 0; i < n; ++i) depth.z[i] = g.mask.valid(i) ? depth.z[i] - mean : 0.0;
  return depth;
}

}  // namespace gradscan::integrate
