#include "amod/flow.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "amod/common.hpp"

namespace amod {

namespace {

using Grid = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Grid to_grid(const Image<float>& img) { return img.plane(0); }

// 5-tap binomial smoothing, replicate borders.
Grid smooth(const Grid& in) {
  static const float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  const Eigen::Index h = in.rows(), w = in.cols();
  Grid tmp(h, w), out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int i = -2; i <= 2; ++i) {
        Eigen::Index xx = std::clamp<Eigen::Index>(x + i, 0, w - 1);
        acc += k[i + 2] * in(y, xx);
      }
      tmp(y, x) = acc;
    }
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int i = -2; i <= 2; ++i) {
        Eigen::Index yy = std::clamp<Eigen::Index>(y + i, 0, h - 1);
        acc += k[i + 2] * tmp(yy, x);
      }
      out(y, x) = acc;
    }
  return out;
}

Grid resize_grid(const Grid& in, Eigen::Index oh, Eigen::Index ow) {
  const Eigen::Index h = in.rows(), w = in.cols();
  if (oh == h && ow == w) return in;
  Grid out(oh, ow);
  const float sy = static_cast<float>(h) / static_cast<float>(oh);
  const float sx = static_cast<float>(w) / static_cast<float>(ow);
  for (Eigen::Index y = 0; y < oh; ++y) {
    float fy = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
    fy = std::clamp(fy, 0.f, static_cast<float>(h - 1));
    Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(fy));
    Eigen::Index y1 = std::min(y0 + 1, h - 1);
    float wy = fy - static_cast<float>(y0);
    for (Eigen::Index x = 0; x < ow; ++x) {
      float fx = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
      fx = std::clamp(fx, 0.f, static_cast<float>(w - 1));
      Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(fx));
      Eigen::Index x1 = std::min(x0 + 1, w - 1);
      float wx = fx - static_cast<float>(x0);
      float top = in(y0, x0) + wx * (in(y0, x1) - in(y0, x0));
      float bot = in(y1, x0) + wx * (in(y1, x1) - in(y1, x0));
      out(y, x) = top + wy * (bot - top);
    }
  }
  return out;
}

// Bilinear warp of `img` by the flow; `valid` marks samples that stayed
// inside the source frame (outside samples get no data term).
void warp(const Grid& img, const Grid& u, const Grid& v, Grid& out,
          Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& valid) {
  const Eigen::Index h = img.rows(), w = img.cols();
  out.resize(h, w);
  valid.resize(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const float sx = static_cast<float>(x) + u(y, x);
      const float sy = static_cast<float>(y) + v(y, x);
      valid(y, x) = sx >= -0.5f && sx <= static_cast<float>(w) - 0.5f &&
                    sy >= -0.5f && sy <= static_cast<float>(h) - 0.5f;
      const float cx = std::clamp(sx, 0.f, static_cast<float>(w - 1));
      const float cy = std::clamp(sy, 0.f, static_cast<float>(h - 1));
      Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(cx));
      Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(cy));
      Eigen::Index x1 = std::min(x0 + 1, w - 1);
      Eigen::Index y1 = std::min(y0 + 1, h - 1);
      float fx = cx - static_cast<float>(x0);
      float fy = cy - static_cast<float>(y0);
      float top = img(y0, x0) + fx * (img(y0, x1) - img(y0, x0));
      float bot = img(y1, x0) + fx * (img(y1, x1) - img(y1, x0));
      out(y, x) = top + fy * (bot - top);
    }
}

void central_gradients(const Grid& img, Grid& gx, Grid& gy) {
  const Eigen::Index h = img.rows(), w = img.cols();
  gx.resize(h, w);
  gy.resize(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      Eigen::Index xm = x > 0 ? x - 1 : 0, xp = x < w - 1 ? x + 1 : w - 1;
      Eigen::Index ym = y > 0 ? y - 1 : 0, yp = y < h - 1 ? y + 1 : h - 1;
      gx(y, x) = 0.5f * (img(y, xp) - img(y, xm));
      gy(y, x) = 0.5f * (img(yp, x) - img(ym, x));
    }
}

constexpr int kFixedPointIters = 5;

// One pyramid level: warps_per_level outer warps, each with a lagged
// nonlinearity loop and Gauss-Seidel sweeps on the linearized system.
void solve_level(const Grid& ia, const Grid& ib, Grid& u, Grid& v,
                 const FlowParams& p) {
  const Eigen::Index h = ia.rows(), w = ia.cols();
  const float alpha = static_cast<float>(p.smoothness_alpha);
  const float eps2 = static_cast<float>(p.charbonnier_eps * p.charbonnier_eps);

  Grid warped, it, ix, iy, gax, gay, gbx, gby;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
  central_gradients(ia, gax, gay);

  Grid du(h, w), dv(h, w), psi_d(h, w), psi_s(h, w);

  for (int warp_i = 0; warp_i < p.warps_per_level; ++warp_i) {
    warp(ib, u, v, warped, valid);
    it = warped - ia;
    central_gradients(warped, gbx, gby);
    ix = 0.5f * (gax + gbx);
    iy = 0.5f * (gay + gby);
    du.setZero();
    dv.setZero();

    for (int fp = 0; fp < kFixedPointIters; ++fp) {
      // Lagged Charbonnier weights.
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
          float r = it(y, x) + ix(y, x) * du(y, x) + iy(y, x) * dv(y, x);
          psi_d(y, x) =
              valid(y, x) ? 0.5f / std::sqrt(r * r + eps2) : 0.f;
        }
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
          float uu = u(y, x) + du(y, x), vv = v(y, x) + dv(y, x);
          float gux = x < w - 1 ? u(y, x + 1) + du(y, x + 1) - uu
                                : 0.f;
          float guy = y < h - 1 ? u(y + 1, x) + du(y + 1, x) - uu : 0.f;
          float gvx = x < w - 1 ? v(y, x + 1) + dv(y, x + 1) - vv : 0.f;
          float gvy = y < h - 1 ? v(y + 1, x) + dv(y + 1, x) - vv : 0.f;
          float mag = gux * gux + guy * guy + gvx * gvx + gvy * gvy;
          psi_s(y, x) = 0.5f / std::sqrt(mag + eps2);
        }

      // Gauss-Seidel on the coupled 2x2 per-pixel system.
      for (int sweep = 0; sweep < p.solver_iters; ++sweep) {
        float max_change = 0.f;
        for (Eigen::Index y = 0; y < h; ++y)
          for (Eigen::Index x = 0; x < w; ++x) {
            float wsum = 0.f, su = 0.f, sv = 0.f;
            auto edge = [&](Eigen::Index ny, Eigen::Index nx) {
              float we = 0.5f * (psi_s(y, x) + psi_s(ny, nx));
              wsum += we;
              su += we * (u(ny, nx) + du(ny, nx) - u(y, x));
              sv += we * (v(ny, nx) + dv(ny, nx) - v(y, x));
            };
            if (x > 0) edge(y, x - 1);
            if (x < w - 1) edge(y, x + 1);
            if (y > 0) edge(y - 1, x);
            if (y < h - 1) edge(y + 1, x);

            const float pd = psi_d(y, x);
            const float a11 = pd * ix(y, x) * ix(y, x) + alpha * wsum;
            const float a12 = pd * ix(y, x) * iy(y, x);
            const float a22 = pd * iy(y, x) * iy(y, x) + alpha * wsum;
            const float b1 = -pd * it(y, x) * ix(y, x) + alpha * su;
            const float b2 = -pd * it(y, x) * iy(y, x) + alpha * sv;
            const float det = a11 * a22 - a12 * a12;
            if (det <= 0.f) continue;
            const float ndu = (b1 * a22 - b2 * a12) / det;
            const float ndv = (b2 * a11 - b1 * a12) / det;
            max_change = std::max(
                {max_change, std::abs(ndu - du(y, x)), std::abs(ndv - dv(y, x))});
            du(y, x) = ndu;
            dv(y, x) = ndv;
          }
        if (max_change < static_cast<float>(p.solver_tol)) break;
      }
    }
    u += du;
    v += dv;
  }
}

Grid preprocess(const Frame& f) { return smooth(to_grid(luma(f))); }

}  // namespace

void validate_flow_params(const FlowParams& p) {
  if (p.pyramid_scale <= 0.0 || p.pyramid_scale >= 1.0)
    throw ConfigError("flow: pyramid_scale must be in (0,1)");
  if (p.levels < 1 || p.warps_per_level < 1 || p.solver_iters < 1)
    throw ConfigError("flow: counts must be positive");
  if (p.smoothness_alpha <= 0.0 || p.charbonnier_eps <= 0.0 || p.solver_tol <= 0.0)
    throw ConfigError("flow: weights must be positive");
}

int effective_levels(int height, int width, const FlowParams& p) {
  int levels = 1;
  double h = height, w = width;
  while (levels < p.levels) {
    h *= p.pyramid_scale;
    w *= p.pyramid_scale;
    if (std::min(h, w) < 16.0) break;  // coarsest level keeps min dim >= 16
    ++levels;
  }
  return levels;
}

FlowField optical_flow(const Frame& a, const Frame& b, const FlowParams& p) {
  validate_flow_params(p);
  if (!a.same_shape(b)) throw DataError("optical_flow: shape mismatch");

  const int n_levels = effective_levels(a.height(), a.width(), p);

  // Pyramids, finest first.
  std::vector<Grid> pa(static_cast<std::size_t>(n_levels));
  std::vector<Grid> pb(static_cast<std::size_t>(n_levels));
  pa[0] = preprocess(a);
  pb[0] = preprocess(b);
  for (int l = 1; l < n_levels; ++l) {
    const Grid& prev_a = pa[static_cast<std::size_t>(l - 1)];
    const Grid& prev_b = pb[static_cast<std::size_t>(l - 1)];
    Eigen::Index nh = static_cast<Eigen::Index>(
        std::lround(static_cast<double>(prev_a.rows()) * p.pyramid_scale));
    Eigen::Index nw = static_cast<Eigen::Index>(
        std::lround(static_cast<double>(prev_a.cols()) * p.pyramid_scale));
    pa[static_cast<std::size_t>(l)] = resize_grid(smooth(prev_a), nh, nw);
    pb[static_cast<std::size_t>(l)] = resize_grid(smooth(prev_b), nh, nw);
  }

  Grid u = Grid::Zero(pa.back().rows(), pa.back().cols());
  Grid v = Grid::Zero(pa.back().rows(), pa.back().cols());
  for (int l = n_levels - 1; l >= 0; --l) {
    const Grid& ia = pa[static_cast<std::size_t>(l)];
    if (u.rows() != ia.rows() || u.cols() != ia.cols()) {
      const float rx = static_cast<float>(ia.cols()) / static_cast<float>(u.cols());
      const float ry = static_cast<float>(ia.rows()) / static_cast<float>(u.rows());
      u = resize_grid(u, ia.rows(), ia.cols()) * rx;
      v = resize_grid(v, ia.rows(), ia.cols()) * ry;
    }
    solve_level(ia, pb[static_cast<std::size_t>(l)], u, v, p);
  }

  FlowField out;
  out.params = p;
  out.field = Image<float>(a.height(), a.width(), 2);
  out.field.plane(0) = u;
  out.field.plane(1) = v;
  return out;
}

double flow_energy(const Frame& a, const Frame& b, const FlowField& flow) {
  if (!a.same_shape(b)) throw DataError("flow_energy: shape mismatch");
  const Grid ia = preprocess(a);
  const Grid ib = preprocess(b);
  const Grid u = flow.field.plane(0);
  const Grid v = flow.field.plane(1);
  const double eps2 = flow.params.charbonnier_eps * flow.params.charbonnier_eps;

  Grid warped;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
  warp(ib, u, v, warped, valid);

  double energy = 0.0;
  const Eigen::Index h = ia.rows(), w = ia.cols();
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (valid(y, x)) {
        double r = warped(y, x) - ia(y, x);
        energy += std::sqrt(r * r + eps2);
      }
      double gux = x < w - 1 ? u(y, x + 1) - u(y, x) : 0.0;
      double guy = y < h - 1 ? u(y + 1, x) - u(y, x) : 0.0;
      double gvx = x < w - 1 ? v(y, x + 1) - v(y, x) : 0.0;
      double gvy = y < h - 1 ? v(y + 1, x) - v(y, x) : 0.0;
      energy += flow.params.smoothness_alpha *
                std::sqrt(gux * gux + guy * guy + gvx * gvx + gvy * gvy + eps2);
    }
  return energy;
}

}  // namespace amod
