#include "welldist/geometry.hpp"

#include "welldist/kernels.hpp"
#include "welldist/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace welldist {

namespace {

// Raw parabola patch: arcs x = y^2 for |y| in [1/4, 1], a right circle through
// (1, +-1) and a left circle through (1/16, +-1/4), both tangent to the arcs.
namespace patch {
const double kR = std::sqrt(5.0) / 2.0;
const double kCR = 1.5;
const double kRL = std::sqrt(5.0) / 4.0;
const double kCL = 9.0 / 16.0;
const double kAlphaR = kPi - std::atan(2.0);
const double kBeta = std::atan(0.5);

double arc_s(double y) { return 0.5 * y * std::sqrt(1.0 + 4.0 * y * y) + 0.25 * std::asinh(2.0 * y); }

const double kLP = arc_s(1.0) - arc_s(0.25);
const double kLens[5] = {kR * kAlphaR, kLP, kRL * 2.0 * kBeta, kLP, kR * kAlphaR};
const double kTotal = kLens[0] + kLens[1] + kLens[2] + kLens[3] + kLens[4];

double inv_arc_s(double target, double guess) {
  double y = guess;
  for (int i = 0; i < 60; ++i) {
    const double dy = (arc_s(y) - target) / std::sqrt(1.0 + 4.0 * y * y);
    y -= dy;
    if (std::fabs(dy) < 1e-17) break;
  }
  return y;
}

struct Eval {
  double px, py, nx, ny, kappa;
};

// Point, outward normal and curvature at arc length s in [0, kTotal).
Eval at(double s) {
  s = std::fmod(s, kTotal);
  if (s < 0.0) s += kTotal;
  Eval e{};
  if (s < kLens[0]) {
    const double phi = s / kR;
    e = {kCR + kR * std::cos(phi), kR * std::sin(phi), std::cos(phi), std::sin(phi), 1.0 / kR};
    return e;
  }
  s -= kLens[0];
  if (s < kLens[1]) {
    const double frac = s / kLP;
    const double y = inv_arc_s(arc_s(1.0) - s, 1.0 - 0.75 * frac);
    const double g = std::sqrt(1.0 + 4.0 * y * y);
    return {y * y, y, -1.0 / g, 2.0 * y / g, 2.0 / (g * g * g)};
  }
  s -= kLens[1];
  if (s < kLens[2]) {
    const double phi = kPi - kBeta + s / kRL;
    return {kCL + kRL * std::cos(phi), kRL * std::sin(phi), std::cos(phi), std::sin(phi), 1.0 / kRL};
  }
  s -= kLens[2];
  if (s < kLens[3]) {
    const double frac = s / kLP;
    const double y = inv_arc_s(arc_s(0.25) + s, 0.25 + 0.75 * frac);
    const double g = std::sqrt(1.0 + 4.0 * y * y);
    return {y * y, -y, -1.0 / g, -2.0 * y / g, 2.0 / (g * g * g)};
  }
  s -= kLens[3];
  const double phi = -kAlphaR + s / kR;
  return {kCR + kR * std::cos(phi), kR * std::sin(phi), std::cos(phi), std::sin(phi), 1.0 / kR};
}

bool inside(double x, double y) {
  const double ay = std::fabs(y);
  if (ay > kR) return false;
  const double right = kCR + std::sqrt(std::max(0.0, kR * kR - y * y));
  double left;
  if (ay >= 1.0) left = kCR - std::sqrt(std::max(0.0, kR * kR - y * y));
  else if (ay >= 0.25) left = y * y;
  else left = kCL - std::sqrt(std::max(0.0, kRL * kRL - y * y));
  return left <= x && x <= right;
}

double area() {
  // Green's theorem piece by piece, closed form.
  const double right = kCR * kR * 2.0 * std::sin(kAlphaR) + kR * kR * 2.0 * kAlphaR;
  const double left = -kCL * kRL * 2.0 * std::sin(kBeta) + kRL * kRL * 2.0 * kBeta;
  const double arcs = 2.0 * (1.0 - 1.0 / 64.0) / 3.0;
  return 0.5 * (right + left + arcs);
}

// sup over the raw patch of d.p; the support point of a C^1 strictly convex
// curve is found piece by piece from the normal direction.
double support_raw(double dx, double dy) {
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](double px, double py) { best = std::max(best, dx * px + dy * py); };
  consider(1.0, 1.0);
  consider(1.0, -1.0);
  consider(1.0 / 16.0, 0.25);
  consider(1.0 / 16.0, -0.25);
  const double th = std::atan2(dy, dx);
  const double nrm = std::hypot(dx, dy);
  if (nrm == 0.0) return 0.0;
  if (std::fabs(th) <= kAlphaR) consider(kCR + kR * dx / nrm, kR * dy / nrm);
  if (std::fabs(th) >= kPi - kBeta) consider(kCL + kRL * dx / nrm, kRL * dy / nrm);
  if (dx < 0.0) {
    const double yu = -dy / (2.0 * dx);
    if (yu >= 0.25 && yu <= 1.0) consider(yu * yu, yu);
    const double yl = dy / (2.0 * dx);
    if (yl >= 0.25 && yl <= 1.0) consider(yl * yl, -yl);
  }
  return best;
}

// u-boundaries of the five smooth pieces.
std::vector<double> breaks() {
  std::vector<double> b{0.0};
  double acc = 0.0;
  for (double l : kLens) {
    acc += l;
    b.push_back(acc / kTotal);
  }
  b.back() = 1.0;
  return b;
}
}  // namespace patch

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Golden-section maximization of f on [a, b].
template <typename F>
double golden_max(F f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

Vector fibonacci_direction(int k, int n) {
  const double z = 1.0 - (2.0 * k + 1.0) / n;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double phi = golden * k;
  Vector w(3);
  w << r * std::cos(phi), r * std::sin(phi), z;
  return w;
}

}  // namespace

ConvexBody ConvexBody::ball(int d) {
  if (d < 1) throw DomainError("ball: dimension must be >= 1");
  ConvexBody K;
  K.dim_ = d;
  K.kind_ = BodyKind::ball;
  K.axes_.assign(d, 1.0);
  K.volume_ = ball_volume(d);
  K.surface_ = sphere_area(d - 1);
  K.circumradius_ = 1.0;
  K.curvature_ = {1.0, 1.0};
  return K;
}

ConvexBody ConvexBody::ellipsoid(const std::vector<double>& axes) {
  const int d = static_cast<int>(axes.size());
  if (d != 2 && d != 3) throw DomainError("ellipsoid: needs 2 or 3 semi-axes");
  for (double a : axes)
    if (!(a > 0.0)) throw DomainError("ellipsoid: semi-axes must be positive");
  ConvexBody K;
  K.dim_ = d;
  K.kind_ = BodyKind::ellipse;
  K.axes_ = axes;
  const double amax = *std::max_element(axes.begin(), axes.end());
  const double amin = *std::min_element(axes.begin(), axes.end());
  K.circumradius_ = amax;
  K.curvature_ = {amin / (amax * amax), amax / (amin * amin)};
  K.volume_ = ball_volume(d) * std::accumulate(axes.begin(), axes.end(), 1.0, std::multiplies<>());
  if (d == 2) {
    K.finish_planar();
  } else {
    // Surface area: integrate |dA| over the parameter sphere.
    std::vector<double> tx, tw;
    gauss_legendre(96, 0.0, kPi, tx, tw);
    const int np = 192;
    double acc = 0.0;
    for (std::size_t i = 0; i < tx.size(); ++i) {
      const double th = tx[i];
      for (int j = 0; j < np; ++j) {
        const double ph = 2.0 * kPi * j / np;
        // x = (a sin th cos ph, b sin th sin ph, c cos th); |x_th x x_ph|.
        const double a = axes[0], b = axes[1], c = axes[2];
        const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
        Eigen::Vector3d xt(a * ct * cp, b * ct * sp, -c * st);
        Eigen::Vector3d xp(-a * st * sp, b * st * cp, 0.0);
        acc += tw[i] * xt.cross(xp).norm() * 2.0 * kPi / np;
      }
    }
    K.surface_ = acc;
  }
  return K;
}

ConvexBody ConvexBody::parabola_patch() {
  ConvexBody K;
  K.dim_ = 2;
  K.kind_ = BodyKind::parabola;
  K.shift_ = 1.0;
  K.scale_ = std::sqrt(kPi / patch::area());
  K.volume_ = kPi;
  K.surface_ = K.scale_ * patch::kTotal;
  K.finish_planar();
  return K;
}

void ConvexBody::finish_planar() {
  if (kind_ == BodyKind::ellipse) {
    // Cumulative arc length of (a cos th, b sin th) on a fine theta grid.
    const int n = 1024;
    std::vector<double> gx, gw;
    gauss_legendre(16, 0.0, 1.0, gx, gw);
    const double a = axes_[0], b = axes_[1];
    table_theta_.resize(n + 1);
    table_len_.resize(n + 1);
    table_len_[0] = 0.0;
    for (int j = 0; j <= n; ++j) table_theta_[j] = 2.0 * kPi * j / n;
    for (int j = 0; j < n; ++j) {
      const double h = table_theta_[j + 1] - table_theta_[j];
      double acc = 0.0;
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double th = table_theta_[j] + h * gx[i];
        acc += gw[i] * h * std::hypot(a * std::sin(th), b * std::cos(th));
      }
      table_len_[j + 1] = table_len_[j] + acc;
    }
    surface_ = table_len_[n];
    return;
  }
  // Numerical metadata from a 1000-node polyline: curvature from circles
  // through consecutive triples, circumradius from the nodes.
  const int n = 1000;
  std::vector<Vector> pts(n);
  for (int k = 0; k < n; ++k) pts[k] = boundary_at(static_cast<double>(k) / n);
  double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0, rmax = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vector& p0 = pts[(k + n - 1) % n];
    const Vector& p1 = pts[k];
    const Vector& p2 = pts[(k + 1) % n];
    const Vector a = p1 - p0, b = p2 - p1, c = p2 - p0;
    const double cross = a(0) * b(1) - a(1) * b(0);
    const double kappa = 2.0 * cross / (a.norm() * b.norm() * c.norm());
    kmin = std::min(kmin, kappa);
    kmax = std::max(kmax, kappa);
    rmax = std::max(rmax, p1.norm());
  }
  curvature_ = {kmin, kmax};
  // Refine the circumradius on a denser grid.
  for (int k = 0; k < 20000; ++k) rmax = std::max(rmax, boundary_at(k / 20000.0).norm());
  circumradius_ = rmax * (1.0 + 1e-9);
  if (kind_ == BodyKind::polar) {
    // Perimeter and area from the piecewise-smooth parametrization.
    std::vector<double> gx, gw;
    gauss_legendre(64, 0.0, 1.0, gx, gw);
    const auto br = patch::breaks();
    double len = 0.0;
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
      const double lo = br[p], h = br[p + 1] - br[p];
      for (std::size_t i = 0; i < gx.size(); ++i) len += gw[i] * h * boundary_speed(lo + h * gx[i]);
    }
    // The radial function of K* is 1/h_K, so |K*| = 1/2 int h_K^{-2} dtheta.
    const int na = 200000;
    double area2 = 0.0;
    Vector dir(2);
    for (int k = 0; k < na; ++k) {
      double sn, cs;
      special::sincos_turns(static_cast<double>(k) / na, sn, cs);
      dir << cs, sn;
      const double hk = primal_->support(dir);
      area2 += 2.0 * kPi / na / (hk * hk);
    }
    surface_ = len;
    volume_ = 0.5 * area2;
  }
}

std::string ConvexBody::name() const {
  switch (kind_) {
    case BodyKind::ball: return "ball";
    case BodyKind::ellipse: {
      std::string s = dim_ == 2 ? "ellipse(" : "ellipsoid(";
      for (std::size_t i = 0; i < axes_.size(); ++i) s += (i ? "," : "") + format_number(axes_[i]);
      return s + ")";
    }
    case BodyKind::parabola: return "parabola";
    case BodyKind::polar: return "polar(" + primal_->name() + ")";
  }
  return "?";
}

bool ConvexBody::volume_normalized() const {
  return std::fabs(volume_ - ball_volume(dim_)) <= 1e-9 * ball_volume(dim_);
}

double ConvexBody::minkowski(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim_) throw DomainError("minkowski: dimension mismatch");
  switch (kind_) {
    case BodyKind::ball: return x.norm();
    case BodyKind::ellipse: {
      double acc = 0.0;
      for (int i = 0; i < dim_; ++i) acc += (x(i) / axes_[i]) * (x(i) / axes_[i]);
      return std::sqrt(acc);
    }
    case BodyKind::polar: return primal_->support(x);
    case BodyKind::parabola: break;
  }
  const double r = x.norm();
  if (r == 0.0) return 0.0;
  const double ux = x(0) / r, uy = x(1) / r;
  // Largest t with origin + t u inside K, by bisection in the raw frame.
  double lo = 0.0, hi = 4.0 * scale_;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (patch::inside(shift_ + mid * ux / scale_, mid * uy / scale_)) lo = mid;
    else hi = mid;
  }
  return r / (0.5 * (lo + hi));
}

double ConvexBody::support(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim_) throw DomainError("support: dimension mismatch");
  switch (kind_) {
    case BodyKind::ball: return x.norm();
    case BodyKind::ellipse: {
      double acc = 0.0;
      for (int i = 0; i < dim_; ++i) acc += (x(i) * axes_[i]) * (x(i) * axes_[i]);
      return std::sqrt(acc);
    }
    case BodyKind::polar: return primal_->minkowski(x);
    case BodyKind::parabola: break;
  }
  return scale_ * (patch::support_raw(x(0), x(1)) - shift_ * x(0));
}

ConvexBody ConvexBody::polar() const {
  switch (kind_) {
    case BodyKind::ball: return *this;
    case BodyKind::ellipse: {
      std::vector<double> inv;
      for (double a : axes_) inv.push_back(1.0 / a);
      return ellipsoid(inv);
    }
    case BodyKind::polar: return *primal_;
    case BodyKind::parabola: break;
  }
  ConvexBody K;
  K.dim_ = 2;
  K.kind_ = BodyKind::polar;
  K.primal_ = std::make_shared<const ConvexBody>(*this);
  K.finish_planar();
  return K;
}

Vector ConvexBody::boundary_at(double u) const {
  if (dim_ != 2) throw DomainError("boundary_at: planar bodies only");
  Vector p(2);
  switch (kind_) {
    case BodyKind::ball: {
      double s, c;
      special::sincos_turns(u, s, c);
      p << c, s;
      return p;
    }
    case BodyKind::ellipse: {
      const double total = table_len_.back();
      double target = (u - std::floor(u)) * total;
      auto it = std::upper_bound(table_len_.begin(), table_len_.end(), target);
      std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - table_len_.begin())) - 1;
      j = std::min(j, table_theta_.size() - 2);
      const double a = axes_[0], b = axes_[1];
      auto speed = [&](double th) { return std::hypot(a * std::sin(th), b * std::cos(th)); };
      std::vector<double> gx, gw;
      gauss_legendre(16, 0.0, 1.0, gx, gw);
      double th = table_theta_[j] + (target - table_len_[j]) / speed(table_theta_[j]);
      for (int it2 = 0; it2 < 8; ++it2) {
        double acc = 0.0;
        const double h = th - table_theta_[j];
        for (std::size_t i = 0; i < gx.size(); ++i) acc += gw[i] * h * speed(table_theta_[j] + h * gx[i]);
        const double f = table_len_[j] + acc - target;
        th -= f / speed(th);
        if (std::fabs(f) < 1e-15 * total) break;
      }
      p << a * std::cos(th), b * std::sin(th);
      return p;
    }
    case BodyKind::parabola: {
      const auto e = patch::at((u - std::floor(u)) * patch::kTotal);
      p << scale_ * (e.px - shift_), scale_ * e.py;
      return p;
    }
    case BodyKind::polar: {
      const auto e = patch::at((u - std::floor(u)) * patch::kTotal);
      const double yx = primal_->scale_ * (e.px - primal_->shift_), yy = primal_->scale_ * e.py;
      const double h = e.nx * yx + e.ny * yy;
      p << e.nx / h, e.ny / h;
      return p;
    }
  }
  return p;
}

double ConvexBody::boundary_speed(double u) const {
  switch (kind_) {
    case BodyKind::ball: return 2.0 * kPi;
    case BodyKind::ellipse:
    case BodyKind::parabola: return surface_;
    case BodyKind::polar: {
      const auto e = patch::at((u - std::floor(u)) * patch::kTotal);
      const double lam = primal_->scale_;
      const double yx = lam * (e.px - primal_->shift_), yy = lam * e.py;
      const double h = e.nx * yx + e.ny * yy;
      return primal_->surface_ * (e.kappa / lam) * std::hypot(yx, yy) / (h * h);
    }
  }
  return 0.0;
}

BoundarySample ConvexBody::boundary_sample(int n) const {
  if (n < 8) throw DomainError("boundary_sample: need at least 8 nodes");
  BoundarySample out;
  out.points.resize(dim_, n);
  out.weights.resize(n);
  if (dim_ == 2) {
    for (int k = 0; k < n; ++k) {
      const double u = static_cast<double>(k) / n;
      out.points.col(k) = boundary_at(u);
      out.weights[k] = boundary_speed(u) / n;
    }
    return out;
  }
  if (dim_ != 3) throw DomainError("boundary_sample: d must be 2 or 3");
  for (int k = 0; k < n; ++k) {
    const Vector w = fibonacci_direction(k, n);
    const double g = minkowski(w);
    const Vector p = w / g;
    // dA = |p|^2 / (w . nu) dOmega with nu the outward unit normal at p.
    Vector nu(3);
    for (int i = 0; i < 3; ++i) nu(i) = p(i) / (axes_[i] * axes_[i]);
    nu.normalize();
    out.points.col(k) = p;
    out.weights[k] = 4.0 * kPi / n * p.squaredNorm() / w.dot(nu);
  }
  return out;
}

ConvexBody parse_body(const std::string& text, int dim) {
  auto numbers = [](const std::string& inner) {
    std::vector<double> v;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        v.push_back(std::stod(item));
      } catch (...) {
        throw DomainError("body: bad number '" + item + "'");
      }
    }
    return v;
  };
  if (text == "ball") return ConvexBody::ball(dim);
  if (text == "parabola" || text == "parabola-patch") {
    if (dim != 2) throw DomainError("body: the parabola patch is planar");
    return ConvexBody::parabola_patch();
  }
  const auto open = text.find('(');
  if (open != std::string::npos && text.back() == ')') {
    const std::string head = text.substr(0, open);
    const std::string inner = text.substr(open + 1, text.size() - open - 2);
    if (head == "ellipse" || head == "ellipsoid") {
      auto axes = numbers(inner);
      if (static_cast<int>(axes.size()) != dim) throw DomainError("body: axis count must equal d");
      return ConvexBody::ellipsoid(axes);
    }
    if (head == "polar") return parse_body(inner, dim).polar();
  }
  throw DomainError("unknown body '" + text + "'");
}

double minkowski_norm(const ConvexBody& K, const Eigen::Ref<const Vector>& x) { return K.minkowski(x); }

BoundarySample boundary_sample(const ConvexBody& K, int n) { return K.boundary_sample(n); }

double dual_norm(const ConvexBody& K, const Eigen::Ref<const Vector>& x) {
  if (x.size() != K.dim()) throw DomainError("dual_norm: dimension mismatch");
  if (x.norm() == 0.0) return 0.0;
  if (K.dim() == 2) {
    const int n = 2048;
    int best = 0;
    double fbest = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      const double f = x.dot(K.boundary_at(static_cast<double>(k) / n));
      if (f > fbest) {
        fbest = f;
        best = k;
      }
    }
    auto f = [&](double u) { return x.dot(K.boundary_at(u)); };
    const double lo = (best - 1.0) / n, hi = (best + 1.0) / n;
    return std::max(fbest, golden_max(f, lo, hi, 1e-11));
  }
  if (K.dim() != 3) throw DomainError("dual_norm: d must be 2 or 3");
  const int n = 20000;
  Vector wbest;
  double fbest = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const Vector w = fibonacci_direction(k, n);
    const double f = x.dot(w) / K.minkowski(w);
    if (f > fbest) {
      fbest = f;
      wbest = w;
    }
  }
  // Alternate golden-section searches in spherical angles about the best node.
  double th = std::acos(std::clamp(wbest(2), -1.0, 1.0));
  double ph = std::atan2(wbest(1), wbest(0));
  auto value = [&](double t, double p) {
    Vector w(3);
    w << std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t);
    return x.dot(w) / K.minkowski(w);
  };
  double width = 0.05;
  for (int round = 0; round < 12; ++round) {
    const double gth = 0.5 * (std::sqrt(5.0) - 1.0);
    auto search = [&](auto&& f, double a, double b) {
      double c = b - gth * (b - a), d = a + gth * (b - a);
      double fc = f(c), fd = f(d);
      while (b - a > 1e-12) {
        if (fc >= fd) { b = d; d = c; fd = fc; c = b - gth * (b - a); fc = f(c); }
        else { a = c; c = d; fc = fd; d = a + gth * (b - a); fd = f(d); }
      }
      return 0.5 * (a + b);
    };
    th = search([&](double t) { return value(t, ph); }, th - width, th + width);
    ph = search([&](double p) { return value(th, p); }, ph - width, ph + width);
    fbest = std::max(fbest, value(th, ph));
    width *= 0.5;
  }
  return fbest;
}

LatticeCount lattice_points_near_dilate(const ConvexBody& K, double tau, double eps, bool keep_points) {
  if (!(tau >= 1.0)) throw DomainError("lattice_points_near_dilate: tau must be >= 1");
  if (!(eps >= 0.0)) throw DomainError("lattice_points_near_dilate: eps must be nonnegative");
  const int d = K.dim();
  const long long B = static_cast<long long>(std::ceil((tau + eps) * K.circumradius()));
  const double candidates = std::pow(2.0 * B + 1.0, d);
  if (candidates > 1e9) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "lattice_points_near_dilate: %.3g candidate points exceed the budget of 1e9",
                  candidates);
    throw BudgetError(buf);
  }
  LatticeCount out;
  std::vector<long long> coords;
  std::vector<long long> z(d, -B);
  auto record = [&]() {
    ++out.count;
    if (keep_points) coords.insert(coords.end(), z.begin(), z.end());
  };
  if (K.kind() == BodyKind::ball && eps == 0.0) {
    const double t2 = tau * tau;
    const long long n = std::llround(t2);
    if (std::fabs(t2 - static_cast<double>(n)) <= 1e-9 * std::max(1.0, t2)) {
      // Exact: enumerate the first d-1 coordinates, solve for the last.
      std::vector<long long> head(d - 1, -B);
      while (true) {
        long long rem = n;
        for (long long v : head) rem -= v * v;
        if (rem >= 0) {
          long long r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(rem))));
          while (r * r > rem) --r;
          while ((r + 1) * (r + 1) <= rem) ++r;
          if (r * r == rem) {
            for (long long last : {-r, r}) {
              for (int i = 0; i < d - 1; ++i) z[i] = head[i];
              z[d - 1] = last;
              record();
              if (r == 0) break;
            }
          }
        }
        int k = d - 2;
        while (k >= 0 && head[k] == B) {
          head[k] = -B;
          --k;
        }
        if (k < 0) break;
        ++head[k];
      }
    }
  } else {
    const double tol = eps + 1e-12 * std::max(1.0, tau);
    double inr = std::numeric_limits<double>::infinity();
    if (d == 2) {
      for (int k = 0; k < 4096; ++k) inr = std::min(inr, K.boundary_at(k / 4096.0).norm());
    } else {
      inr = *std::min_element(K.axes().begin(), K.axes().end());
    }
    inr *= 0.999;
    const double inner2 = std::pow(std::max(0.0, (tau - tol) * inr), 2);
    const double outer2 = std::pow((tau + tol) * K.circumradius(), 2);
    Vector x(d);
    while (true) {
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        x(i) = static_cast<double>(z[i]);
        r2 += x(i) * x(i);
      }
      if (r2 >= inner2 && r2 <= outer2 && std::fabs(K.minkowski(x) - tau) <= tol) record();
      int k = d - 1;
      while (k >= 0 && z[k] == B) {
        z[k] = -B;
        --k;
      }
      if (k < 0) break;
      ++z[k];
    }
  }
  if (keep_points) {
    out.points.resize(d, out.count);
    for (long long j = 0; j < out.count; ++j)
      for (int i = 0; i < d; ++i) out.points(i, j) = static_cast<double>(coords[j * d + i]);
  }
  return out;
}

long long parabola_arc_count(long long num, long long den, Branches branches) {
  if (num <= 0 || den <= 0) throw DomainError("parabola_arc_count: tau must be positive");
  const long long g = std::gcd(num, den);
  num /= g;
  den /= g;
  if (num < den) throw DomainError("parabola_arc_count: tau must be >= 1");
  const long long ymax = num / den;
  if (ymax > 1000000000LL) throw BudgetError("parabola_arc_count: more than 1e9 candidate ordinates");
  // X = Y^2 den / num is an integer iff num divides Y^2 (gcd(num, den) = 1).
  long long count = 0;
  for (long long y = 0; y <= ymax; ++y) {
    const __int128 y2 = static_cast<__int128>(y) * y;
    if (y2 % num == 0) ++count;
  }
  return branches == Branches::upper ? count : 2 * count - 1;
}

long long parabola_arc_count(double tau, Branches branches) {
  if (!(tau >= 1.0) || !std::isfinite(tau)) throw DomainError("parabola_arc_count: tau must be >= 1");
  // Continued-fraction convergents; accept only an exact representation.
  long long h0 = 1, h1 = 0, k0 = 0, k1 = 1;
  double x = tau;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(x);
    if (a > 9e15) break;
    const long long ai = static_cast<long long>(a);
    const long long h2 = ai * h0 + h1, k2 = ai * k0 + k1;
    if (k2 > 1000000) break;
    h1 = h0; h0 = h2;
    k1 = k0; k0 = k2;
    if (static_cast<double>(h0) / static_cast<double>(k0) == tau) return parabola_arc_count(h0, k0, branches);
    const double frac = x - a;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  throw DomainError("parabola_arc_count: tau is not a rational with denominator <= 1e6");
}

ConvexBody make_parabola_body() { return ConvexBody::parabola_patch(); }

ReferenceBounds reference_bounds(int d, double s) {
  if (d < 2) throw DomainError("reference_bounds: d must be >= 2");
  if (!(s > 0.0 && s < d)) throw DomainError("reference_bounds: s must lie in (0, d)");
  ReferenceBounds r;
  const double dd = d;
  if (s <= 0.5 * (dd - 1.0)) r.beta_gnr = s;
  else if (s <= 0.5 * dd) r.beta_gnr = 0.5 * (dd - 1.0);
  else if (s <= 0.5 * (dd + 2.0)) r.beta_gnr = 0.25 * (dd + 2.0 * s - 2.0);
  else r.beta_gnr = s - 1.0;
  if (d == 3) r.gamma_muller = 20.0 / 43.0;
  else if (d >= 4) r.gamma_muller = (dd + 4.0) / (dd * dd + dd + 2.0);
  return r;
}

}  // namespace welldist
