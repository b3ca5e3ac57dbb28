#include "declsolve/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>

#include "declsolve/error.hpp"

namespace declsolve {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

bool all_finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------- box

Box Box::unbounded(std::size_t n) { return Box{Vec(n, -kInf), Vec(n, kInf)}; }

bool Box::contains(const Vec& x) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

void Box::clip(Vec& x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

Vec projected_gradient(const Vec& x, const Vec& g, const Box& box) {
  Vec pg(g);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((x[i] == box.lower[i] && g[i] > 0.0) || (x[i] == box.upper[i] && g[i] < 0.0)) pg[i] = 0.0;
  }
  return pg;
}

double projected_gradient_norm(const Vec& x, const Vec& g, const Box& box) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((x[i] == box.lower[i] && g[i] > 0.0) || (x[i] == box.upper[i] && g[i] < 0.0)) continue;
    m = std::max(m, std::fabs(g[i]));
  }
  return m;
}

// ---------------------------------------------------------------- memory

LbfgsMemory::LbfgsMemory(std::size_t n, std::size_t history, double eps_curv)
    : n_(n), history_(std::max<std::size_t>(history, 1)), eps_curv_(eps_curv) {}

bool LbfgsMemory::push(const Vec& s, const Vec& y) {
  const double sy = dot(s, y);
  if (!(sy > eps_curv_ * norm(s) * norm(y))) return false;
  if (s_.size() == history_) {
    s_.erase(s_.begin());
    y_.erase(y_.begin());
  }
  s_.push_back(s);
  y_.push_back(y);
  theta_ = dot(y, y) / sy;
  rebuild();
  return true;
}

void LbfgsMemory::clear() {
  s_.clear();
  y_.clear();
  theta_ = 1.0;
  m_ = Dense();
}

void LbfgsMemory::rebuild() {
  while (true) {
    const std::size_t k = s_.size();
    Dense mid(2 * k, 2 * k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double sy = dot(s_[i], y_[j]);
        if (i == j) mid(i, j) = -sy;
        if (i > j) {
          mid(k + i, j) = sy;  // L
          mid(j, k + i) = sy;  // L'
        }
        mid(k + i, k + j) = theta_ * dot(s_[i], s_[j]);
      }
    }
    LuDecomposition lu(mid);
    if (!lu.singular() || k <= 1) {
      m_ = lu.singular() ? Dense(2 * k, 2 * k) : lu.inverse();
      return;
    }
    // drop the oldest pair until the middle matrix is invertible
    s_.erase(s_.begin());
    y_.erase(y_.begin());
  }
}

void LbfgsMemory::w_row(std::size_t i, double* out) const {
  const std::size_t k = s_.size();
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = y_[j][i];
    out[k + j] = theta_ * s_[j][i];
  }
}

Vec LbfgsMemory::wt_times(const Vec& v) const {
  const std::size_t k = s_.size();
  Vec out(2 * k);
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = dot(y_[j], v);
    out[k + j] = theta_ * dot(s_[j], v);
  }
  return out;
}

Vec LbfgsMemory::w_times(const Vec& p) const {
  const std::size_t k = s_.size();
  Vec out(n_, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double a = p[j];
    const double b = theta_ * p[k + j];
    for (std::size_t i = 0; i < n_; ++i) out[i] += a * y_[j][i] + b * s_[j][i];
  }
  return out;
}

Vec LbfgsMemory::m_times(const Vec& v) const {
  const std::size_t w = width();
  Vec out(w, 0.0);
  for (std::size_t i = 0; i < w; ++i) {
    for (std::size_t j = 0; j < w; ++j) out[i] += m_(i, j) * v[j];
  }
  return out;
}

Vec LbfgsMemory::b_times(const Vec& v) const {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = theta_ * v[i];
  if (empty()) return out;
  const Vec wmv = w_times(m_times(wt_times(v)));
  for (std::size_t i = 0; i < v.size(); ++i) out[i] -= wmv[i];
  return out;
}

// ---------------------------------------------------------------- Cauchy point

CauchyResult cauchy_point(const Vec& x, const Vec& g, const LbfgsMemory& memory, const Box& box) {
  const std::size_t n = x.size();
  const double theta = memory.theta();
  CauchyResult out;
  out.x_cp = x;
  out.free.assign(n, true);
  out.c.assign(memory.width(), 0.0);

  Vec d(n, 0.0);
  std::vector<std::pair<double, std::size_t>> breaks;
  for (std::size_t i = 0; i < n; ++i) {
    double t = kInf;
    if (g[i] < 0.0 && box.upper[i] < kInf) t = (x[i] - box.upper[i]) / g[i];
    if (g[i] > 0.0 && box.lower[i] > -kInf) t = (x[i] - box.lower[i]) / g[i];
    if (g[i] != 0.0 && t > 0.0) d[i] = -g[i];
    if (t > 0.0 && t < kInf) breaks.emplace_back(t, i);
  }
  auto finish_free = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      out.free[i] = out.x_cp[i] != box.lower[i] && out.x_cp[i] != box.upper[i];
    }
  };
  const double dd = dot(d, d);
  if (dd == 0.0) {
    finish_free();
    return out;
  }
  std::sort(breaks.begin(), breaks.end());

  const std::size_t w = memory.width();
  Vec p = memory.wt_times(d);
  Vec& c = out.c;
  double fp = -dd;
  double fpp = theta * dd - (w ? dot(p, memory.m_times(p)) : 0.0);
  const double fpp0 = fpp;
  double dt_min = -fp / fpp;
  double t_old = 0.0;
  Vec wb(w);

  for (const auto& [tb, b] : breaks) {
    const double dt = tb - t_old;
    if (dt_min < dt) break;
    const double bound = d[b] > 0.0 ? box.upper[b] : box.lower[b];
    const double zb = bound - x[b];
    out.x_cp[b] = bound;
    for (std::size_t j = 0; j < w; ++j) c[j] += dt * p[j];
    const double gb = g[b];
    double wmc = 0.0;
    double wmp = 0.0;
    double wmw = 0.0;
    if (w) {
      memory.w_row(b, wb.data());
      const Vec mw = memory.m_times(wb);
      wmc = dot(mw, c);
      wmp = dot(mw, p);
      wmw = dot(mw, wb);
    }
    fp += dt * fpp + gb * gb + theta * gb * zb - gb * wmc;
    fpp += -theta * gb * gb - 2.0 * gb * wmp - gb * gb * wmw;
    fpp = std::max(fpp, kEps * fpp0);
    for (std::size_t j = 0; j < w; ++j) p[j] += gb * wb[j];
    d[b] = 0.0;
    dt_min = -fp / fpp;
    t_old = tb;
  }
  dt_min = std::max(dt_min, 0.0);
  t_old += dt_min;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      out.x_cp[i] = std::clamp(x[i] + t_old * d[i], box.lower[i], box.upper[i]);
    }
  }
  for (std::size_t j = 0; j < w; ++j) c[j] += dt_min * p[j];
  finish_free();
  return out;
}

// ---------------------------------------------------------------- subspace

SubspaceResult subspace_min(const Vec& x, const Vec& g, const CauchyResult& cp,
                            const LbfgsMemory& memory, const Box& box) {
  const std::size_t n = x.size();
  const double theta = memory.theta();
  const std::size_t w = memory.width();
  SubspaceResult out;
  out.x_bar = cp.x_cp;

  std::vector<std::size_t> z;
  for (std::size_t i = 0; i < n; ++i) {
    if (cp.free[i]) z.push_back(i);
  }
  if (z.empty()) return out;

  // reduced gradient of the model at x_cp
  const Vec mc = w ? memory.m_times(cp.c) : Vec();
  Vec r(z.size());
  Vec wi(w);
  std::vector<Vec> wz;
  if (w) wz.reserve(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const std::size_t i = z[k];
    double v = g[i] + theta * (cp.x_cp[i] - x[i]);
    if (w) {
      memory.w_row(i, wi.data());
      v -= dot(wi, mc);
      wz.push_back(wi);
    }
    r[k] = v;
  }

  Vec du(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) du[k] = -r[k] / theta;
  if (w) {
    Vec v(w, 0.0);
    Dense wtw(w, w);
    for (std::size_t k = 0; k < z.size(); ++k) {
      for (std::size_t a = 0; a < w; ++a) {
        v[a] += wz[k][a] * r[k];
        for (std::size_t b = 0; b < w; ++b) wtw(a, b) += wz[k][a] * wz[k][b];
      }
    }
    v = memory.m_times(v);
    const Dense& m = memory.middle();
    Dense nmat(w, w);
    for (std::size_t a = 0; a < w; ++a) {
      for (std::size_t b = 0; b < w; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < w; ++q) s += m(a, q) * wtw(q, b);
        nmat(a, b) = (a == b ? 1.0 : 0.0) - s / theta;
      }
    }
    LuDecomposition lu(nmat);
    if (!lu.singular()) {
      Dense rhs(w, 1, v);
      lu.solve_in_place(rhs);
      for (std::size_t k = 0; k < z.size(); ++k) {
        du[k] -= dot(wz[k], rhs.storage()) / (theta * theta);
      }
    }
  }

  Vec xu = cp.x_cp;
  bool inside = true;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const std::size_t i = z[k];
    xu[i] = cp.x_cp[i] + du[k];
    if (xu[i] < box.lower[i] || xu[i] > box.upper[i]) inside = false;
  }
  auto descent = [&](const Vec& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += g[i] * (p[i] - x[i]);
    return s < 0.0;
  };
  if (inside) {
    out.x_bar = std::move(xu);
    out.outcome = SubspaceOutcome::kInterior;
    return out;
  }
  Vec clipped = xu;
  box.clip(clipped);
  if (descent(clipped)) {
    out.x_bar = std::move(clipped);
    out.outcome = SubspaceOutcome::kClipped;
    return out;
  }
  // farthest feasible point on the segment x_cp -> xu
  double alpha = 1.0;
  std::size_t limiting = n;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const std::size_t i = z[k];
    double a = 1.0;
    if (du[k] > 0.0) a = (box.upper[i] - cp.x_cp[i]) / du[k];
    if (du[k] < 0.0) a = (box.lower[i] - cp.x_cp[i]) / du[k];
    if (a < alpha) {
      alpha = a;
      limiting = i;
    }
  }
  alpha = std::max(alpha, 0.0);
  Vec ray = cp.x_cp;
  for (std::size_t k = 0; k < z.size(); ++k) ray[z[k]] = cp.x_cp[z[k]] + alpha * du[k];
  box.clip(ray);
  if (limiting < n) {
    const std::size_t k = static_cast<std::size_t>(
        std::find(z.begin(), z.end(), limiting) - z.begin());
    ray[limiting] = du[k] > 0.0 ? box.upper[limiting] : box.lower[limiting];
  }
  if (descent(ray)) {
    out.x_bar = std::move(ray);
    out.outcome = SubspaceOutcome::kRay;
  }
  return out;
}

// ---------------------------------------------------------------- line search

namespace {

// Safeguarded cubic/quadratic step of the Moré-Thuente search.
void dcstep(double& stx, double& fx, double& dx, double& sty, double& fy, double& dy, double& stp,
            double fp, double dp, bool& brackt, double stpmin, double stpmax) {
  const double sgnd = dp * (dx / std::fabs(dx));
  double stpf;
  if (fp > fx) {
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::fabs(theta), std::fabs(dx), std::fabs(dp)});
    double gamma = s * std::sqrt(std::max(0.0, (theta / s) * (theta / s) - (dx / s) * (dp / s)));
    if (stp < stx) gamma = -gamma;
    const double p = (gamma - dx) + theta;
    const double q = ((gamma - dx) + gamma) + dp;
    const double r = p / q;
    const double stpc = stx + r * (stp - stx);
    const double stpq = stx + ((dx / ((fx - fp) / (stp - stx) + dx)) / 2.0) * (stp - stx);
    if (std::fabs(stpc - stx) < std::fabs(stpq - stx)) {
      stpf = stpc;
    } else {
      stpf = stpc + (stpq - stpc) / 2.0;
    }
    brackt = true;
  } else if (sgnd < 0.0) {
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::fabs(theta), std::fabs(dx), std::fabs(dp)});
    double gamma = s * std::sqrt(std::max(0.0, (theta / s) * (theta / s) - (dx / s) * (dp / s)));
    if (stp > stx) gamma = -gamma;
    const double p = (gamma - dp) + theta;
    const double q = ((gamma - dp) + gamma) + dx;
    const double r = p / q;
    const double stpc = stp + r * (stx - stp);
    const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
    stpf = std::fabs(stpc - stp) > std::fabs(stpq - stp) ? stpc : stpq;
    brackt = true;
  } else if (std::fabs(dp) < std::fabs(dx)) {
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::fabs(theta), std::fabs(dx), std::fabs(dp)});
    double gamma = s * std::sqrt(std::max(0.0, (theta / s) * (theta / s) - (dx / s) * (dp / s)));
    if (stp > stx) gamma = -gamma;
    const double p = (gamma - dp) + theta;
    const double q = (gamma + (dx - dp)) + gamma;
    const double r = p / q;
    double stpc;
    if (r < 0.0 && gamma != 0.0) {
      stpc = stp + r * (stx - stp);
    } else if (stp > stx) {
      stpc = stpmax;
    } else {
      stpc = stpmin;
    }
    const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
    if (brackt) {
      stpf = std::fabs(stpc - stp) < std::fabs(stpq - stp) ? stpc : stpq;
      if (stp > stx) {
        stpf = std::min(stp + 0.66 * (sty - stp), stpf);
      } else {
        stpf = std::max(stp + 0.66 * (sty - stp), stpf);
      }
    } else {
      stpf = std::fabs(stpc - stp) > std::fabs(stpq - stp) ? stpc : stpq;
      stpf = std::min(stpmax, stpf);
      stpf = std::max(stpmin, stpf);
    }
  } else {
    if (brackt) {
      const double theta = 3.0 * (fp - fy) / (sty - stp) + dy + dp;
      const double s = std::max({std::fabs(theta), std::fabs(dy), std::fabs(dp)});
      double gamma = s * std::sqrt(std::max(0.0, (theta / s) * (theta / s) - (dy / s) * (dp / s)));
      if (stp > sty) gamma = -gamma;
      const double p = (gamma - dp) + theta;
      const double q = ((gamma - dp) + gamma) + dy;
      const double r = p / q;
      stpf = stp + r * (sty - stp);
    } else if (stp > stx) {
      stpf = stpmax;
    } else {
      stpf = stpmin;
    }
  }

  if (fp > fx) {
    sty = stp;
    fy = fp;
    dy = dp;
  } else {
    if (sgnd < 0.0) {
      sty = stx;
      fy = fx;
      dy = dx;
    }
    stx = stp;
    fx = fp;
    dx = dp;
  }
  stp = stpf;
}

enum class Task { kEvaluate, kConverged, kWarning };

// State of one Moré-Thuente search (the MINPACK-2 dcsrch driver).
class MoreThuente {
 public:
  MoreThuente(double f0, double g0, double stp, double stpmax, const LineSearchOptions& o)
      : ftol_(o.c1), gtol_(o.c2), xtol_(o.xtol), stpmax_(stpmax) {
    finit_ = f0;
    ginit_ = g0;
    gtest_ = ftol_ * ginit_;
    width_ = stpmax_ - stpmin_;
    width1_ = 2.0 * width_;
    stx_ = 0.0;
    fx_ = finit_;
    gx_ = ginit_;
    sty_ = 0.0;
    fy_ = finit_;
    gy_ = ginit_;
    stmin_ = 0.0;
    stmax_ = stp + kXtrapu * stp;
  }

  void cap(double stpmax) {
    stpmax_ = std::min(stpmax_, stpmax);
    stmax_ = std::min(stmax_, stpmax_);
  }
  double stx() const { return stx_; }
  double ftest(double stp) const { return finit_ + stp * gtest_; }

  Task iterate(double& stp, double f, double g) {
    const double ftest = finit_ + stp * gtest_;
    if (stage_ == 1 && f <= ftest && g >= 0.0) stage_ = 2;
    if (brackt_ && (stp <= stmin_ || stp >= stmax_)) return Task::kWarning;
    if (brackt_ && stmax_ - stmin_ <= xtol_ * stmax_) return Task::kWarning;
    if (stp == stpmax_ && f <= ftest && g <= gtest_) return Task::kWarning;
    if (stp == stpmin_ && (f > ftest || g >= gtest_)) return Task::kWarning;
    if (f <= ftest && std::fabs(g) <= gtol_ * (-ginit_)) return Task::kConverged;

    if (stage_ == 1 && f <= fx_ && f > ftest) {
      double fm = f - stp * gtest_;
      double fxm = fx_ - stx_ * gtest_;
      double fym = fy_ - sty_ * gtest_;
      double gm = g - gtest_;
      double gxm = gx_ - gtest_;
      double gym = gy_ - gtest_;
      dcstep(stx_, fxm, gxm, sty_, fym, gym, stp, fm, gm, brackt_, stmin_, stmax_);
      fx_ = fxm + stx_ * gtest_;
      fy_ = fym + sty_ * gtest_;
      gx_ = gxm + gtest_;
      gy_ = gym + gtest_;
    } else {
      dcstep(stx_, fx_, gx_, sty_, fy_, gy_, stp, f, g, brackt_, stmin_, stmax_);
    }
    if (brackt_) {
      if (std::fabs(sty_ - stx_) >= 0.66 * width1_) stp = stx_ + 0.5 * (sty_ - stx_);
      width1_ = width_;
      width_ = std::fabs(sty_ - stx_);
    }
    if (brackt_) {
      stmin_ = std::min(stx_, sty_);
      stmax_ = std::max(stx_, sty_);
    } else {
      stmin_ = stp + kXtrapl * (stp - stx_);
      stmax_ = stp + kXtrapu * (stp - stx_);
    }
    stp = std::clamp(stp, stpmin_, stpmax_);
    if ((brackt_ && (stp <= stmin_ || stp >= stmax_)) ||
        (brackt_ && stmax_ - stmin_ <= xtol_ * stmax_)) {
      stp = stx_;
    }
    return Task::kEvaluate;
  }

 private:
  static constexpr double kXtrapl = 1.1;
  static constexpr double kXtrapu = 4.0;
  double ftol_, gtol_, xtol_;
  double stpmin_ = 0.0;
  double stpmax_;
  bool brackt_ = false;
  int stage_ = 1;
  double finit_, ginit_, gtest_;
  double width_, width1_;
  double stx_, fx_, gx_, sty_, fy_, gy_;
  double stmin_, stmax_;
};

}  // namespace

LineSearchResult line_search(const SliceFn& phi, double f0, double slope0, double step0,
                             double step_max, const LineSearchOptions& opts) {
  LineSearchResult out;
  if (!(slope0 < 0.0) || !(step_max > 0.0) || !std::isfinite(f0)) return out;
  double stp = std::min(step0, step_max);
  if (!(stp > 0.0)) return out;

  std::optional<MoreThuente> mt;
  double last_good = 0.0;  // largest step known to give a finite value
  bool have_best = false;
  LineSearchResult best;

  auto sufficient = [&](double a, double f) { return f <= f0 + opts.c1 * a * slope0; };
  bool have_approx = false;
  LineSearchResult approx;
  auto record = [&](double a, double f, double g) {
    if (sufficient(a, f) && f < f0 && (!have_best || f < best.f)) {
      best.step = a;
      best.f = f;
      best.slope = g;
      have_best = true;
    }
    if (opts.approx_wolfe_eps > 0.0 && f <= f0 + opts.approx_wolfe_eps * std::fabs(f0) &&
        g >= opts.c2 * slope0 && g <= (2.0 * opts.c1 - 1.0) * slope0 &&
        (!have_approx || std::fabs(g) < std::fabs(approx.slope))) {
      approx.step = a;
      approx.f = f;
      approx.slope = g;
      have_approx = true;
    }
  };

  for (int trial = 0; trial < opts.max_trials; ++trial) {
    double slope = 0.0;
    const double f = phi(stp, slope);
    ++out.evaluations;
    if (!std::isfinite(f) || !std::isfinite(slope)) {
      // outside the domain: back off halfway toward the last finite point
      const double lo = mt ? mt->stx() : last_good;
      step_max = lo + 0.9 * (stp - lo);
      if (mt) mt->cap(step_max);
      stp = lo + 0.5 * (stp - lo);
      if (!(stp > 0.0)) break;
      continue;
    }
    last_good = std::max(last_good, stp);
    record(stp, f, slope);
    if (!mt) mt.emplace(f0, slope0, stp, step_max, opts);
    const double evaluated = stp;
    const Task task = mt->iterate(stp, f, slope);
    if (task == Task::kConverged && !(f < f0)) {
      // flat to rounding: only usable through the approximate conditions
      if (have_approx) break;
    } else if (task == Task::kConverged) {
      out.step = evaluated;
      out.f = f;
      out.slope = slope;
      out.status = LineSearchStatus::kConverged;
      if (opts.quadratic_refine) {
        // If phi(0), phi'(0), phi(a), phi'(a) fit one parabola, step to its vertex.
        const double a = evaluated;
        const double curvature = (slope - slope0) / a;
        const double misfit = std::fabs((f - f0) - 0.5 * a * (slope0 + slope));
        const double scale = std::fabs(f0) + std::fabs(f) + a * (std::fabs(slope0) + std::fabs(slope));
        if (curvature > 0.0 && misfit <= 1e-10 * scale && std::fabs(slope) > 1e-12 * -slope0) {
          const double vertex = -slope0 / curvature;
          if (vertex > 0.0 && vertex <= step_max && std::fabs(vertex - a) > 1e-12 * a) {
            double s2 = 0.0;
            const double f2 = phi(vertex, s2);
            ++out.evaluations;
            if (std::isfinite(f2) && std::isfinite(s2) && f2 <= f && sufficient(vertex, f2) &&
                std::fabs(s2) <= opts.c2 * -slope0) {
              out.step = vertex;
              out.f = f2;
              out.slope = s2;
            }
          }
        }
      }
      return out;
    }
    if (task == Task::kWarning) break;
  }
  if (have_best) {
    out.step = best.step;
    out.f = best.f;
    out.slope = best.slope;
    out.status = LineSearchStatus::kSufficientDecrease;
  } else if (have_approx) {
    out.step = approx.step;
    out.f = approx.f;
    out.slope = approx.slope;
    out.status = LineSearchStatus::kApproximate;
  }
  return out;
}

// ---------------------------------------------------------------- driver

std::string_view to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::kConverged: return "Converged";
    case InnerStatus::kMaxIter: return "MaxIter";
    case InnerStatus::kLineSearchFail: return "LineSearchFail";
    case InnerStatus::kNumericError: return "NumericError";
  }
  return "?";
}

InnerResult minimize(const ObjectiveFn& fg, Vec x0, const Box& box, const LbfgsOptions& opts,
                     const std::function<void(const IterationInfo&)>& observer) {
  const std::size_t n = x0.size();
  if (box.size() != n) throw Error(ErrorKind::kDimension, "box and start point differ in size");
  InnerResult res;
  box.clip(x0);
  res.x = std::move(x0);
  res.g.assign(n, 0.0);
  res.f = fg(res.x, res.g);
  res.evaluations = 1;
  if (!std::isfinite(res.f) || !all_finite(res.g)) {
    res.status = InnerStatus::kNumericError;
    return res;
  }

  LbfgsMemory memory(n, opts.history, opts.eps_curv);
  Vec trial_x(n);
  Vec trial_g(n);
  Vec d(n);
  // evaluations of the current slice, so the accepted point need not be recomputed
  struct Probe {
    double step;
    double f;
    Vec x;
    Vec g;
  };
  std::vector<Probe> probes;

  while (true) {
    res.projected_gradient = projected_gradient_norm(res.x, res.g, box);
    if (res.projected_gradient <= opts.tol) {
      res.status = InnerStatus::kConverged;
      return res;
    }
    if (res.iterations >= opts.max_iter) {
      res.status = InnerStatus::kMaxIter;
      return res;
    }

    const CauchyResult cp = cauchy_point(res.x, res.g, memory, box);
    const SubspaceResult sm = subspace_min(res.x, res.g, cp, memory, box);
    const Vec& x_bar = sm.x_bar;
    double slope0 = 0.0;
    double step_max = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = x_bar[i] - res.x[i];
      slope0 += d[i] * res.g[i];
      if (d[i] > 0.0) step_max = std::min(step_max, (box.upper[i] - res.x[i]) / d[i]);
      if (d[i] < 0.0) step_max = std::min(step_max, (box.lower[i] - res.x[i]) / d[i]);
    }
    step_max = std::min(std::max(step_max, 1.0), 1e10);
    if (!(slope0 < 0.0)) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      res.status = InnerStatus::kLineSearchFail;
      return res;
    }
    const double step0 = memory.empty() ? std::min(1.0 / norm(d), step_max) : 1.0;

    probes.clear();
    auto point = [&](double a, Vec& out) {
      if (a == 1.0) {
        out = x_bar;
        return;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double v = res.x[i] + a * d[i];
        // land exactly on a bound the step reaches
        if (d[i] > 0.0 && (box.upper[i] - res.x[i]) / d[i] <= a) v = box.upper[i];
        if (d[i] < 0.0 && (box.lower[i] - res.x[i]) / d[i] <= a) v = box.lower[i];
        out[i] = std::clamp(v, box.lower[i], box.upper[i]);
      }
    };
    const SliceFn phi = [&](double a, double& slope) {
      point(a, trial_x);
      const double f = fg(trial_x, trial_g);
      ++res.evaluations;
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += trial_g[i] * d[i];
      if (std::isfinite(f)) probes.push_back({a, f, trial_x, trial_g});
      return f;
    };
    const LineSearchResult ls = line_search(phi, res.f, slope0, step0, step_max, opts.line_search);
    const Probe* accepted = nullptr;
    if (ls.status != LineSearchStatus::kFailed) {
      for (const Probe& p : probes) {
        if (p.step == ls.step) accepted = &p;
      }
    }
    const bool decreased =
        accepted != nullptr &&
        (accepted->f < res.f ||
         (ls.status == LineSearchStatus::kApproximate &&
          accepted->f <= res.f + opts.line_search.approx_wolfe_eps * std::fabs(res.f)));
    if (!decreased || !all_finite(accepted->g)) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      res.status = InnerStatus::kLineSearchFail;
      return res;
    }

    Vec s(n);
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = accepted->x[i] - res.x[i];
      y[i] = accepted->g[i] - res.g[i];
    }
    const bool stored = memory.push(s, y);
    res.x = accepted->x;
    res.g = accepted->g;
    res.f = accepted->f;
    ++res.iterations;
    if (observer) {
      IterationInfo info;
      info.iteration = res.iterations;
      info.x = &res.x;
      info.f = res.f;
      info.g = &res.g;
      info.step = ls.step;
      info.pair_stored = stored;
      info.memory = &memory;
      info.line_search = ls.status;
      observer(info);
    }
  }
}

}  // namespace declsolve
