#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "declsolve/lbfgsb.hpp"
#include "oracles.hpp"

using namespace declsolve;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec to_vec(const VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

MatrixXd random_spd(Eigen::Index n, std::mt19937_64& gen, double min_eig = 0.5, double max_eig = 5.0) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(min_eig, max_eig);
  MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n * n; ++i) g.data()[i] = nd(gen);
  const Eigen::HouseholderQR<MatrixXd> qr(g);
  const MatrixXd q = qr.householderQ();
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = ud(gen);
  return q * d.asDiagonal() * q.transpose();
}

ObjectiveFn quadratic(const MatrixXd& Q, const VectorXd& c) {
  return [Q, c](const Vec& x, Vec& grad) {
    const VectorXd xe = oracle::to_eigen(x);
    const VectorXd g = Q * xe + c;
    grad = to_vec(g);
    return 0.5 * xe.dot(Q * xe) + c.dot(xe);
  };
}

// Memory filled with curvature pairs of a fixed SPD matrix.
LbfgsMemory memory_from(const MatrixXd& H, std::size_t pairs, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  const auto n = static_cast<std::size_t>(H.rows());
  LbfgsMemory m(n, 10);
  for (std::size_t k = 0; k < pairs; ++k) {
    VectorXd s(H.rows());
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = nd(gen);
    m.push(to_vec(s), to_vec(H * s));
  }
  return m;
}

MatrixXd dense_b(const LbfgsMemory& m) {
  const auto n = static_cast<Eigen::Index>(m.dim());
  MatrixXd B(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec e(m.dim(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    B.col(j) = oracle::to_eigen(m.b_times(e));
  }
  return B;
}

// First local minimizer of g'(z-x) + 1/2 (z-x)'B(z-x) along z(t) = P(x - t g),
// walking the path one linear piece at a time.
VectorXd cauchy_oracle(const VectorXd& x, const VectorXd& g, const MatrixXd& B, const VectorXd& lo,
                       const VectorXd& hi) {
  const Eigen::Index n = x.size();
  VectorXd tb(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (g(i) < 0.0) tb(i) = (x(i) - hi(i)) / g(i);
    else if (g(i) > 0.0) tb(i) = (x(i) - lo(i)) / g(i);
    else tb(i) = kInf;
  }
  std::vector<double> breaks;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (tb(i) > 0.0 && std::isfinite(tb(i))) breaks.push_back(tb(i));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.push_back(kInf);
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = tb(i) > 0.0 ? -g(i) : 0.0;
  VectorXd z = x;
  double t_prev = 0.0;
  for (double t_next : breaks) {
    if (t_next <= t_prev) continue;
    if (d.squaredNorm() == 0.0) return z;
    const double fp = g.dot(d) + (z - x).dot(B * d);
    const double fpp = d.dot(B * d);
    if (fp >= 0.0) return z;
    const double dt = -fp / fpp;
    if (t_prev + dt < t_next) return z + dt * d;
    z += (t_next - t_prev) * d;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (tb(i) == t_next) {
        d(i) = 0.0;
        z(i) = g(i) < 0.0 ? hi(i) : lo(i);
      }
    }
    t_prev = t_next;
  }
  return z;
}

}  // namespace

TEST_SUITE("lbfgsb") {
  TEST_CASE("half squared norm converges in a few iterations") {
    const ObjectiveFn f = [](const Vec& x, Vec& g) {
      g = x;
      return 0.5 * (x[0] * x[0] + x[1] * x[1]);
    };
    LbfgsOptions opts;
    opts.tol = 1e-8;
    const InnerResult r = minimize(f, {1.0, 1.0}, Box::unbounded(2), opts);
    CHECK(r.status == InnerStatus::kConverged);
    CHECK(r.iterations <= 3);
    CHECK(std::fabs(r.g[0]) <= 1e-8);
    CHECK(std::fabs(r.g[1]) <= 1e-8);
    CHECK(std::fabs(r.x[0]) <= 1e-8);
  }

  TEST_CASE("Rosenbrock reaches (1, 1)") {
    const ObjectiveFn f = [](const Vec& x, Vec& g) {
      const double a = 1.0 - x[0];
      const double b = x[1] - x[0] * x[0];
      g = {-2.0 * a - 400.0 * x[0] * b, 200.0 * b};
      return a * a + 100.0 * b * b;
    };
    LbfgsOptions opts;
    opts.tol = 1e-10;
    const InnerResult r = minimize(f, {-1.2, 1.0}, Box::unbounded(2), opts);
    CHECK(r.status == InnerStatus::kConverged);
    CHECK(std::fabs(r.x[0] - 1.0) <= 1e-6);
    CHECK(std::fabs(r.x[1] - 1.0) <= 1e-6);
  }

  TEST_CASE("box projection of the unconstrained optimum") {
    const Vec c = {2.0, -1.0, 0.5};
    const ObjectiveFn f = [&](const Vec& x, Vec& g) {
      double v = 0.0;
      g.resize(3);
      for (std::size_t i = 0; i < 3; ++i) {
        g[i] = 2.0 * (x[i] - c[i]);
        v += (x[i] - c[i]) * (x[i] - c[i]);
      }
      return v;
    };
    const Box box{{0, 0, 0}, {1, 1, 1}};
    const InnerResult r = minimize(f, {0.3, 0.3, 0.3}, box);
    CHECK(r.status == InnerStatus::kConverged);
    CHECK(r.x[0] == 1.0);
    CHECK(r.x[1] == 0.0);
    CHECK(std::fabs(r.x[2] - 0.5) <= 1e-8);
  }

  TEST_CASE("projected gradient zeroes outward components at bounds") {
    const Box box{{0, 0, -kInf}, {1, 1, kInf}};
    const Vec pg = projected_gradient({0, 1, 5}, {2, -3, 4}, box);
    CHECK(pg == Vec{0, 0, 4});
    CHECK(projected_gradient({0, 1, 5}, {-2, 3, 4}, box) == Vec{-2, 3, 4});
    CHECK(projected_gradient_norm({0, 1, 5}, {2, -3, 4}, box) == 4.0);
  }

  TEST_CASE("memory keeps only positive-curvature pairs and the newest history") {
    LbfgsMemory m(2, 3, 1e-10);
    CHECK_FALSE(m.push({1, 0}, {-1, 0}));
    CHECK_FALSE(m.push({1, 0}, {0, 1}));
    CHECK(m.push({1, 0}, {2, 0}));
    CHECK(m.theta() == doctest::Approx(2.0));
    for (int k = 0; k < 5; ++k) CHECK(m.push({1, static_cast<double>(k)}, {1, static_cast<double>(k)}));
    CHECK(m.size() == 3);
    for (std::size_t k = 0; k < m.size(); ++k) {
      double sy = 0.0;
      for (std::size_t i = 0; i < 2; ++i) sy += m.s()[k][i] * m.y()[k][i];
      CHECK(sy > 0.0);
    }
  }

  TEST_CASE("compact form reproduces the secant equations") {
    std::mt19937_64 gen(1);
    const MatrixXd H = random_spd(6, gen);
    const LbfgsMemory m = memory_from(H, 4, gen);
    const MatrixXd B = dense_b(m);
    CHECK((B - B.transpose()).norm() <= 1e-10 * B.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (B + B.transpose())).eigenvalues().minCoeff() > 0.0);
    // the newest pair satisfies B s = y
    const VectorXd s = oracle::to_eigen(m.s().back());
    const VectorXd y = oracle::to_eigen(m.y().back());
    CHECK(oracle::relative_error(B * s, y) <= 1e-10);
  }

  TEST_CASE("Cauchy point with a zero gradient stays put") {
    std::mt19937_64 gen(2);
    const LbfgsMemory m = memory_from(random_spd(3, gen), 2, gen);
    const Box box{{-1, -1, -1}, {1, 1, 1}};
    const CauchyResult cp = cauchy_point({0.2, 0.3, -0.4}, {0, 0, 0}, m, box);
    CHECK(cp.x_cp == Vec{0.2, 0.3, -0.4});
    for (bool f : cp.free) CHECK(f);
  }

  TEST_CASE("Cauchy point without bounds minimizes the model along -g") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 10; ++trial) {
      const MatrixXd H = random_spd(5, gen);
      const LbfgsMemory m = memory_from(H, 1 + trial % 5, gen);
      const MatrixXd B = dense_b(m);
      std::normal_distribution<double> nd;
      VectorXd x(5);
      VectorXd g(5);
      for (int i = 0; i < 5; ++i) {
        x(i) = nd(gen);
        g(i) = nd(gen);
      }
      const CauchyResult cp = cauchy_point(to_vec(x), to_vec(g), m, Box::unbounded(5));
      const VectorXd expect = x - (g.dot(g) / g.dot(B * g)) * g;
      CHECK(oracle::relative_error(oracle::to_eigen(cp.x_cp), expect) <= 1e-10);
    }
  }

  TEST_CASE("Cauchy point matches the segment-by-segment oracle") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.05, 1.0);
    int with_active = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::Index n = 2 + trial % 5;
      const MatrixXd H = random_spd(n, gen, 0.2, 3.0);
      const LbfgsMemory m = memory_from(H, static_cast<std::size_t>(trial % 4), gen);
      const MatrixXd B = dense_b(m);
      VectorXd lo(n);
      VectorXd hi(n);
      VectorXd x(n);
      VectorXd g(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        lo(i) = -ud(gen);
        hi(i) = ud(gen);
        x(i) = lo(i) + (hi(i) - lo(i)) * (trial % 7 == 0 && i == 0 ? 0.0 : ud(gen) * 0.9);
        g(i) = 3.0 * nd(gen);
      }
      const CauchyResult cp = cauchy_point(to_vec(x), to_vec(g), m, Box{to_vec(lo), to_vec(hi)});
      const VectorXd expect = cauchy_oracle(x, g, B, lo, hi);
      CHECK(oracle::relative_error(oracle::to_eigen(cp.x_cp), expect) <= 1e-10);
      bool any_active = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool at_bound = cp.x_cp[i] == lo(i) || cp.x_cp[i] == hi(i);
        any_active = any_active || at_bound;
        if (at_bound && g(i) != 0.0) CHECK_FALSE(cp.free[i]);
      }
      with_active += any_active ? 1 : 0;
    }
    CHECK(with_active > 20);
  }

  TEST_CASE("subspace step without bounds is the model's Newton step") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 10; ++trial) {
      const MatrixXd H = random_spd(4, gen);
      const LbfgsMemory m = memory_from(H, 3, gen);
      const MatrixXd B = dense_b(m);
      const Vec x = {0.1, -0.2, 0.3, 0.4};
      const Vec g = {1.0, -0.5, 0.25, 2.0};
      const CauchyResult cp = cauchy_point(x, g, m, Box::unbounded(4));
      const SubspaceResult sr = subspace_min(x, g, cp, m, Box::unbounded(4));
      const VectorXd expect = oracle::to_eigen(x) - B.ldlt().solve(oracle::to_eigen(g));
      CHECK(sr.outcome == SubspaceOutcome::kInterior);
      CHECK(oracle::relative_error(oracle::to_eigen(sr.x_bar), expect) <= 1e-9);
    }
  }

  TEST_CASE("subspace step is clipped into the box") {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> nd;
    int clipped = 0;
    int ray = 0;
    for (int trial = 0; trial < 20000 && (clipped < 5 || ray < 1); ++trial) {
      const Eigen::Index n = 2;
      const MatrixXd H = random_spd(n, gen, 0.01, 10.0);
      const LbfgsMemory m = memory_from(H, 2, gen);
      Vec lo(n);
      Vec hi(n);
      Vec x(n);
      Vec g(n);
      for (std::size_t i = 0; i < 2; ++i) {
        lo[i] = -std::fabs(nd(gen)) * 0.3;
        hi[i] = std::fabs(nd(gen)) * 0.3;
        x[i] = 0.0;
        g[i] = nd(gen);
      }
      const Box box{lo, hi};
      const CauchyResult cp = cauchy_point(x, g, m, box);
      const SubspaceResult sr = subspace_min(x, g, cp, m, box);
      CHECK(box.contains(sr.x_bar));
      if (sr.outcome == SubspaceOutcome::kClipped) ++clipped;
      if (sr.outcome == SubspaceOutcome::kRay) {
        ++ray;
        double slope = 0.0;
        for (std::size_t i = 0; i < 2; ++i) slope += (sr.x_bar[i] - x[i]) * g[i];
        CHECK(slope < 0.0);
      }
      if (sr.outcome != SubspaceOutcome::kCauchy) {
        double slope = 0.0;
        for (std::size_t i = 0; i < 2; ++i) slope += (sr.x_bar[i] - x[i]) * g[i];
        CHECK(slope < 0.0);
      }
    }
    CHECK(clipped >= 5);
    CHECK(ray >= 1);
  }

  TEST_CASE("exact quadratic step is accepted on the first trial") {
    const SliceFn phi = [](double a, double& slope) {
      slope = 2.0 * (a - 1.0);
      return (a - 1.0) * (a - 1.0);
    };
    const LineSearchResult r = line_search(phi, 1.0, -2.0, 1.0, kInf);
    CHECK(r.status == LineSearchStatus::kConverged);
    CHECK(r.step == 1.0);
    CHECK(r.evaluations == 1);
  }

  TEST_CASE("line search backs off where the function is undefined") {
    // f(x) = -2x - log(1 - x) along d = +1 from 0: slope -1, undefined for x >= 1.
    const SliceFn phi = [](double a, double& slope) {
      if (a >= 1.0) {
        slope = std::numeric_limits<double>::quiet_NaN();
        return std::numeric_limits<double>::quiet_NaN();
      }
      slope = -2.0 + 1.0 / (1.0 - a);
      return -2.0 * a - std::log(1.0 - a);
    };
    const LineSearchResult r = line_search(phi, 0.0, -1.0, 4.0, kInf);
    CHECK(r.status == LineSearchStatus::kConverged);
    CHECK(r.step > 0.0);
    CHECK(r.step < 1.0);
    CHECK(std::isfinite(r.f));
    CHECK(r.f <= 1e-4 * r.step * -1.0);
    CHECK(std::fabs(r.slope) <= 0.9);
  }

  TEST_CASE("strong Wolfe conditions hold on random quartic slices") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
      const double q4 = pos(gen);
      const double q3 = u(gen);
      const double q2 = u(gen);
      const double s0 = -pos(gen);
      auto value = [&](double a) { return ((q4 * a + q3) * a + q2) * a * a + s0 * a; };
      auto deriv = [&](double a) { return ((4.0 * q4 * a + 3.0 * q3) * a + 2.0 * q2) * a + s0; };
      const SliceFn phi = [&](double a, double& slope) {
        slope = deriv(a);
        return value(a);
      };
      const double step0 = trial % 2 == 0 ? 1.0 : 0.01 + pos(gen) * 3.0;
      const LineSearchResult r = line_search(phi, 0.0, s0, step0, kInf);
      CAPTURE(trial);
      CHECK(r.status == LineSearchStatus::kConverged);
      CHECK(value(r.step) <= 1e-4 * r.step * s0);
      CHECK(std::fabs(deriv(r.step)) <= 0.9 * std::fabs(s0));
      CHECK(r.f == value(r.step));
    }
  }

  TEST_CASE("iterates descend, stay in the box, and store positive curvature") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 12;
      const MatrixXd Q = random_spd(n, gen, 0.1, 20.0);
      VectorXd c(n);
      for (Eigen::Index i = 0; i < n; ++i) c(i) = 3.0 * nd(gen);
      // non-quadratic term keeps the problem from being trivial for the model
      const ObjectiveFn f = [&](const Vec& x, Vec& grad) {
        Vec gq;
        double v = quadratic(Q, c)(x, gq);
        for (std::size_t i = 0; i < x.size(); ++i) {
          v += std::log(std::cosh(x[i]));
          gq[i] += std::tanh(x[i]);
        }
        grad = gq;
        return v;
      };
      const Box box{Vec(n, -0.5), Vec(n, 0.7)};
      double prev = kInf;
      bool ok = true;
      int approximate = 0;
      const auto observer = [&](const IterationInfo& info) {
        // strict descent, except approximate-Wolfe steps on a slice flat to rounding
        const bool descended = info.line_search == LineSearchStatus::kApproximate
                                   ? info.f <= prev + 1e-12 * std::fabs(prev)
                                   : info.f < prev;
        if (!descended) ok = false;
        approximate += info.line_search == LineSearchStatus::kApproximate ? 1 : 0;
        prev = info.f;
        for (std::size_t i = 0; i < info.x->size(); ++i) {
          if ((*info.x)[i] < box.lower[i] || (*info.x)[i] > box.upper[i]) ok = false;
        }
        const LbfgsMemory& m = *info.memory;
        for (std::size_t k = 0; k < m.size(); ++k) {
          double sy = 0.0;
          for (std::size_t i = 0; i < m.dim(); ++i) sy += m.s()[k][i] * m.y()[k][i];
          if (!(sy > 0.0)) ok = false;
        }
      };
      Vec x0(n);
      for (double& v : x0) v = std::clamp(nd(gen), -0.5, 0.7);
      LbfgsOptions opts;
      opts.tol = 1e-9;
      const InnerResult r = minimize(f, x0, box, opts, observer);
      CHECK(ok);
      CHECK(approximate <= 3);
      CHECK(r.status == InnerStatus::kConverged);
      CHECK(box.contains(r.x));
    }
  }

  TEST_CASE("unconstrained quadratics terminate in at most dim + 2 iterations") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> nd;
    for (Eigen::Index n = 1; n <= 10; ++n) {
      const MatrixXd Q = random_spd(n, gen);
      VectorXd c(n);
      for (Eigen::Index i = 0; i < n; ++i) c(i) = nd(gen);
      LbfgsOptions opts;
      opts.tol = 1e-10;
      const InnerResult r = minimize(quadratic(Q, c), Vec(n, 0.0), Box::unbounded(n), opts);
      CAPTURE(n);
      CHECK(r.status == InnerStatus::kConverged);
      CHECK(r.iterations <= static_cast<std::size_t>(n) + 2);
    }
  }

  TEST_CASE("bounded quadratics agree with the enumeration and active-set oracles") {
    std::mt19937_64 gen(10);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 2 + trial % 7;
      oracle::BoxQp qp;
      qp.Q = random_spd(n, gen, 0.2, 5.0);
      qp.c = VectorXd(n);
      qp.lo = VectorXd(n);
      qp.hi = VectorXd(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        qp.c(i) = 3.0 * nd(gen);
        qp.lo(i) = i % 3 == 2 ? -kInf : -std::fabs(nd(gen));
        qp.hi(i) = i % 4 == 3 ? kInf : std::fabs(nd(gen));
      }
      const VectorXd xe = oracle::box_qp_enumerate(qp);
      const VectorXd xa = oracle::box_qp_active_set(qp);
      CHECK(std::fabs(qp.value(xe) - qp.value(xa)) <= 1e-12 * std::max(1.0, std::fabs(qp.value(xe))));
      CHECK(oracle::box_qp_kkt(qp, xa) <= 1e-10);
      LbfgsOptions opts;
      opts.tol = 1e-10;
      const InnerResult r =
          minimize(quadratic(qp.Q, qp.c), Vec(n, 0.0), Box{to_vec(qp.lo), to_vec(qp.hi)}, opts);
      CHECK(r.status == InnerStatus::kConverged);
      CHECK(std::fabs(r.f - qp.value(xa)) <= 1e-8);
    }
  }

  TEST_CASE("non-finite start and iteration limit") {
    const ObjectiveFn bad = [](const Vec&, Vec& g) {
      g = {0.0};
      return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK(minimize(bad, {0.0}, Box::unbounded(1)).status == InnerStatus::kNumericError);
    const ObjectiveFn rosen = [](const Vec& x, Vec& g) {
      const double a = 1.0 - x[0];
      const double b = x[1] - x[0] * x[0];
      g = {-2.0 * a - 400.0 * x[0] * b, 200.0 * b};
      return a * a + 100.0 * b * b;
    };
    LbfgsOptions opts;
    opts.max_iter = 3;
    const InnerResult r = minimize(rosen, {-1.2, 1.0}, Box::unbounded(2), opts);
    CHECK(r.status == InnerStatus::kMaxIter);
    CHECK(r.iterations == 3);
  }
}
