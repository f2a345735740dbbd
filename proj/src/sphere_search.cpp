#include "phisum/sphere_search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <thread>

namespace phisum {

int default_thread_count() {
  if (const char* env = std::getenv("PHISUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace {

constexpr double kGolden = 0.6180339887498949;

struct Evaluator {
  const BlockObjective& f;
  long count = 0;
  double operator()(const Blocks& b) {
    ++count;
    const double v = f(b);
    return std::isnan(v) ? -kInfD : v;
  }
  static constexpr double kInfD = std::numeric_limits<double>::infinity();
};

bool normalize_blocks(Blocks& b) {
  for (auto& v : b) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) return false;
    v /= n;
  }
  return true;
}

// Exact-ish maximization over one 2-D block.
double line_search_2d(Evaluator& ev, Blocks& x, std::size_t j, double fx, int samples) {
  const double theta0 = std::atan2(x[j](1), x[j](0));
  auto at = [&](double th) {
    Blocks y = x;
    y[j](0) = std::cos(th);
    y[j](1) = std::sin(th);
    return y;
  };
  const int n = std::max(samples, 16);
  const double step = 2.0 * std::numbers::pi / n;
  std::vector<double> vals(static_cast<std::size_t>(n));
  vals[0] = fx;
  for (int k = 1; k < n; ++k) {
    vals[static_cast<std::size_t>(k)] = ev(at(theta0 + step * k));
    if (std::isinf(vals[static_cast<std::size_t>(k)]) && vals[static_cast<std::size_t>(k)] > 0) {
      x = at(theta0 + step * k);
      return vals[static_cast<std::size_t>(k)];
    }
  }
  std::vector<int> peaks;
  for (int k = 0; k < n; ++k) {
    const double v = vals[static_cast<std::size_t>(k)];
    const double l = vals[static_cast<std::size_t>((k + n - 1) % n)];
    const double r = vals[static_cast<std::size_t>((k + 1) % n)];
    if (v >= l && v >= r) peaks.push_back(k);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) {
    return vals[static_cast<std::size_t>(a)] > vals[static_cast<std::size_t>(b)];
  });
  if (peaks.size() > 6) peaks.resize(6);

  double best = fx;
  double best_th = theta0;
  for (int k : peaks) {
    double a = theta0 + step * (k - 1);
    double b = theta0 + step * (k + 1);
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = ev(at(c));
    double fd = ev(at(d));
    for (int it = 0; it < 64 && (b - a) > 1e-15; ++it) {
      if (fc >= fd) {
        b = d; d = c; fd = fc;
        c = b - kGolden * (b - a);
        fc = ev(at(c));
      } else {
        a = c; c = d; fc = fd;
        d = a + kGolden * (b - a);
        fd = ev(at(d));
      }
    }
    const double th = fc >= fd ? c : d;
    const double v = std::max(fc, fd);
    const double vs = vals[static_cast<std::size_t>(k)];
    if (v > best) { best = v; best_th = th; }
    if (vs > best) { best = vs; best_th = theta0 + step * k; }
  }
  if (best > fx) x = at(best_th);
  return std::max(best, fx);
}

// Projected finite-difference ascent plus pattern polish on one block.
double local_ascent_nd(Evaluator& ev, Blocks& x, std::size_t j, double fx) {
  const Eigen::Index d = x[j].size();
  auto moved = [&](const Vector& u) {
    Blocks y = x;
    y[j] = u / u.norm();
    return y;
  };
  for (int it = 0; it < 200; ++it) {
    const double h = 1e-6;
    Vector g(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      Vector up = x[j], dn = x[j];
      up(i) += h;
      dn(i) -= h;
      const double fu = ev(moved(up));
      const double fdn = ev(moved(dn));
      if (std::isinf(fu) && fu > 0) { x = moved(up); return fu; }
      if (std::isinf(fdn) && fdn > 0) { x = moved(dn); return fdn; }
      g(i) = (fu - fdn) / (2 * h);
    }
    g -= g.dot(x[j]) * x[j];
    const double gn = g.norm();
    if (!(gn > 1e-14)) break;
    g /= gn;
    bool improved = false;
    for (double eta = 0.5; eta > 1e-12; eta *= 0.5) {
      Blocks y = moved(x[j] + eta * g);
      const double fy = ev(y);
      if (fy > fx) {
        x = std::move(y);
        fx = fy;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  for (double s = 0.1; s > 1e-11; s *= 0.25) {
    bool any = true;
    for (int moves = 0; any && moves < 64; ++moves) {
      any = false;
      for (Eigen::Index i = 0; i < d; ++i) {
        for (double sg : {1.0, -1.0}) {
          Vector u = x[j];
          u(i) += sg * s;
          Blocks y = moved(u);
          const double fy = ev(y);
          if (fy > fx * (1 + 1e-15) + 1e-300) {
            x = std::move(y);
            fx = fy;
            any = true;
          }
        }
      }
    }
  }
  return fx;
}

struct StartResult {
  Blocks x;
  double value = -std::numeric_limits<double>::infinity();
  long evals = 0;
};

StartResult refine(const BlockObjective& f, Blocks x, const SphereSearchConfig& cfg) {
  Evaluator ev{f};
  StartResult out;
  double fx = ev(x);
  if (std::isinf(fx) && fx > 0) {
    out.x = std::move(x);
    out.value = fx;
    out.evals = ev.count;
    return out;
  }
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    const double before = fx;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const auto d = x[j].size();
      if (d == 1) {
        Blocks y = x;
        y[j] = -y[j];
        const double fy = ev(y);
        if (fy > fx) { x = std::move(y); fx = fy; }
      } else if (d == 2) {
        fx = line_search_2d(ev, x, j, fx, cfg.angle_samples);
      } else {
        fx = local_ascent_nd(ev, x, j, fx);
      }
      if (std::isinf(fx) && fx > 0) break;
    }
    if (std::isinf(fx)) break;
    if (x.size() == 1) break;  // no other block to alternate with
    if (fx - before <= cfg.rel_tol * std::max(1.0, std::abs(fx))) break;
  }
  out.x = std::move(x);
  out.value = fx;
  out.evals = ev.count;
  return out;
}

}  // namespace

SphereSearchResult maximize_on_spheres(const BlockObjective& f, const std::vector<int>& dims,
                                       const std::vector<Blocks>& candidates,
                                       const SphereSearchConfig& cfg) {
  SphereSearchResult res;
  Evaluator ev{f};

  struct Scored {
    Blocks x;
    double v;
  };
  std::vector<Scored> scored;
  for (auto c : candidates) {
    if (c.size() != dims.size()) throw Error(ErrorCode::dimension_mismatch, "sphere search: candidate block count");
    for (std::size_t j = 0; j < dims.size(); ++j)
      require_dim(static_cast<std::size_t>(c[j].size()), static_cast<std::size_t>(dims[j]), "sphere search candidate");
    if (!normalize_blocks(c)) continue;
    const double v = ev(c);
    scored.push_back({std::move(c), v});
    if (std::isinf(v) && v > 0) {
      res.argmax = scored.back().x;
      res.value = v;
      res.evaluations = ev.count;
      return res;
    }
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.v > b.v; });
  if (!scored.empty()) {
    res.argmax = scored.front().x;
    res.value = scored.front().v;
  }

  std::vector<Blocks> starts;
  for (std::size_t i = 0; i < scored.size() && static_cast<int>(i) < cfg.keep_candidates; ++i)
    starts.push_back(scored[i].x);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < cfg.restarts; ++r) {
    Blocks x;
    for (int d : dims) {
      Vector v(d);
      for (int i = 0; i < d; ++i) v(i) = gauss(rng);
      x.push_back(v);
    }
    if (normalize_blocks(x)) starts.push_back(std::move(x));
  }

  std::vector<StartResult> results(starts.size());
  const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(starts.size())));
  if (nthreads == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) results[i] = refine(f, starts[i], cfg);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < starts.size(); i += static_cast<std::size_t>(nthreads))
          results[i] = refine(f, starts[i], cfg);
      });
    }
    for (auto& th : pool) th.join();
  }
  res.evaluations = ev.count;
  for (auto& r : results) {
    res.evaluations += r.evals;
    res.locals.push_back(r.x);
    res.local_values.push_back(r.value);
    if (r.value > res.value) {
      res.value = r.value;
      res.argmax = std::move(r.x);
    }
  }
  return res;
}

}  // namespace phisum
