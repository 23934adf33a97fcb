#include "openhall/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "openhall/errors.hpp"

namespace openhall {

using std::numbers::pi;

namespace {

constexpr double inv_two_pi = 0.5 / pi;

double offset_in_cells(double origin, double h) { return 2.0 * origin / h; }

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

BZGrid BZGrid::torus(const Domain& domain, int nx, int ny) {
  if (!domain.is_torus()) throw ValidationError("BZGrid::torus: domain is not a torus");
  if (nx < 8 || ny < 8) throw ValidationError("BZGrid: resolution must be at least 8 per axis");
  BZGrid g;
  g.shape_ = TorusGrid{domain, nx, ny};
  return g;
}

BZGrid BZGrid::plane(double k_min, double k_max, int n_radial, int n_angular) {
  if (!(k_min > 0.0) || !(k_max > k_min)) throw ValidationError("BZGrid::plane: need 0 < kmin < kmax");
  if (n_radial < 8 || n_angular < 8) throw ValidationError("BZGrid: resolution must be at least 8 per axis");
  BZGrid g;
  g.shape_ = PlaneGrid{k_min, k_max, n_radial, n_angular + (n_angular % 2)};
  return g;
}

BZGrid BZGrid::for_domain(const Domain& domain, int resolution) {
  if (domain.is_torus()) return torus(domain, resolution, resolution);
  return plane(domain.k_min, domain.k_max, resolution, resolution);
}

std::size_t BZGrid::size() const {
  if (is_torus()) return static_cast<std::size_t>(torus().nx) * torus().ny;
  return static_cast<std::size_t>(plane().n_radial) * plane().n_angular;
}

BZGrid BZGrid::refined() const {
  if (is_torus()) return BZGrid::torus(torus().domain, 2 * torus().nx, 2 * torus().ny);
  const auto& p = plane();
  return BZGrid::plane(p.k_min, p.k_max, 2 * p.n_radial, 2 * p.n_angular);
}

bool BZGrid::symmetric() const {
  if (!is_torus()) return plane().n_angular % 2 == 0;
  const auto& t = torus();
  if (!t.domain.periodic) return false;
  return is_integer(offset_in_cells(t.domain.origin_x, t.domain.period_x / t.nx)) &&
         is_integer(offset_in_cells(t.domain.origin_y, t.domain.period_y / t.ny));
}

std::string BZGrid::describe() const {
  std::ostringstream os;
  if (is_torus()) {
    const auto& t = torus();
    os << "torus " << t.nx << "x" << t.ny << " periods (" << t.domain.period_x << ", " << t.domain.period_y
       << ") origin (" << t.domain.origin_x << ", " << t.domain.origin_y << ")";
  } else {
    const auto& p = plane();
    os << "plane " << p.n_radial << "x" << p.n_angular << " k in [" << p.k_min << ", " << p.k_max << "]";
  }
  return os.str();
}

std::vector<Sample> samples(const BZGrid& grid) {
  std::vector<Sample> out;
  out.reserve(grid.size());
  if (grid.is_torus()) {
    const auto& t = grid.torus();
    const double hx = t.domain.period_x / t.nx, hy = t.domain.period_y / t.ny;
    const double w = hx * hy * inv_two_pi;
    for (int i = 0; i < t.nx; ++i)
      for (int j = 0; j < t.ny; ++j)
        out.push_back({{t.domain.origin_x + (i + 0.5) * hx, t.domain.origin_y + (j + 0.5) * hy}, w});
  } else {
    const auto& p = grid.plane();
    const double u0 = std::log(p.k_min);
    const double du = (std::log(p.k_max) - u0) / p.n_radial;
    const double dt = 2 * pi / p.n_angular;
    for (int i = 0; i < p.n_radial; ++i) {
      const double r = std::exp(u0 + (i + 0.5) * du);
      const double w = r * r * du * dt * inv_two_pi;
      for (int j = 0; j < p.n_angular; ++j) {
        const double t = (j + 0.5) * dt;
        out.push_back({{r * std::cos(t), r * std::sin(t)}, w});
      }
    }
  }
  return out;
}

PairedGrid symmetrize(const BZGrid& grid) {
  if (!grid.symmetric()) throw ValidationError("symmetrize: grid is not symmetric under k -> -k");
  PairedGrid out{grid, {}};
  if (!grid.is_torus()) {
    const auto& p = grid.plane();
    const double u0 = std::log(p.k_min);
    const double du = (std::log(p.k_max) - u0) / p.n_radial;
    const double dt = 2 * pi / p.n_angular;
    for (int i = 0; i < p.n_radial; ++i) {
      const double r = std::exp(u0 + (i + 0.5) * du);
      const double w = r * r * du * dt * inv_two_pi;
      for (int j = 0; j < p.n_angular / 2; ++j) {
        const double t = (j + 0.5) * dt;
        out.points.push_back({{r * std::cos(t), r * std::sin(t)}, w, 2});
      }
    }
    return out;
  }
  const auto& t = grid.torus();
  const double hx = t.domain.period_x / t.nx, hy = t.domain.period_y / t.ny;
  const long sx = std::lround(offset_in_cells(t.domain.origin_x, hx));
  const long sy = std::lround(offset_in_cells(t.domain.origin_y, hy));
  auto partner = [](long i, long shift, long n) { return (((-shift - i - 1) % n) + n) % n; };
  const double w = hx * hy * inv_two_pi;
  for (long i = 0; i < t.nx; ++i) {
    for (long j = 0; j < t.ny; ++j) {
      const long pi_ = partner(i, sx, t.nx), pj = partner(j, sy, t.ny);
      const long self = i * t.ny + j, other = pi_ * t.ny + pj;
      if (other < self) continue;
      const Momentum k{t.domain.origin_x + (i + 0.5) * hx, t.domain.origin_y + (j + 0.5) * hy};
      out.points.push_back({k, w, other == self ? 1 : 2});
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t t = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), 1, std::max<std::size_t>(1, n));
  if (t == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(t);
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

LevelSum sum_grid(const VectorIntegrand& f, int components, const BZGrid& grid, const IntegrationOptions& opt) {
  const auto m = static_cast<std::size_t>(components);
  const bool paired = opt.use_pairs && grid.symmetric();
  std::vector<PairedSample> pts;
  if (paired) {
    pts = symmetrize(grid).points;
  } else {
    for (const auto& s : samples(grid)) pts.push_back({s.k, s.weight, 0});
  }

  std::vector<double> buf(pts.size() * m, 0.0);
  std::vector<std::string> reasons(pts.size());
  parallel_for(pts.size(), opt.threads, [&](std::size_t i) {
    const auto& p = pts[i];
    std::span<double> out(buf.data() + i * m, m);
    std::vector<double> a(m, 0.0), b(m, 0.0);
    try {
      f(p.k, a);
      if (p.multiplicity == 0) {
        for (std::size_t c = 0; c < m; ++c) out[c] = p.weight * a[c];
        return;
      }
      f(-p.k, b);
      const double scale = p.multiplicity == 2 ? 1.0 : 0.5;
      for (std::size_t c = 0; c < m; ++c) out[c] = p.weight * scale * (a[c] + b[c]);
    } catch (const DegeneratePoint& e) {
      std::fill(out.begin(), out.end(), 0.0);
      reasons[i] = e.what();
    }
  });

  LevelSum r;
  r.points = grid.size();
  std::size_t excluded_points = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (reasons[i].empty()) continue;
    r.exclusions.push_back({pts[i].k, reasons[i]});
    excluded_points += pts[i].multiplicity == 2 ? 2 : 1;
  }
  if (static_cast<double>(excluded_points) > opt.max_excluded_fraction * static_cast<double>(r.points)) {
    std::ostringstream os;
    os << "integration refused: " << excluded_points << " of " << r.points
       << " points excluded as degenerate on " << grid.describe();
    if (!r.exclusions.empty())
      os << " (first at k = (" << r.exclusions[0].k.kx << ", " << r.exclusions[0].k.ky << "): "
         << r.exclusions[0].reason << ")";
    throw ExclusionError(os.str());
  }
  r.value.assign(m, 0.0);
  std::vector<double> col(pts.size());
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < pts.size(); ++i) col[i] = buf[i * m + c];
    r.value[c] = pairwise_sum(col);
  }
  r.points = grid.size();
  return r;
}

namespace {

double component_floor(const std::vector<double>& v) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  return 1e-6 * mx;
}

bool small_enough(const std::vector<double>& delta, const std::vector<double>& total, double rel, double abs_tol) {
  const double floor = component_floor(total);
  for (std::size_t c = 0; c < delta.size(); ++c)
    if (std::abs(delta[c]) > rel * std::max(std::abs(total[c]), floor) + abs_tol) return false;
  return true;
}

// Evaluates a plane level and widens its window until the outermost and innermost
// shells are negligible. Returns the widened grid through `grid`.
LevelSum plane_level(const VectorIntegrand& f, int m, BZGrid& grid, const IntegrationOptions& opt) {
  LevelSum core = sum_grid(f, m, grid, opt);
  PlaneGrid p = grid.plane();
  const double du = (std::log(p.k_max) - std::log(p.k_min)) / p.n_radial;
  const int n_ext = std::max(1, static_cast<int>(std::lround(std::log(2.0) / du)));
  const double factor = std::exp(n_ext * du);
  for (int side : {+1, -1}) {
    int steps = 0;
    while (true) {
      const int nr = std::max(8, n_ext);
      const BZGrid shell = side > 0 ? BZGrid::plane(p.k_max, p.k_max * factor, nr, p.n_angular)
                                    : BZGrid::plane(p.k_min / factor, p.k_min, nr, p.n_angular);
      LevelSum s = sum_grid(f, m, shell, opt);
      for (std::size_t c = 0; c < core.value.size(); ++c) core.value[c] += s.value[c];
      core.points += s.points;
      core.exclusions.insert(core.exclusions.end(), s.exclusions.begin(), s.exclusions.end());
      if (side > 0) {
        p.k_max *= factor;
      } else {
        p.k_min /= factor;
      }
      p.n_radial += n_ext;
      if (small_enough(s.value, core.value, opt.tail_tol, opt.abs_tol)) break;
      if (++steps >= opt.max_tail_steps) {
        std::ostringstream os;
        os << "plane tail did not decay after " << steps << " shells (" << (side > 0 ? "outer" : "inner")
           << " window edge now " << (side > 0 ? p.k_max : p.k_min) << ")";
        throw ConvergenceError(os.str());
      }
    }
  }
  grid = BZGrid::plane(p.k_min, p.k_max, p.n_radial, p.n_angular);
  return core;
}

}  // namespace

ConvergenceReport integrate(const VectorIntegrand& f, int components, const BZGrid& grid,
                            const IntegrationOptions& opt) {
  if (components <= 0) throw ValidationError("integrate: need at least one component");
  if (opt.max_levels < 1) throw ValidationError("integrate: max_levels must be at least 1");
  ConvergenceReport rep;
  rep.error.assign(static_cast<std::size_t>(components), std::numeric_limits<double>::infinity());
  BZGrid g = grid;
  // midpoint sums on a window that is not a full period are O(h^2): extrapolate pairs of levels
  const bool extrapolate = grid.is_torus() && !grid.torus().domain.periodic;
  std::vector<double> previous, previous_raw;
  for (int level = 0; level < opt.max_levels; ++level) {
    if (level > 0) g = g.refined();
    LevelSum s = g.is_torus() ? sum_grid(f, components, g, opt) : plane_level(f, components, g, opt);
    rep.history.push_back({g.describe(), s.points, s.value});
    rep.value = s.value;
    if (extrapolate) {
      const std::vector<double> raw = s.value;
      if (!previous_raw.empty())
        for (std::size_t c = 0; c < raw.size(); ++c) rep.value[c] = (4.0 * raw[c] - previous_raw[c]) / 3.0;
      previous_raw = raw;
      if (level == 0 && opt.max_levels > 1) {
        rep.levels = 1;
        rep.grid = g;
        rep.excluded = s.exclusions.size();
        rep.exclusions = std::move(s.exclusions);
        continue;  // no extrapolated value yet
      }
    }
    rep.excluded = s.exclusions.size();
    rep.exclusions = std::move(s.exclusions);
    rep.levels = level + 1;
    rep.grid = g;
    if (!previous.empty()) {
      std::vector<double> delta(previous.size());
      for (std::size_t c = 0; c < delta.size(); ++c) {
        delta[c] = rep.value[c] - previous[c];
        rep.error[c] = std::abs(delta[c]);
      }
      if (small_enough(delta, rep.value, opt.tol, opt.abs_tol)) {
        rep.converged = true;
        return rep;
      }
    }
    previous = rep.value;
  }
  if (opt.max_levels == 1) return rep;  // single requested level: no estimate, no failure
  std::vector<double> hist;
  std::ostringstream os;
  os << "no convergence after " << rep.levels << " levels (tol " << opt.tol << "); component 0 history:";
  for (const auto& h : rep.history) {
    hist.push_back(h.value.at(0));
    os << " " << h.value.at(0);
  }
  throw ConvergenceError(os.str(), hist);
}

ConvergenceReport integrate(const std::function<double(Momentum)>& f, const BZGrid& grid,
                            const IntegrationOptions& opt) {
  return integrate([&](Momentum k, std::span<double> out) { out[0] = f(k); }, 1, grid, opt);
}

}  // namespace openhall
