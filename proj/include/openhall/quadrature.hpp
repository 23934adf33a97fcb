#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "openhall/model.hpp"

namespace openhall {

/// Midpoint grid on a rectangle [origin, origin + period).
struct TorusGrid {
  Domain domain;
  int nx = 64, ny = 64;
};

/// Log-polar midpoint grid: u = ln k uniform on [ln k_min, ln k_max], angle uniform.
struct PlaneGrid {
  double k_min = 1e-3, k_max = 1e3;
  int n_radial = 64, n_angular = 64;
};

class BZGrid {
 public:
  static BZGrid torus(const Domain& domain, int nx, int ny);
  static BZGrid plane(double k_min, double k_max, int n_radial, int n_angular);
  /// Grid covering `domain` with `resolution` points per axis (radial and angular for planes).
  static BZGrid for_domain(const Domain& domain, int resolution);

  bool is_torus() const { return std::holds_alternative<TorusGrid>(shape_); }
  const TorusGrid& torus() const { return std::get<TorusGrid>(shape_); }
  const PlaneGrid& plane() const { return std::get<PlaneGrid>(shape_); }
  std::size_t size() const;
  BZGrid refined() const;  // resolution doubled
  bool symmetric() const;  // supports exact k <-> -k pairing
  std::string describe() const;

 private:
  std::variant<TorusGrid, PlaneGrid> shape_;
};

struct Sample {
  Momentum k;
  double weight = 0.0;  // includes the 1/(2 pi) measure
};

std::vector<Sample> samples(const BZGrid& grid);

/// Representative points for +-k pairs. Each representative stands for `multiplicity`
/// grid points (2 for a proper pair, 1 for a self-partner); the partner is evaluated at
/// exactly -k.
struct PairedSample {
  Momentum k;
  double weight = 0.0;
  int multiplicity = 2;
};

struct PairedGrid {
  BZGrid grid;
  std::vector<PairedSample> points;
};

PairedGrid symmetrize(const BZGrid& grid);

struct Exclusion {
  Momentum k;
  std::string reason;
};

/// Writes `components` values for one k-point.
using VectorIntegrand = std::function<void(Momentum, std::span<double>)>;

struct IntegrationOptions {
  double tol = 1e-5;
  double abs_tol = 1e-12;
  int max_levels = 5;
  double tail_tol = 1e-6;
  int max_tail_steps = 40;
  bool use_pairs = true;  // pair k with -k when the grid allows it
  double max_excluded_fraction = 0.01;
  int threads = 1;
};

struct LevelRecord {
  std::string grid;
  std::size_t points = 0;
  std::vector<double> value;
};

struct ConvergenceReport {
  std::vector<double> value;
  std::vector<double> error;  // |value(n) - value(n-1)|, infinite after a single level
  int levels = 0;
  std::size_t excluded = 0;
  std::vector<Exclusion> exclusions;  // finest level
  std::vector<LevelRecord> history;
  bool converged = false;
  BZGrid grid = BZGrid::torus(Domain::torus(1, 1), 8, 8);  // finest grid used

  double scalar() const { return value.at(0); }
};

/// One pass over a fixed grid: sum of weight * f with exclusion bookkeeping.
struct LevelSum {
  std::vector<double> value;
  std::size_t points = 0;
  std::vector<Exclusion> exclusions;
};

LevelSum sum_grid(const VectorIntegrand& f, int components, const BZGrid& grid, const IntegrationOptions& opt);

ConvergenceReport integrate(const VectorIntegrand& f, int components, const BZGrid& grid,
                            const IntegrationOptions& opt = {});
ConvergenceReport integrate(const std::function<double(Momentum)>& f, const BZGrid& grid,
                            const IntegrationOptions& opt = {});

/// Pairwise sum in a fixed order.
double pairwise_sum(std::span<const double> v);

/// Static-chunk parallel loop over [0, n).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace openhall
