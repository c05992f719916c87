#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace varic {

/// Natural cubic spline through (s_k, y_k), used for tabulated profiles.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> knots, std::vector<double> values);

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t segment(double s) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;  // second derivatives at the knots
};

/// Radial kernel profile supported on [0, 1].
///
/// Immutable after construction. The derivative is the exact derivative of
/// the evaluated function (for tabulated profiles, of the interpolant).
class KernelProfile {
 public:
  struct Zero {};
  // exp(1 - 1/(1 - s^2))
  struct Bump {};
  // -s * bump'(s) / n
  struct BumpXi {
    int n;
  };
  struct Tabulated {
    std::shared_ptr<const CubicSpline> spline;
  };
  // -s * spline'(s) / n
  struct TabulatedXi {
    std::shared_ptr<const CubicSpline> spline;
    int n;
  };
  using Shape = std::variant<Zero, Bump, BumpXi, Tabulated, TabulatedXi>;

  KernelProfile() = default;
  explicit KernelProfile(Shape shape, double scale = 1.0) : shape_(std::move(shape)), scale_(scale) {}

  static KernelProfile zero() { return KernelProfile(Zero{}); }
  static KernelProfile bump() { return KernelProfile(Bump{}); }
  static KernelProfile bump_xi(int n) { return KernelProfile(BumpXi{n}); }

  double value(double s) const;
  double derivative(double s) const;

  // Same shape multiplied by `factor`.
  KernelProfile scaled(double factor) const { return KernelProfile(shape_, scale_ * factor); }

  const Shape& shape() const { return shape_; }
  double scale() const { return scale_; }
  bool is_bump() const { return scale_ == 1.0 && std::holds_alternative<Bump>(shape_); }
  bool is_bump_xi(int n) const {
    const auto* xi = std::get_if<BumpXi>(&shape_);
    return scale_ == 1.0 && xi != nullptr && xi->n == n;
  }

 private:
  Shape shape_ = Zero{};
  double scale_ = 1.0;
};

/// The (rho, xi, eta) triple used by every estimator.
///
/// `natural` is a claim about the pair; it is set by the constructors that
/// guarantee -s rho'(s) = n xi(s) and must otherwise be established with
/// validate_natural_pair().
struct KernelPair {
  KernelProfile rho;
  KernelProfile xi;
  KernelProfile eta;
  int n = 0;  // ambient dimension the pair was built for
  bool natural = false;

  // True for the pair returned by default_bump_pair(n); enables the batched
  // SIMD weight kernels.
  bool is_default_bump() const { return rho.is_bump() && xi.is_bump_xi(n); }
};

KernelPair default_bump_pair(int n);

/// Tabulated rho with xi derived as -s rho'(s) / n. The result still has to
/// pass validate_natural_pair() before it is marked natural.
KernelPair tabulated_pair(const CubicSpline& rho, int n);

/// Tabulated rho and xi given independently; never natural by construction.
KernelPair tabulated_pair(const CubicSpline& rho, const CubicSpline& xi, int n);

/// Reads `s,rho[,xi]` rows (optional header line). The first knot must be
/// s = 0 and the last s = 1.
KernelPair load_tabulated_pair(const std::string& path, int n);

struct NaturalPairReport {
  double max_defect = 0.0;  // max |-s rho'(s) - n xi(s)| over the grid
  double worst_s = 0.0;
  double xi_at_zero = 0.0;
  bool pass = false;
};

inline constexpr double kNaturalPairTolerance = 1e-12;

NaturalPairReport validate_natural_pair(const KernelPair& pair, int n, int grid_size);

/// Runs validate_natural_pair on a 10^4-point grid and sets pair.natural.
NaturalPairReport certify_natural(KernelPair& pair);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

struct Normalization {
  double value = 0.0;
  double error_bound = 0.0;
};

/// d * omega_d * \int_0^1 profile(t) t^{d-1} dt by adaptive Gauss-Kronrod
/// quadrature, absolute error <= 1e-10. Throws NumericalError otherwise.
Normalization normalization(const KernelProfile& profile, int d);

struct NormalizationConstants {
  double c_rho = 0.0;
  double c_xi = 0.0;
  int d = 0;
  double error_bound = 0.0;
};

NormalizationConstants normalization_constants(const KernelPair& pair, int d);

/// The C_xi / C_rho factor in front of the curvature estimators: exactly d/n
/// for natural pairs, the quadrature ratio otherwise.
double curvature_prefactor(const KernelPair& pair, int d);

}  // namespace varic
