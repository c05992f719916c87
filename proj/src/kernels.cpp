#include "varic/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "varic/error.hpp"

namespace varic {

namespace {

double bump_value(double s) {
  if (s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return std::exp(1.0 - 1.0 / q);
}

double bump_derivative(double s) {
  if (s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return std::exp(1.0 - 1.0 / q) * (-2.0 * s / (q * q));
}

double bump_second_derivative(double s) {
  if (s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  const double g = -2.0 * s / (q * q);
  const double dg = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
  return std::exp(1.0 - 1.0 / q) * (g * g + dg);
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  const std::size_t m = knots_.size();
  if (m < 3 || values_.size() != m) {
    throw InvalidArgument("cubic spline needs at least 3 knots with one value each");
  }
  for (std::size_t k = 1; k < m; ++k) {
    if (!(knots_[k] > knots_[k - 1])) throw InvalidArgument("spline knots must be strictly increasing");
  }
  // Natural end conditions; Thomas algorithm on the interior equations.
  second_.assign(m, 0.0);
  std::vector<double> diag(m, 0.0), rhs(m, 0.0), upper(m, 0.0);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double h0 = knots_[k] - knots_[k - 1];
    const double h1 = knots_[k + 1] - knots_[k];
    const double lower = h0 / 6.0;
    diag[k] = (h0 + h1) / 3.0;
    upper[k] = h1 / 6.0;
    rhs[k] = (values_[k + 1] - values_[k]) / h1 - (values_[k] - values_[k - 1]) / h0;
    if (k > 1) {
      const double w = lower / diag[k - 1];
      diag[k] -= w * upper[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
  }
  for (std::size_t k = m - 2; k >= 1; --k) {
    second_[k] = (rhs[k] - upper[k] * second_[k + 1]) / diag[k];
    if (k == 1) break;
  }
}

std::size_t CubicSpline::segment(double s) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
  std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(k, knots_.size() - 2);
}

double CubicSpline::value(double s) const {
  const std::size_t k = segment(s);
  const double h = knots_[k + 1] - knots_[k];
  const double a = (knots_[k + 1] - s) / h;
  const double b = (s - knots_[k]) / h;
  return a * values_[k] + b * values_[k + 1] +
         ((a * a * a - a) * second_[k] + (b * b * b - b) * second_[k + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double s) const {
  const std::size_t k = segment(s);
  const double h = knots_[k + 1] - knots_[k];
  const double a = (knots_[k + 1] - s) / h;
  const double b = (s - knots_[k]) / h;
  return (values_[k + 1] - values_[k]) / h - (3.0 * a * a - 1.0) / 6.0 * h * second_[k] +
         (3.0 * b * b - 1.0) / 6.0 * h * second_[k + 1];
}

double CubicSpline::second_derivative(double s) const {
  const std::size_t k = segment(s);
  const double h = knots_[k + 1] - knots_[k];
  const double a = (knots_[k + 1] - s) / h;
  const double b = (s - knots_[k]) / h;
  return a * second_[k] + b * second_[k + 1];
}

double KernelProfile::value(double s) const {
  if (s >= 1.0) return 0.0;
  const double v = std::visit(
      [s](const auto& shape) -> double {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Bump>) {
          return bump_value(s);
        } else if constexpr (std::is_same_v<T, BumpXi>) {
          return -s * bump_derivative(s) / shape.n;
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return shape.spline->value(s);
        } else {
          return -s * shape.spline->derivative(s) / shape.n;
        }
      },
      shape_);
  return scale_ * v;
}

double KernelProfile::derivative(double s) const {
  if (s >= 1.0) return 0.0;
  const double v = std::visit(
      [s](const auto& shape) -> double {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Bump>) {
          return bump_derivative(s);
        } else if constexpr (std::is_same_v<T, BumpXi>) {
          return -(bump_derivative(s) + s * bump_second_derivative(s)) / shape.n;
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return shape.spline->derivative(s);
        } else {
          return -(shape.spline->derivative(s) + s * shape.spline->second_derivative(s)) / shape.n;
        }
      },
      shape_);
  return scale_ * v;
}

KernelPair default_bump_pair(int n) {
  if (n < 2) throw InvalidArgument("default_bump_pair: ambient dimension must be >= 2");
  KernelPair pair;
  pair.rho = KernelProfile::bump();
  pair.xi = KernelProfile::bump_xi(n);
  pair.eta = pair.xi;
  pair.n = n;
  pair.natural = true;
  return pair;
}

KernelPair tabulated_pair(const CubicSpline& rho, int n) {
  if (n < 2) throw InvalidArgument("tabulated_pair: ambient dimension must be >= 2");
  auto spline = std::make_shared<const CubicSpline>(rho);
  KernelPair pair;
  pair.rho = KernelProfile(KernelProfile::Tabulated{spline});
  pair.xi = KernelProfile(KernelProfile::TabulatedXi{spline, n});
  pair.eta = pair.xi;
  pair.n = n;
  return pair;
}

KernelPair tabulated_pair(const CubicSpline& rho, const CubicSpline& xi, int n) {
  if (n < 2) throw InvalidArgument("tabulated_pair: ambient dimension must be >= 2");
  KernelPair pair;
  pair.rho = KernelProfile(KernelProfile::Tabulated{std::make_shared<const CubicSpline>(rho)});
  pair.xi = KernelProfile(KernelProfile::Tabulated{std::make_shared<const CubicSpline>(xi)});
  pair.eta = pair.xi;
  pair.n = n;
  return pair;
}

KernelPair load_tabulated_pair(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open kernel table '" + path + "'");
  std::vector<double> s, rho, xi;
  std::string line;
  int columns = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<double> fields;
    std::string tok;
    bool numeric = true;
    while (row >> tok) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (s.empty() && columns < 0) continue;  // header
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (columns < 0) columns = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != columns || (columns != 2 && columns != 3)) {
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": expected 2 or 3 columns");
    }
    s.push_back(fields[0]);
    rho.push_back(fields[1]);
    if (columns == 3) xi.push_back(fields[2]);
  }
  if (s.size() < 3) throw InvalidArgument("kernel table needs at least 3 rows");
  if (s.front() != 0.0 || s.back() != 1.0) throw InvalidArgument("kernel table must span s = 0 .. 1");
  for (double v : rho) {
    if (v < 0.0) throw InvalidArgument("kernel table has negative rho values");
  }
  if (xi.empty()) return tabulated_pair(CubicSpline(s, rho), n);
  return tabulated_pair(CubicSpline(s, rho), CubicSpline(s, xi), n);
}

NaturalPairReport validate_natural_pair(const KernelPair& pair, int n, int grid_size) {
  if (grid_size < 100) throw InvalidArgument("validate_natural_pair: grid_size must be >= 100");
  NaturalPairReport report;
  report.xi_at_zero = pair.xi.value(0.0);
  for (int k = 0; k < grid_size; ++k) {
    const double s = static_cast<double>(k) / (grid_size - 1);
    const double defect = std::abs(-s * pair.rho.derivative(s) - n * pair.xi.value(s));
    if (defect > report.max_defect) {
      report.max_defect = defect;
      report.worst_s = s;
    }
  }
  report.pass = report.max_defect <= kNaturalPairTolerance;
  return report;
}

NaturalPairReport certify_natural(KernelPair& pair) {
  auto report = validate_natural_pair(pair, pair.n, 10000);
  pair.natural = report.pass;
  return report;
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

Normalization normalization(const KernelProfile& profile, int d) {
  if (d < 1) throw InvalidArgument("normalization: d must be >= 1");
  auto integrand = [&](double t) { return profile.value(t) * std::pow(t, d - 1); };
  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, 1.0, 20, 1e-14, &error);
  const double factor = d * unit_ball_volume(d);
  Normalization out{factor * integral, factor * error};
  if (!std::isfinite(out.value) || out.error_bound > 1e-10) {
    throw NumericalError("normalization: quadrature did not reach 1e-10 (estimate " +
                         std::to_string(out.error_bound) + ")");
  }
  return out;
}

NormalizationConstants normalization_constants(const KernelPair& pair, int d) {
  const auto rho = normalization(pair.rho, d);
  const auto xi = normalization(pair.xi, d);
  return {rho.value, xi.value, d, std::max(rho.error_bound, xi.error_bound)};
}

double curvature_prefactor(const KernelPair& pair, int d) {
  if (pair.natural) return static_cast<double>(d) / pair.n;
  const auto c = normalization_constants(pair, d);
  if (!(c.c_rho > 0.0)) throw InvalidArgument("kernel rho has zero normalization constant");
  return c.c_xi / c.c_rho;
}

}  // namespace varic
