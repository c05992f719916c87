#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace varic {

// T is the tangent projector at the evaluation point, S the one at the
// neighbor; the *perp atoms are Id minus the projector.
enum class Atom { Id, T, S, Tperp, Sperp };

std::string_view atom_name(Atom a);

// True for atoms that depend on the neighbor (S, Sperp).
constexpr bool depends_on_neighbor(Atom a) { return a == Atom::S || a == Atom::Sperp; }

/// coefficient * left, or coefficient * (left o right) when `right` is set.
struct OperatorTerm {
  double coefficient = 1.0;
  Atom left = Atom::Id;
  std::optional<Atom> right;

  bool depends_on_neighbor() const {
    return varic::depends_on_neighbor(left) || (right && varic::depends_on_neighbor(*right));
  }
  friend bool operator==(const OperatorTerm&, const OperatorTerm&) = default;
};

/// A linear combination of atoms and two-fold compositions of atoms.
///
/// Grammar (whitespace-insensitive):
///   spec := term ("+" term)*
///   term := [float "*"] atom ["." atom]
///   atom := Id | T | S | Tperp | Sperp
/// where "A.B" is the composition A o B (B is applied first).
struct OperatorSpec {
  std::vector<OperatorTerm> terms;

  friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

/// Throws ParseError (with byte offset) on malformed input or unknown atoms.
OperatorSpec parse_operator(std::string_view text);

/// Canonical form: every coefficient printed in shortest round-trip form,
/// terms joined with " + ". parse_operator(to_string(s)) == s.
std::string to_string(const OperatorSpec& spec);

OperatorSpec operator+(const OperatorSpec& a, const OperatorSpec& b);
OperatorSpec operator*(double factor, const OperatorSpec& spec);

/// The n x n matrix of `spec` for the pair (T, S).
Eigen::MatrixXd compile_operator(const OperatorSpec& spec, const Eigen::MatrixXd& T, const Eigen::MatrixXd& S);

/// out = term(v) without forming matrices. T and S are n x n column-major.
/// `scratch` must hold n doubles; `out` may not alias `v`.
void apply_term(const OperatorTerm& term, int n, const double* T, const double* S, const double* v,
                double* out, double* scratch);

/// True iff every term is a multiple of Id; the estimators then only need
/// the sum of coefficients.
bool is_identity_multiple(const OperatorSpec& spec);
double identity_coefficient(const OperatorSpec& spec);

}  // namespace varic
