#include "varic/operator.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "varic/error.hpp"

namespace varic {

namespace {

constexpr std::array<std::pair<std::string_view, Atom>, 5> kAtoms{{
    {"Tperp", Atom::Tperp},
    {"Sperp", Atom::Sperp},
    {"Id", Atom::Id},
    {"T", Atom::T},
    {"S", Atom::S},
}};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  OperatorSpec parse() {
    OperatorSpec spec;
    skip_space();
    if (at_end()) throw ParseError("empty operator expression", pos_);
    spec.terms.push_back(term());
    skip_space();
    while (!at_end()) {
      if (text_[pos_] != '+') throw ParseError("expected '+' between terms", pos_);
      ++pos_;
      skip_space();
      spec.terms.push_back(term());
      skip_space();
    }
    return spec;
  }

 private:
  OperatorTerm term() {
    OperatorTerm t;
    if (!at_end() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-' ||
                      text_[pos_] == '+' || text_[pos_] == '.')) {
      t.coefficient = number();
      skip_space();
      if (at_end() || text_[pos_] != '*') throw ParseError("expected '*' after coefficient", pos_);
      ++pos_;
      skip_space();
    }
    t.left = atom();
    skip_space();
    if (!at_end() && text_[pos_] == '.') {
      ++pos_;
      skip_space();
      t.right = atom();
      skip_space();
      if (!at_end() && text_[pos_] == '.') {
        throw ParseError("composition depth is limited to two atoms", pos_);
      }
    }
    return t;
  }

  double number() {
    std::size_t begin = pos_;
    if (text_[pos_] == '+') ++begin;  // from_chars rejects a leading '+'
    std::size_t end = begin;
    while (end < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' || text_[end] == 'e' ||
            text_[end] == 'E' || text_[end] == '-' || text_[end] == '+')) {
      // A sign is only part of the number right after the start or an exponent.
      if ((text_[end] == '-' || text_[end] == '+') && end != begin && text_[end - 1] != 'e' &&
          text_[end - 1] != 'E') {
        break;
      }
      ++end;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + begin, text_.data() + end, value);
    if (ec != std::errc() || ptr != text_.data() + end || !std::isfinite(value)) {
      throw ParseError("malformed coefficient", pos_);
    }
    pos_ = end;
    return value;
  }

  Atom atom() {
    const std::size_t begin = pos_;
    while (!at_end() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const auto name = text_.substr(begin, pos_ - begin);
    if (name.empty()) throw ParseError("expected an atom (Id, T, S, Tperp, Sperp)", begin);
    for (const auto& [atom_text, a] : kAtoms) {
      if (name == atom_text) return a;
    }
    throw ParseError("unknown atom '" + std::string(name) + "'", begin);
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Eigen::MatrixXd atom_matrix(Atom a, const Eigen::MatrixXd& T, const Eigen::MatrixXd& S) {
  const auto I = Eigen::MatrixXd::Identity(T.rows(), T.cols());
  switch (a) {
    case Atom::Id: return I;
    case Atom::T: return T;
    case Atom::S: return S;
    case Atom::Tperp: return I - T;
    case Atom::Sperp: return I - S;
  }
  return I;
}

// out = atom(v); out must not alias v.
void apply_atom(Atom a, int n, const double* T, const double* S, const double* v, double* out) {
  const double* P = nullptr;
  switch (a) {
    case Atom::Id:
      for (int r = 0; r < n; ++r) out[r] = v[r];
      return;
    case Atom::T:
    case Atom::Tperp: P = T; break;
    case Atom::S:
    case Atom::Sperp: P = S; break;
  }
  for (int r = 0; r < n; ++r) out[r] = 0.0;
  for (int c = 0; c < n; ++c) {
    const double vc = v[c];
    const double* col = P + static_cast<std::ptrdiff_t>(c) * n;
    for (int r = 0; r < n; ++r) out[r] += col[r] * vc;
  }
  if (a == Atom::Tperp || a == Atom::Sperp) {
    for (int r = 0; r < n; ++r) out[r] = v[r] - out[r];
  }
}

}  // namespace

std::string_view atom_name(Atom a) {
  switch (a) {
    case Atom::Id: return "Id";
    case Atom::T: return "T";
    case Atom::S: return "S";
    case Atom::Tperp: return "Tperp";
    case Atom::Sperp: return "Sperp";
  }
  return "?";
}

OperatorSpec parse_operator(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const OperatorSpec& spec) {
  std::string out;
  for (std::size_t k = 0; k < spec.terms.size(); ++k) {
    const auto& t = spec.terms[k];
    if (k > 0) out += " + ";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), t.coefficient);
    out.append(buf, ptr);
    out += '*';
    out += atom_name(t.left);
    if (t.right) {
      out += '.';
      out += atom_name(*t.right);
    }
  }
  return out;
}

OperatorSpec operator+(const OperatorSpec& a, const OperatorSpec& b) {
  OperatorSpec out = a;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  return out;
}

OperatorSpec operator*(double factor, const OperatorSpec& spec) {
  OperatorSpec out = spec;
  for (auto& t : out.terms) t.coefficient *= factor;
  return out;
}

Eigen::MatrixXd compile_operator(const OperatorSpec& spec, const Eigen::MatrixXd& T, const Eigen::MatrixXd& S) {
  if (T.rows() != T.cols() || S.rows() != S.cols() || T.rows() != S.rows()) {
    throw InvalidArgument("compile_operator: projector dimension mismatch");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T.rows(), T.cols());
  for (const auto& t : spec.terms) {
    Eigen::MatrixXd m = atom_matrix(t.left, T, S);
    if (t.right) m = m * atom_matrix(*t.right, T, S);
    out += t.coefficient * m;
  }
  return out;
}

void apply_term(const OperatorTerm& term, int n, const double* T, const double* S, const double* v,
                double* out, double* scratch) {
  if (term.right) {
    apply_atom(*term.right, n, T, S, v, scratch);
    apply_atom(term.left, n, T, S, scratch, out);
  } else {
    apply_atom(term.left, n, T, S, v, out);
  }
}

bool is_identity_multiple(const OperatorSpec& spec) {
  for (const auto& t : spec.terms) {
    if (t.left != Atom::Id || (t.right && *t.right != Atom::Id)) return false;
  }
  return true;
}

double identity_coefficient(const OperatorSpec& spec) {
  double c = 0.0;
  for (const auto& t : spec.terms) c += t.coefficient;
  return c;
}

}  // namespace varic
