#include "varic/cloud_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "varic/error.hpp"

namespace varic {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::vector<double> parse_numbers(const std::string& line, std::size_t line_no) {
  std::istringstream ss(line);
  std::vector<double> out;
  std::string token;
  while (ss >> token) {
    // strtod rather than stod: subnormals set ERANGE but are valid values.
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(token.c_str(), &end);
    const bool overflow = errno == ERANGE && std::isinf(value);
    if (end != token.c_str() + token.size() || overflow) {
      throw InvalidArgument("cloud file line " + std::to_string(line_no) + ": bad number '" + token + "'");
    }
    out.push_back(value);
  }
  return out;
}

bool as_flag(double x) {
  if (x != 0.0 && x != 1.0) throw InvalidArgument("cloud file header: has_mass/has_tangent must be 0 or 1");
  return x == 1.0;
}

}  // namespace

PointCloudVarifold read_cloud(std::istream& in, CloudColumns* columns) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_content_line(in, line, line_no)) throw InvalidArgument("cloud file: missing header");
  const auto header = parse_numbers(line, line_no);
  if (header.size() != 5) throw InvalidArgument("cloud file header: expected 'n d N has_mass has_tangent'");
  for (int k = 0; k < 3; ++k) {
    if (header[k] < 0 || header[k] != std::floor(header[k])) {
      throw InvalidArgument("cloud file header: n, d and N must be non-negative integers");
    }
  }
  const int n = static_cast<int>(header[0]);
  const int d = static_cast<int>(header[1]);
  const auto count = static_cast<std::size_t>(header[2]);
  const bool has_mass = as_flag(header[3]);
  const bool has_tangent = as_flag(header[4]);
  if (!(d >= 1 && d < n)) throw InvalidArgument("cloud file header: need 1 <= d < n");

  PointCloudVarifold v(n, d, count);
  const std::size_t arity = n + (has_mass ? 1 : 0) + (has_tangent ? n * n : 0);
  for (std::size_t i = 0; i < count; ++i) {
    if (!next_content_line(in, line, line_no)) {
      throw InvalidArgument("cloud file: expected " + std::to_string(count) + " rows, found " + std::to_string(i));
    }
    const auto row = parse_numbers(line, line_no);
    if (row.size() != arity) {
      throw InvalidArgument("cloud file line " + std::to_string(line_no) + ": expected " + std::to_string(arity) +
                            " values, found " + std::to_string(row.size()));
    }
    std::size_t k = 0;
    for (int c = 0; c < n; ++c) v.points(c, static_cast<Eigen::Index>(i)) = row[k++];
    v.masses[static_cast<Eigen::Index>(i)] = has_mass ? row[k++] : 1.0 / static_cast<double>(count);
    if (has_tangent) {
      auto P = v.tangent(i);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) P(r, c) = row[k++];
      }
      const auto check = check_projector(P, d);
      if (check.symmetry > 1e-6 || check.idempotence > 1e-6 || check.trace_error > 1e-6) {
        throw InvalidArgument("cloud file line " + std::to_string(line_no) + ": tangent is not a rank-" +
                              std::to_string(d) + " orthogonal projector");
      }
    }
    if (!(v.masses[static_cast<Eigen::Index>(i)] > 0.0)) {
      throw InvalidArgument("cloud file line " + std::to_string(line_no) + ": mass must be positive");
    }
  }
  if (next_content_line(in, line, line_no)) {
    throw InvalidArgument("cloud file line " + std::to_string(line_no) + ": more rows than the header's N");
  }
  if (columns) *columns = {has_mass, has_tangent};
  return v;
}

PointCloudVarifold load_cloud(const std::string& path, CloudColumns* columns) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_cloud(in, columns);
}

void write_cloud(std::ostream& out, const PointCloudVarifold& v, CloudColumns columns) {
  const int n = v.n;
  out << n << ' ' << v.d << ' ' << v.size() << ' ' << (columns.mass ? 1 : 0) << ' ' << (columns.tangent ? 1 : 0)
      << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    for (int c = 0; c < n; ++c) out << (c ? " " : "") << format_double(v.points(c, col));
    if (columns.mass) out << ' ' << format_double(v.masses[col]);
    if (columns.tangent) {
      const auto P = v.tangent(i);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) out << ' ' << format_double(P(r, c));
      }
    }
    out << '\n';
  }
}

void save_cloud(const PointCloudVarifold& v, const std::string& path, CloudColumns columns) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  write_cloud(out, v, columns);
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

}  // namespace varic
