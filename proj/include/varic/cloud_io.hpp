#pragma once

#include <iosfwd>
#include <string>

#include "varic/varifold.hpp"

namespace varic {

/// Optional columns of a point-cloud file. Loading reports what the file
/// had so that saving can reproduce it.
struct CloudColumns {
  bool mass = true;
  bool tangent = true;
};

/// ASCII point-cloud format:
///
///   n d N has_mass has_tangent
///   x_1 .. x_n [m] [P_11 P_12 .. P_nn]     (N rows, P row-major)
///
/// Numbers use 17 significant digits. Without a mass column every mass is
/// 1/N; without tangents the projectors are left zero. Projectors failing
/// the invariants by more than 1e-6 are rejected.
PointCloudVarifold read_cloud(std::istream& in, CloudColumns* columns = nullptr);
PointCloudVarifold load_cloud(const std::string& path, CloudColumns* columns = nullptr);

void write_cloud(std::ostream& out, const PointCloudVarifold& v, CloudColumns columns = {});
void save_cloud(const PointCloudVarifold& v, const std::string& path, CloudColumns columns = {});

// "%.17g"; nan and inf spelled that way.
std::string format_double(double x);

}  // namespace varic
