#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace varic {

/// Flat `key = value` settings. Blank lines and lines starting with '#' are
/// ignored; keys may not repeat.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::string& path);

  /// Throws InvalidArgument naming the first key outside `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  // Comma-separated list of numbers.
  std::vector<double> numbers(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

// Parsing helpers shared with the command line.
double parse_double(const std::string& text, const std::string& what);
std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace varic
