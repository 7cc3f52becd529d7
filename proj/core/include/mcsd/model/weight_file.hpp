#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcsd {

struct NamedMatrix {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
};

/// Text container for named weight matrices:
///
///   meta <key> <value>
///   tensor <name> <rows> <cols>
///   <rows*cols space-separated values>
///
/// Values round-trip exactly (17 significant digits).
class WeightFile {
 public:
  void set_meta(std::string key, std::string value);
  std::optional<std::string> meta(const std::string& key) const;
  /// Throws ParseError when the key is missing.
  std::string require_meta(const std::string& key) const;

  void add(std::string name, const Eigen::MatrixXd& m);
  /// Throws ParseError when absent or when the shape differs from the request.
  Eigen::MatrixXd matrix(const std::string& name, std::size_t rows, std::size_t cols) const;
  Eigen::MatrixXd matrix(const std::string& name) const;

  const std::vector<NamedMatrix>& matrices() const noexcept { return matrices_; }

  void write(std::ostream& out) const;
  static WeightFile read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static WeightFile load(const std::filesystem::path& path);

 private:
  const NamedMatrix& find(const std::string& name) const;

  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<NamedMatrix> matrices_;
};

}  // namespace mcsd
