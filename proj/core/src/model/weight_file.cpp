#include "mcsd/model/weight_file.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mcsd/error.hpp"

namespace mcsd {

void WeightFile::set_meta(std::string key, std::string value) {
  for (auto& [k, v] : meta_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  meta_.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> WeightFile::meta(const std::string& key) const {
  for (const auto& [k, v] : meta_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string WeightFile::require_meta(const std::string& key) const {
  auto v = meta(key);
  if (!v) throw ParseError(fmt::format("missing meta '{}'", key), 0);
  return *v;
}

void WeightFile::add(std::string name, const Eigen::MatrixXd& m) {
  NamedMatrix nm{std::move(name), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), {}};
  nm.values.reserve(nm.rows * nm.cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) nm.values.push_back(m(r, c));
  }
  matrices_.push_back(std::move(nm));
}

const NamedMatrix& WeightFile::find(const std::string& name) const {
  for (const auto& m : matrices_) {
    if (m.name == name) return m;
  }
  throw ParseError(fmt::format("missing tensor '{}'", name), 0);
}

Eigen::MatrixXd WeightFile::matrix(const std::string& name) const {
  const auto& nm = find(name);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(nm.rows), static_cast<Eigen::Index>(nm.cols));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = nm.values[k++];
  }
  return m;
}

Eigen::MatrixXd WeightFile::matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
  const auto& nm = find(name);
  if (nm.rows != rows || nm.cols != cols) {
    throw ParseError(fmt::format("tensor '{}' is {}x{}, expected {}x{}", name, nm.rows, nm.cols, rows, cols), 0);
  }
  return matrix(name);
}

void WeightFile::write(std::ostream& out) const {
  for (const auto& [k, v] : meta_) out << "meta " << k << ' ' << v << '\n';
  for (const auto& m : matrices_) {
    out << "tensor " << m.name << ' ' << m.rows << ' ' << m.cols << '\n';
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      if (i) out << ' ';
      out << fmt::format("{:.17g}", m.values[i]);
    }
    out << '\n';
  }
}

WeightFile WeightFile::read(std::istream& in) {
  WeightFile wf;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key;
      std::string value;
      if (!(ls >> key >> value)) throw ParseError("meta line needs a key and a value", line_no);
      wf.set_meta(std::move(key), std::move(value));
    } else if (tag == "tensor") {
      NamedMatrix m;
      if (!(ls >> m.name >> m.rows >> m.cols)) throw ParseError("tensor line needs name, rows, cols", line_no);
      std::string values;
      if (!std::getline(in, values)) throw ParseError(fmt::format("tensor '{}' has no values", m.name), line_no + 1);
      ++line_no;
      std::istringstream vs(values);
      double v;
      while (vs >> v) m.values.push_back(v);
      if (!vs.eof()) throw ParseError(fmt::format("bad value in tensor '{}'", m.name), line_no);
      if (m.values.size() != m.rows * m.cols) {
        throw ParseError(
            fmt::format("tensor '{}' has {} values, expected {}", m.name, m.values.size(), m.rows * m.cols), line_no);
      }
      wf.matrices_.push_back(std::move(m));
    } else {
      throw ParseError(fmt::format("unknown record '{}'", tag), line_no);
    }
  }
  return wf;
}

void WeightFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out);
}

WeightFile WeightFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read(in);
}

}  // namespace mcsd
