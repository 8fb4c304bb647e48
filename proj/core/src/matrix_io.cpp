#include "samp/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "samp/error.hpp"

namespace samp {
namespace {

constexpr std::array<char, 8> kMagic = {'S', 'A', 'M', 'P', 'M', 'A', 'T', '\0'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw std::runtime_error("read_matrix_binary: " + path.string() + " is truncated");
  return to_little(v);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max())
    throw DimensionError("write_matrix_binary: matrix too large for the header");
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  out.write(kMagic.data(), kMagic.size());
  put(out, static_cast<std::uint32_t>(m.rows()));
  put(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put(out, m(i, j));
  if (!out) throw std::runtime_error("write_matrix_binary: write to " + path.string() + " failed");
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error("read_matrix_binary: " + path.string() + " has no SAMPMAT header");
  const auto rows = get<std::uint32_t>(in, path);
  const auto cols = get<std::uint32_t>(in, path);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("read_matrix_binary: trailing bytes in " + path.string());
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path, std::ios::trunc);
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos)
        throw std::runtime_error("read_matrix_csv: " + path.string() + ":" +
                                 std::to_string(line_no) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DimensionError("read_matrix_csv: " + path.string() + ":" + std::to_string(line_no) +
                           ": expected " + std::to_string(rows.front().size()) + " columns, got " +
                           std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_matrix_csv: " + path.string() + " is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == static_cast<std::streamsize>(magic.size()) && magic == kMagic)
    return read_matrix_binary(path);
  return read_matrix_csv(path);
}

Eigen::MatrixXd pack_state(const EpState& s, const Eigen::VectorXd& y) {
  const Eigen::Index k = s.x_hat.size(), n = s.z_hat.size();
  if (y.size() != n) throw DimensionError("pack_state: y does not match z");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k + n, kStateDumpColumns);
  auto fill = [&](int col, const Eigen::VectorXd& xv, const Eigen::VectorXd& zv) {
    if (xv.size() == k) d.block(0, col, k, 1) = xv;
    if (zv.size() == n) d.block(k, col, n, 1) = zv;
  };
  fill(0, s.x_hat, s.z_hat);
  fill(1, s.kappa_x, s.kappa_z);
  fill(2, s.tilt_x, s.tilt_z);
  fill(3, s.lambda_x, s.lambda_z);
  fill(4, s.gamma_x, s.gamma_z);
  fill(5, s.rho_x, s.rho_z);
  fill(6, Eigen::VectorXd(), s.m);
  fill(7, Eigen::VectorXd(), y);
  return d;
}

UnpackedState unpack_state(const Eigen::MatrixXd& d, Eigen::Index cols) {
  if (d.cols() != kStateDumpColumns)
    throw DimensionError("unpack_state: expected " + std::to_string(kStateDumpColumns) +
                         " columns, got " + std::to_string(d.cols()));
  if (cols < 1 || cols >= d.rows())
    throw DimensionError("unpack_state: K = " + std::to_string(cols) + " does not fit " +
                         std::to_string(d.rows()) + " rows");
  const Eigen::Index k = cols, n = d.rows() - cols;
  UnpackedState u;
  EpState& s = u.state;
  s.x_hat = d.block(0, 0, k, 1);
  s.z_hat = d.block(k, 0, n, 1);
  s.kappa_x = d.block(0, 1, k, 1);
  s.kappa_z = d.block(k, 1, n, 1);
  s.tilt_x = d.block(0, 2, k, 1);
  s.tilt_z = d.block(k, 2, n, 1);
  s.lambda_x = d.block(0, 3, k, 1);
  s.lambda_z = d.block(k, 3, n, 1);
  s.gamma_x = d.block(0, 4, k, 1);
  s.gamma_z = d.block(k, 4, n, 1);
  s.rho_x = d.block(0, 5, k, 1);
  s.rho_z = d.block(k, 5, n, 1);
  s.m = d.block(k, 6, n, 1);
  u.y = d.block(k, 7, n, 1);
  return u;
}

}  // namespace samp
