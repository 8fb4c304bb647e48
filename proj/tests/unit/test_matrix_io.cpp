#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "samp/error.hpp"
#include "samp/matrix_io.hpp"
#include "samp/rng.hpp"

using namespace samp;
namespace fs = std::filesystem;

namespace {
fs::path temp(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "samp_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c) {
  Rng rng(99);
  Eigen::MatrixXd m(r, c);
  for (auto& v : m.reshaped()) v = rng.normal() * 1e3;
  m(0, 0) = -0.0;
  return m;
}
}  // namespace

TEST(MatrixIo, BinaryRoundTripIsExact) {
  const auto m = random_matrix(7, 5);
  write_matrix_binary(temp("m.bin"), m);
  EXPECT_TRUE(read_matrix_binary(temp("m.bin")) == m);
  EXPECT_TRUE(read_matrix(temp("m.bin")) == m);
  EXPECT_EQ(fs::file_size(temp("m.bin")), 16u + 7 * 5 * 8);
}

TEST(MatrixIo, BinaryLayout) {
  Eigen::MatrixXd m(1, 2);
  m << 1.0, 2.0;
  write_matrix_binary(temp("l.bin"), m);
  std::ifstream in(temp("l.bin"), std::ios::binary);
  unsigned char b[32];
  in.read(reinterpret_cast<char*>(b), 32);
  ASSERT_EQ(in.gcount(), 32);
  EXPECT_EQ(std::string(reinterpret_cast<char*>(b), 7), "SAMPMAT");
  EXPECT_EQ(b[7], 0);
  EXPECT_EQ(b[8], 1);
  EXPECT_EQ(b[12], 2);
  // 1.0 = 0x3FF0000000000000 little-endian
  EXPECT_EQ(b[23], 0x3F);
  EXPECT_EQ(b[22], 0xF0);
}

TEST(MatrixIo, CsvRoundTripIsExact) {
  const auto m = random_matrix(4, 6);
  write_matrix_csv(temp("m.csv"), m);
  EXPECT_TRUE(read_matrix_csv(temp("m.csv")) == m);
  EXPECT_TRUE(read_matrix(temp("m.csv")) == m);
}

TEST(MatrixIo, Errors) {
  const auto m = random_matrix(3, 3);
  write_matrix_binary(temp("t.bin"), m);
  fs::resize_file(temp("t.bin"), fs::file_size(temp("t.bin")) - 4);
  EXPECT_ANY_THROW(read_matrix_binary(temp("t.bin")));
  write_matrix_binary(temp("x.bin"), m);
  { std::ofstream(temp("x.bin"), std::ios::app | std::ios::binary) << 'z'; }
  EXPECT_ANY_THROW(read_matrix_binary(temp("x.bin")));
  { std::ofstream(temp("r.csv")) << "1,2\n3\n"; }
  EXPECT_THROW(read_matrix_csv(temp("r.csv")), DimensionError);
  { std::ofstream(temp("n.csv")) << "1,abc\n"; }
  EXPECT_ANY_THROW(read_matrix_csv(temp("n.csv")));
  EXPECT_ANY_THROW(read_matrix_binary(temp("n.csv")));
  EXPECT_ANY_THROW(read_matrix(temp("missing.bin")));
}

TEST(StateDump, RoundTrip) {
  Rng rng(5);
  auto vec = [&](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (auto& x : v) x = rng.normal();
    return v;
  };
  EpState s;
  s.x_hat = vec(3); s.kappa_x = vec(3); s.tilt_x = vec(3); s.lambda_x = vec(3);
  s.gamma_x = vec(3); s.rho_x = vec(3);
  s.z_hat = vec(5); s.kappa_z = vec(5); s.tilt_z = vec(5); s.lambda_z = vec(5);
  s.gamma_z = vec(5); s.rho_z = vec(5); s.m = vec(5);
  const Eigen::VectorXd y = vec(5);
  const Eigen::MatrixXd dump = pack_state(s, y);
  ASSERT_EQ(dump.rows(), 8);
  ASSERT_EQ(dump.cols(), kStateDumpColumns);
  const auto u = unpack_state(dump, 3);
  EXPECT_TRUE(u.state.x_hat == s.x_hat && u.state.tilt_z == s.tilt_z && u.state.m == s.m);
  EXPECT_TRUE(u.state.gamma_x == s.gamma_x && u.state.rho_z == s.rho_z && u.y == y);
  EXPECT_THROW(unpack_state(dump, 9), DimensionError);
  EXPECT_THROW(unpack_state(Eigen::MatrixXd::Zero(4, 3), 2), DimensionError);
}
