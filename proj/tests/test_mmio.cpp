#include <gtest/gtest.h>

#include <sstream>

#include "cgsolve/generators.hpp"
#include "cgsolve/mmio.hpp"
#include "support/oracles.hpp"

using namespace cgsolve;
using cgsolve::testing::slurp;
using cgsolve::testing::TempDir;

namespace {

Operator parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in);
}

template <typename E>
E expect_throw_as(const std::string& text) {
  try {
    parse(text);
  } catch (const E& e) {
    return e;
  } catch (const std::exception& e) {
    ADD_FAILURE() << "wrong exception: " << e.what();
    throw;
  }
  ADD_FAILURE() << "no exception for:\n" << text;
  throw std::logic_error("unreachable");
}

std::size_t stored_entries(const std::string& mm) {
  std::istringstream in(mm);
  std::string line;
  std::getline(in, line);
  std::size_t n = 0, m = 0, nnz = 0;
  in >> n >> m >> nnz;
  return nnz;
}

}  // namespace

TEST(ReadMatrixMarket, SymmetricCoordinateMirrors) {
  const auto a = parse(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "% a comment\n"
      "2 2 3\n"
      "1 1 2.0\n"
      "2 1 -1.0\n"
      "2 2 2.0\n");
  ASSERT_TRUE(std::holds_alternative<CsrMatrix>(a));
  EXPECT_EQ(to_dense(a), (DenseMatrix{{2, -1}, {-1, 2}}));
}

TEST(ReadMatrixMarket, ArrayIsColumnMajor) {
  const auto a = parse("%%MatrixMarket matrix array real general\n2 2\n4\n1\n1\n3\n");
  ASSERT_TRUE(std::holds_alternative<DenseMatrix>(a));
  EXPECT_EQ(std::get<DenseMatrix>(a), (DenseMatrix{{4, 1}, {1, 3}}));

  const auto b = parse("%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n");
  EXPECT_EQ(std::get<DenseMatrix>(b), (DenseMatrix{{1, 2}, {3, 4}}));
}

TEST(ReadMatrixMarket, SymmetricArrayListsLowerTriangle) {
  const auto a = parse("%%MatrixMarket matrix array real symmetric\n3 3\n4\n1\n0\n3\n1\n2\n");
  EXPECT_EQ(std::get<DenseMatrix>(a), (DenseMatrix{{4, 1, 0}, {1, 3, 1}, {0, 1, 2}}));
}

TEST(ReadMatrixMarket, HeaderIsCaseInsensitiveAndCrlfTolerant) {
  const auto a = parse("%%MatrixMarket MATRIX Coordinate Real General\r\n1 1 1\r\n1 1 5e-1\r\n");
  EXPECT_EQ(to_dense(a), (DenseMatrix{{0.5}}));
}

TEST(ReadMatrixMarket, RejectsUnsupportedHeaders) {
  for (const char* header : {"%%MatrixMarket matrix coordinate integer general",
                             "%%MatrixMarket matrix coordinate pattern symmetric",
                             "%%MatrixMarket matrix coordinate complex general",
                             "%%MatrixMarket matrix coordinate real hermitian",
                             "%%MatrixMarket matrix coordinate real skew-symmetric",
                             "%%MatrixMarket vector coordinate real general",
                             "%%MatrixMarket matrix banded real general", "%MatrixMarket matrix coordinate real general",
                             "1 1 1"}) {
    expect_throw_as<UnsupportedFormat>(std::string(header) + "\n1 1 1\n1 1 1\n");
  }
  expect_throw_as<UnsupportedFormat>("");
  expect_throw_as<UnsupportedFormat>("%%MatrixMarket matrix coordinate real general\n2 3 0\n");
}

TEST(ReadMatrixMarket, OutOfBoundsIndexReportsLine) {
  const auto e = expect_throw_as<ParseError>(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 2\n"
      "1 1 1.0\n"
      "3 1 1.0\n");
  EXPECT_EQ(e.line(), 4u);
  const auto zero = expect_throw_as<ParseError>("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n");
  EXPECT_EQ(zero.line(), 3u);
}

TEST(ReadMatrixMarket, DuplicatesAreErrors) {
  const auto same = expect_throw_as<ParseError>(
      "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n1 2 1.0\n");
  EXPECT_EQ(same.line(), 4u);
  // Both triangles stored in a symmetric file collide after mirroring.
  const auto mirrored = expect_throw_as<ParseError>(
      "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n2 1 -1\n1 2 -1\n");
  EXPECT_EQ(mirrored.line(), 5u);
}

TEST(ReadMatrixMarket, CountAndValueErrors) {
  expect_throw_as<ParseError>("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n");
  expect_throw_as<ParseError>("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 1\n");
  const auto nan = expect_throw_as<ParseError>("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 abc\n");
  EXPECT_EQ(nan.line(), 3u);
  expect_throw_as<ParseError>("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 inf\n");
  expect_throw_as<ParseError>("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n");
  expect_throw_as<ParseError>("%%MatrixMarket matrix coordinate real general\n");
  expect_throw_as<ParseError>("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1\n");
}

TEST(ReadMatrixMarket, MissingFileIsIoError) {
  EXPECT_THROW(read_matrix_market(std::string("/nonexistent/dir/a.mtx")), IoError);
}

TEST(WriteMatrixMarket, StoresLowerTriangleOnly) {
  std::ostringstream id;
  write_matrix_market(DenseMatrix::identity(2), id);
  EXPECT_EQ(stored_entries(id.str()), 2u);

  std::ostringstream lap;
  write_matrix_market(generate_laplacian_1d(3), lap);
  EXPECT_EQ(lap.str(),
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "3 3 5\n"
            "1 1 2\n"
            "2 1 -1\n"
            "2 2 2\n"
            "3 2 -1\n"
            "3 3 2\n");
}

TEST(WriteMatrixMarket, RejectsNonSymmetric) {
  std::ostringstream out;
  EXPECT_THROW(write_matrix_market(DenseMatrix{{1, 2}, {3, 4}}, out), InvalidArgument);
}

TEST(WriteMatrixMarket, UnwritablePathIsIoError) {
  EXPECT_THROW(write_matrix_market(DenseMatrix::identity(2), "/nonexistent/dir/a.mtx"), IoError);
}

TEST(MatrixRoundTrip, GeneratedMatricesAreBitIdentical) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t n = 1 + seed * 3;
    const auto dense = generate_random_spd(n, seed, std::pow(10.0, static_cast<double>(seed % 7)));
    const auto path = dir.file("m" + std::to_string(seed) + ".mtx");
    write_matrix_market(dense, path);
    EXPECT_EQ(to_dense(read_matrix_market(path)), dense) << "seed " << seed;
  }
  const auto lap = generate_laplacian_1d(40);
  write_matrix_market(lap, dir.file("lap.mtx"));
  EXPECT_EQ(std::get<CsrMatrix>(read_matrix_market(dir.file("lap.mtx"))), lap);
}

TEST(ReadVector, Examples) {
  std::istringstream plain("1\n2\n");
  EXPECT_EQ(read_vector(plain), (Vector{1, 2}));
  std::istringstream commented("% comment\n0\n");
  EXPECT_EQ(read_vector(commented), (Vector{0}));
}

TEST(ReadVector, ErrorsCarryLineNumbers) {
  std::istringstream bad("1\n% c\nfoo\n");
  try {
    read_vector(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream two("1 2\n");
  EXPECT_THROW(read_vector(two), ParseError);
  std::istringstream empty("% nothing\n");
  EXPECT_THROW(read_vector(empty), ParseError);
}

TEST(VectorRoundTrip, ThousandRandomValues) {
  TempDir dir;
  SplitMix64 rng(2024);
  Vector v(1000);
  for (auto& x : v) x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.next() % 200) - 100);
  write_vector(v, dir.file("v.txt"));
  const auto back = read_vector(dir.file("v.txt"));
  ASSERT_EQ(back.size(), v.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(back[i] - v[i]));
  EXPECT_LE(worst, 1e-15);
  EXPECT_EQ(back, v);
}

TEST(Report, IdentitySolve) {
  const auto report = solve({DenseMatrix::identity(2), Vector{1, 1}});
  const auto j = nlohmann::json::parse(report_to_string(report));
  EXPECT_EQ(j["iterations"], 1);
  EXPECT_EQ(j["residual_norms"].size(), 2u);
  EXPECT_EQ(j["stop_reason"], "converged");
  EXPECT_EQ(j["n"], 2);
}

TEST(Report, TwoByTwoHistories) {
  SolverConfig cfg;
  cfg.tol_rel = 1e-12;
  const auto report = solve({DenseMatrix{{4, 1}, {1, 3}}, Vector{1, 2}}, cfg);
  const auto j = nlohmann::json::parse(report_to_string(report));
  EXPECT_EQ(j["alphas"][0], 0.25);
  EXPECT_EQ(j["betas"], nlohmann::json::array({0.0625}));
}

TEST(Report, KeyOrderIsFixed) {
  const auto d = diagnose({DenseMatrix{{4, 1}, {1, 3}}, Vector{1, 2}}, Vector{0, 0});
  const auto j = nlohmann::ordered_json::parse(report_to_string(d.solve, &d.invariants));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"n", "iterations", "stop_reason", "residual_norms", "alphas", "betas",
                                            "tol_rel", "invariants"}));
  std::vector<std::string> entry_keys;
  for (const auto& [k, v] : j["invariants"][0].items()) entry_keys.push_back(k);
  EXPECT_EQ(entry_keys, (std::vector<std::string>{"name", "violation", "threshold", "pass", "status",
                                                  "worst_iteration", "normalization", "legs"}));
}

TEST(Report, ParseAndReserializeIsByteIdentical) {
  const auto sys = LinearSystem{generate_random_spd(12, 3, 1e3), generate_random_vector(12, 4)};
  const auto d = diagnose(sys, Vector(12, 0.0));
  const auto text = report_to_string(d.solve, &d.invariants);
  EXPECT_EQ(nlohmann::ordered_json::parse(text).dump(2) + "\n", text);
}

TEST(Report, GoldenTwoByTwo) {
  SolverConfig cfg;
  cfg.tol_rel = 1e-12;
  const auto d = diagnose({DenseMatrix{{4, 1}, {1, 3}}, Vector{1, 2}}, Vector{0, 0}, cfg);
  TempDir dir;
  write_report(d.solve, &d.invariants, dir.file("a.json"));
  write_report(d.solve, &d.invariants, dir.file("b.json"));
  const auto first = slurp(dir.file("a.json"));
  EXPECT_EQ(first, slurp(dir.file("b.json")));
  EXPECT_EQ(first, slurp(std::string(CGSOLVE_GOLDEN_DIR) + "/two_by_two_report.json"));
}
