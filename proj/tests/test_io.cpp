#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

using namespace slowvary;
using io::json;

TEST(Io, FamilySpecAcceptsRationalStrings)
{
    const json j = json::parse(R"({"M": 1, "dimU": 2, "operators": {"0": [["-1/3", 0], [0, "0.5"]], "1": [[1, 2], [3, 4]]}})");
    const auto fam = io::family_from_json(j);
    EXPECT_DOUBLE_EQ(fam.base()(0, 0), -1.0 / 3);
    EXPECT_DOUBLE_EQ(fam.base()(1, 1), 0.5);
    EXPECT_DOUBLE_EQ(fam.at({1})(1, 0), 3.0);
}

TEST(Io, FamilySpecErrors)
{
    auto kind = [](const char* text) {
        try {
            io::family_from_json(json::parse(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind(R"({"M": 1, "operators": {}})"), ErrorKind::Parse);
    EXPECT_EQ(kind(R"({"M": 2, "dimU": 1, "operators": {"0": [[1]]}})"), ErrorKind::Parse);
    EXPECT_EQ(kind(R"({"M": 1, "dimU": 2, "operators": {"0": [[1]]}})"), ErrorKind::Parse);
    EXPECT_EQ(kind(R"({"M": 1, "dimU": 1, "operators": {"0": [["x"]]}})"), ErrorKind::Parse);
}

TEST(Io, FamilyRoundTrip)
{
    const auto fam = random_walker_physical();
    const auto back = io::family_from_json(json::parse(io::family_to_json(fam).dump()));
    EXPECT_EQ(back.base(), to_double(fam.base()));
    EXPECT_EQ(back.at({0, 1}), to_double(fam.at({0, 1})));
    EXPECT_EQ(back.labels(), fam.labels());
}

TEST(Io, ExactModelEmitsFractionStrings)
{
    const auto fam = random_walker_modal();
    const auto r = construct_reduction(fam, spectral_split_exact(fam.base(), std::nullopt, 3), 3);
    const json j = io::model_to_json(r.model);
    EXPECT_EQ(j["A"]["2,0"][0][0], "8/27");
    EXPECT_EQ(j["A"]["1,2"][0][0], "-20/27");
    EXPECT_EQ(j["arithmetic"], "rational");
    const auto back = io::model_from_json(json::parse(j.dump()));
    EXPECT_DOUBLE_EQ(back.A({3, 0})(0, 0), 16.0 / 243);
}

TEST(Io, FloatModelRoundTripsBitwise)
{
    const auto fam = random_walker_modal().to_double();
    const auto r = construct_reduction(fam, spectral_split(fam.base(), std::nullopt, 2), 2);
    const auto back = io::model_from_json(json::parse(io::model_to_json(r.model).dump()));
    for (const auto& [n, c] : r.model.coeffs)
        EXPECT_EQ(back.A(n), c);
}

TEST(Io, CellSpecs)
{
    const auto named = io::cell_from_json(json::parse(R"({"h": 2, "n": 8, "K_expr": "layered_cos", "params": {"a": 0.25}})"));
    EXPECT_EQ(named.n, 8);
    EXPECT_DOUBLE_EQ(named.K(0, 3), 1.25);
    const auto sampled = io::cell_from_json(json::parse(R"({"n": 4, "K": [[1,1,1,1],[2,2,2,2],[1,1,1,1],[2,2,2,2]]})"));
    EXPECT_DOUBLE_EQ(sampled.harmonic_mean(), 4.0 / 3);
    EXPECT_THROW(io::cell_from_json(json::parse(R"({"n": 4})")), Error);
    EXPECT_TRUE(io::is_cell_spec(json::parse(R"({"K_expr": "constant"})")));
    EXPECT_FALSE(io::is_cell_spec(json::parse(R"({"M": 1})")));
}

TEST(Io, BlockCsvLabels)
{
    const MatrixXd m = MatrixXd::Identity(6, 6);
    const std::string csv = io::block_matrix_csv(m, IndexTable(2, 1), 2);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,\"0,0|0\",\"0,0|1\",\"1,0|0\",\"1,0|1\",\"0,1|0\",\"0,1|1\"");
}

TEST(Io, TrajectoryBinaryRoundTrip)
{
    const auto fam = random_walker_physical().to_double();
    const Grid grid({8, 2}, {8.0, 2.0});
    const auto u0 = make_field(grid, 3, [](const std::vector<double>& x) {
        return VectorXd(Eigen::Vector3d(std::sin(x[0]), x[1], 1.0));
    });
    const auto traj = simulate_micro(fam, u0, 1.0, 0.0, 0.5);
    const std::string bytes = io::trajectory_binary(traj);
    EXPECT_EQ(bytes.substr(0, 8), "SVTRAJ01");
    const auto back = io::trajectory_from_binary(bytes);
    EXPECT_EQ(back.grid.sizes, grid.sizes);
    EXPECT_EQ(back.grid.lengths, grid.lengths);
    ASSERT_EQ(back.frames.size(), traj.frames.size());
    for (size_t i = 0; i < traj.frames.size(); ++i) {
        EXPECT_EQ(back.times[i], traj.times[i]);
        EXPECT_EQ(back.frames[i], traj.frames[i]);
    }
    EXPECT_THROW(io::trajectory_from_binary(bytes.substr(0, 20)), Error);
}

TEST(Io, TrajectoryCsvShape)
{
    const auto fam = random_walker_physical().to_double();
    const auto u0 = make_field(Grid({4, 1}, {4.0, 1.0}), 3, [](const std::vector<double>&) { return VectorXd(Eigen::Vector3d(1, 2, 3)); });
    const auto traj = simulate_micro(fam, u0, 1.0, 0.0, 1.0);
    const std::string csv = io::trajectory_csv(traj, fam.labels());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,p1,p2,p3");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 4);
}

TEST(Io, WriteAndReadJsonFile)
{
    const auto dir = std::filesystem::temp_directory_path() / "slowvary_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    io::write_json_file(dir / "x.json", json{{"a", 1}});
    EXPECT_EQ(io::read_json_file(dir / "x.json")["a"], 1);
    EXPECT_THROW(io::read_json_file(dir / "missing.json"), Error);
    std::filesystem::remove_all(dir.parent_path());
}
