#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fredhier_cli.hpp"

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "fredhier");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = fredhier::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::vector<double>> csv_rows(const std::string& text, std::vector<std::string>* header = nullptr) {
    std::istringstream in(text);
    std::vector<std::vector<double>> rows;
    bool seen_header = false;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<std::string> cells;
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        if (!seen_header) {
            seen_header = true;
            if (header) *header = cells;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::strtod(c.c_str(), nullptr));
        rows.push_back(row);
    }
    return rows;
}

std::string strip_wall_clock(const std::string& text) {
    std::istringstream in(text);
    std::string keep;
    for (std::string line; std::getline(in, line);)
        if (line.find("wall_clock_s") == std::string::npos) keep += line + "\n";
    return keep;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream b;
    b << f.rdbuf();
    return b.str();
}

}  // namespace

TEST(Cli, TracyWidomTableToFile) {
    const auto path = std::filesystem::temp_directory_path() / "fredhier_tw2.csv";
    std::filesystem::remove(path);
    const Result r = call({"tw", "--beta", "2", "--s-min", "-6", "--s-max", "3", "--step", "0.05", "--nodes", "120",
                           "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::vector<std::string> header;
    const auto rows = csv_rows(slurp(path), &header);
    ASSERT_EQ(header.size(), 2u);
    EXPECT_EQ(header[0], "s");
    EXPECT_EQ(header[1], "F2(s)");
    ASSERT_EQ(rows.size(), 181u);
    EXPECT_DOUBLE_EQ(rows.front()[0], -6.0);
    EXPECT_NEAR(rows.back()[0], 3.0, 1e-12);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i][1], rows[i - 1][1]) << rows[i][0];
    std::filesystem::remove(path);
}

TEST(Cli, InvariantCheckPasses) {
    const Result r = call({"check", "invariants", "--kernel", "airy", "--n", "0", "1", "--s", "-2", "0", "2", "--tol",
                           "1e-8"});
    EXPECT_EQ(r.code, 0) << r.err << r.out;
}

TEST(Cli, JumpResidualRows) {
    const Result r = call({"zs", "jump", "--gamma", "0.5", "--s", "0", "--z", "0.5", "1.0", "2.0", "--tol", "1e-6"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::vector<std::string> header;
    const auto rows = csv_rows(r.out, &header);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(header.front(), "z");
    for (const auto& row : rows) EXPECT_LT(row[1], 1e-6);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(call({"--help"}).code, 0);
    EXPECT_EQ(call({"check", "tau", "--help"}).code, 0);
    const Result usage = call({"tw", "--no-such-flag"});
    EXPECT_EQ(usage.code, 64);
    EXPECT_NE(usage.err.find("Usage"), std::string::npos);
    EXPECT_EQ(call({}).code, 64);
    EXPECT_EQ(call({"tw", "--format", "xml"}).code, 64);
    EXPECT_EQ(call({"tw", "--beta", "3"}).code, 64);
    // errors raised past parsing are exit 1
    EXPECT_EQ(call({"ginibre", "--gamma", "2"}).code, 1);
    const Result div = call({"check", "pii", "--member", "2", "--sigma", "fermi"});
    EXPECT_EQ(div.code, 1);
    EXPECT_NE(div.err.find("DivergentIntegral"), std::string::npos);
    // an impossible tolerance turns a passing identity into exit 2
    EXPECT_EQ(call({"check", "invariants", "--kernel", "airy", "--s", "0", "--tol", "1e-30"}).code, 2);
}

TEST(Cli, JsonCarriesManifest) {
    const Result r = call({"tw", "--beta", "1", "--s-min", "-1", "--s-max", "1", "--step", "0.5", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["manifest"]["command"], "tw");
    EXPECT_TRUE(j["manifest"].contains("wall_clock_s"));
    EXPECT_TRUE(j["manifest"].contains("checksum_fnv1a64"));
    ASSERT_EQ(j["rows"].size(), 5u);
    EXPECT_EQ(j["columns"][1], "F1(s)");
}

TEST(Cli, CsvEmbedsManifest) {
    const Result r = call({"ginibre", "--s-min", "0", "--s-max", "0", "--step", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# command: ginibre"), std::string::npos);
    EXPECT_NE(r.out.find("# checksum_fnv1a64: "), std::string::npos);
}

TEST(Cli, RerunIsByteIdentical) {
    const std::vector<std::string> args{"kpz", "--t", "10", "1000", "--s-min", "-1", "--s-max", "1", "--step", "0.5"};
    const Result a = call(args), b = call(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(strip_wall_clock(a.out), strip_wall_clock(b.out));
}

#ifdef FREDHIER_BIN
// Same table through the installed binary with one worker and with the default pool.
TEST(Cli, ThreadCapDoesNotChangeOutput) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = dir / "fredhier_t1.csv", p4 = dir / "fredhier_t4.csv";
    const std::string base = std::string(FREDHIER_BIN) + " tw --beta 4 --s-min -3 --s-max 2 --step 0.25 --out ";
    ASSERT_EQ(std::system(("FREDHIER_THREADS=1 " + base + p1.string()).c_str()), 0);
    ASSERT_EQ(std::system(("FREDHIER_THREADS=4 " + base + p4.string()).c_str()), 0);
    EXPECT_EQ(strip_wall_clock(slurp(p1)), strip_wall_clock(slurp(p4)));
    std::filesystem::remove(p1);
    std::filesystem::remove(p4);
}
#endif
