#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "guplab/cli.hpp"

using namespace guplab;
using namespace guplab::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string out;
};

Result run_cli(const std::string& args) {
    std::string cmd = std::string("GUPLAB_THREADS=1 '") + GUPLAB_CLI_PATH + "' " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> r;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) r.push_back(cell);
        rows.push_back(r);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    fs::path d = fs::temp_directory_path() / ("guplab_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, FlagsOverrideFile) {
    auto d = scratch_dir();
    fs::path f = d / "a.cfg";
    std::ofstream(f) << "# comment\ncommand = uncertainty\nbeta = 0.01   # trailing\n";
    auto c = parse_config({"--config", f.string(), "--beta", "0.02"});
    EXPECT_EQ(c.command, Command::uncertainty);
    EXPECT_DOUBLE_EQ(c.beta(), 0.02);
    auto c2 = parse_config({"--config", f.string()});
    EXPECT_DOUBLE_EQ(c2.beta(), 0.01);
    auto c3 = parse_config({"oscillator", "--config", f.string()});
    EXPECT_EQ(c3.command, Command::oscillator);
}

TEST(Config, LinearSweep) {
    auto raw = parse_config_text("command = uncertainty\nsweep = a 1 10 5 lin\n");
    auto c = build_config(raw);
    ASSERT_TRUE(c.sweep);
    auto v = c.sweep->values();
    std::vector<double> expect{1, 3.25, 5.5, 7.75, 10};
    ASSERT_EQ(v.size(), expect.size());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_DOUBLE_EQ(v[i], expect[i]);
}

TEST(Config, LogSweepEndpoints) {
    Sweep s{"a", 1e-3, 1e3, 61, true};
    auto v = s.values();
    EXPECT_DOUBLE_EQ(v.front(), 1e-3);
    EXPECT_DOUBLE_EQ(v.back(), 1e3);
    EXPECT_NEAR(v[30], 1.0, 1e-12);
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
    std::string m = message_of([] { parse_config_text("command = check\n\nbetta = 0.1\n"); });
    EXPECT_NE(m.find("betta"), std::string::npos);
    EXPECT_NE(m.find("line 3"), std::string::npos);
}

TEST(Config, DuplicateAndTypeErrors) {
    std::string dup = message_of([] { parse_config_text("beta = 0.1\nbeta = 0.2\n"); });
    EXPECT_NE(dup.find("duplicate"), std::string::npos);
    EXPECT_NE(dup.find("line 2"), std::string::npos);
    std::string ty = message_of([] { build_config(parse_config_text("command = check\n\n\nbeta = abc\n")); });
    EXPECT_NE(ty.find("beta"), std::string::npos);
    EXPECT_NE(ty.find("line 4"), std::string::npos);
    EXPECT_THROW(build_config(parse_config_text("command = check\nlevels = 2.5\n")), ValidationError);
    EXPECT_THROW(parse_config_text("just words\n"), ValidationError);
    EXPECT_THROW(build_config(parse_config_text("command = fly\n")), ValidationError);
    EXPECT_THROW(build_config(parse_config_text("command = check\nformat = xml\n")), ValidationError);
    EXPECT_THROW(build_config(parse_config_text("command = check\nsweep = a 1 10 0 lin\n")), ValidationError);
    EXPECT_THROW(build_config(parse_config_text("command = check\nsweep = a -1 10 4 log\n")), ValidationError);
    EXPECT_THROW(build_config(parse_config_text("command = check\nhbar = -1\n")), ValidationError);
    EXPECT_THROW(parse_config({"uncertainty", "--grid", "1", "2"}), ValidationError);
}

TEST(Tables, CsvAndJsonMirror) {
    Table t{{"a", "n", "ok", "s"}, {{0.1, 3LL, true, std::string("x")}}};
    std::ostringstream c, j;
    write_csv(c, t);
    write_json(j, t);
    EXPECT_EQ(c.str(), "a,n,ok,s\n0.10000000000000001,3,true,x\n");
    auto parsed = nlohmann::json::parse(j.str());
    ASSERT_EQ(parsed.size(), 1u);
    EXPECT_DOUBLE_EQ(parsed[0]["a"].get<double>(), 0.1);
    EXPECT_EQ(parsed[0]["n"].get<long long>(), 3);
    EXPECT_EQ(parsed[0]["ok"].get<bool>(), true);
}

TEST(Binary, UncertaintySweep) {
    auto r = run_cli("uncertainty --f \"1+beta*p^2\" --beta 0.01 --sweep a 1e-3 1e3 61 log");
    ASSERT_EQ(r.status, 0);
    auto rows = read_csv(r.out);
    ASSERT_EQ(rows.size(), 62u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "dx", "dp", "lhs", "rhs", "satisfied"}));
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].back(), "true") << i;
}

TEST(Binary, CanonicalOscillator) {
    auto r = run_cli("oscillator --beta 0 --levels 10");
    ASSERT_EQ(r.status, 0);
    auto rows = read_csv(r.out);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0][0], "n");
    EXPECT_EQ(rows[0][1], "E_n");
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][1]), double(i - 1) + 0.5, 1e-10);
}

TEST(Binary, EgupFloor) {
    auto r = run_cli("egup --q 1.1 --mode floor");
    ASSERT_EQ(r.status, 0);
    auto rows = read_csv(r.out);
    ASSERT_EQ(rows.size(), 2u);
    std::size_t ix = 0, iL = 0;
    for (std::size_t k = 0; k < rows[0].size(); ++k) {
        if (rows[0][k] == "dx_min") ix = k;
        if (rows[0][k] == "L") iL = k;
    }
    ASSERT_GT(ix, 0u);
    double ratio = std::stod(rows[1][ix]) / std::stod(rows[1][iL]);
    EXPECT_NEAR(ratio / std::sqrt(0.1 / 1.1), 1.0, 0.02);
}

TEST(Binary, DeterministicOutputFiles) {
    auto d = scratch_dir();
    auto a = d / "a.csv", b = d / "b.csv";
    const std::string args = "uncertainty --beta 0.01 --sweep a 0.1 10 7 log --out ";
    ASSERT_EQ(run_cli(args + a.string()).status, 0);
    ASSERT_EQ(run_cli(args + b.string()).status, 0);
    EXPECT_FALSE(slurp(a).empty());
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Binary, JsonOutput) {
    auto r = run_cli("oscillator --beta 0.001 --levels 3 --format json");
    ASSERT_EQ(r.status, 0);
    auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 3u);
    EXPECT_TRUE(j[0].contains("E_n"));
}

TEST(Binary, ExitCodes) {
    EXPECT_EQ(run_cli("fly").status, 2);
    EXPECT_EQ(run_cli("uncertainty --f \"1 + * p\"").status, 2);
    EXPECT_EQ(run_cli("uncertainty --beta 0.01 --out /nonexistent_dir/x.csv").status, 2);
    EXPECT_EQ(run_cli("uncertainty --bogus 1").status, 2);
    EXPECT_EQ(run_cli("check").status, 0);
}

TEST(Binary, ParseErrorReportsOffset) {
    std::string cmd = std::string("'") + GUPLAB_CLI_PATH + "' uncertainty --f \"1 + * p\" 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    ASSERT_NE(p, nullptr);
    std::string out;
    std::array<char, 512> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    pclose(p);
    EXPECT_NE(out.find("offset 4"), std::string::npos) << out;
}
