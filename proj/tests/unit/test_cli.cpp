// Copyright 2026 The kacsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "kac/cli/config.hpp"
#include "kac/cli/experiments.hpp"
#include "kac/cli/verify.hpp"

using namespace kac::cli;
namespace fs = std::filesystem;

namespace {

struct Run
{
    int status;
    std::string out;
    std::string err;
};

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Workdir
{
  public:
    Workdir()
    {
        dir_ = fs::temp_directory_path() /
               ("kacsim-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    ~Workdir() { fs::remove_all(dir_); }

    fs::path path(std::string const& name) const { return dir_ / name; }

    fs::path write(std::string const& name, std::string const& text) const
    {
        std::ofstream(path(name), std::ios::binary) << text;
        return path(name);
    }

    Run kacsim(std::string const& args) const
    {
        auto const out = path("stdout"), err = path("stderr");
        std::string const cmd = std::string(KACSIM_BINARY) + " " + args + " >" + out.string() + " 2>" + err.string();
        int const raw = std::system(cmd.c_str());
        return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
    }

  private:
    fs::path dir_;
};

std::string strip_comments(std::string const& csv)
{
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("#", 0) != 0)
            out += line + "\n";
    return out;
}

// Field count of one CSV record; quoted fields may contain commas.
std::size_t csv_fields(std::string const& line)
{
    std::size_t n = 1;
    bool quoted = false;
    for (char ch : line)
    {
        if (ch == '"')
            quoted = !quoted;
        else if (ch == ',' && !quoted)
            ++n;
    }
    return n;
}

std::string field_of(ConfigError const& e) { return e.field(); }

std::string parse_error_field(Json const& j)
{
    try
    {
        parse_config(j);
    }
    catch (ConfigError const& e)
    {
        return field_of(e);
    }
    return "<none>";
}

char const* const kSmallThermostat = R"({
  "model": "thermostat",
  "params": {"d": 2, "N": 3, "lambda": 1.0, "mu": 1.0, "beta": 1.0},
  "initial": {"kind": "gaussian", "beta0": 0.5},
  "time": {"t_end": 1.0, "intervals": 4},
  "samples": {"trajectories": 300, "histories": 50, "mc_samples": 600},
  "seed": 9
})";

} // namespace

TEST(Config, DefaultsAndEcho)
{
    auto const c = parse_config(Json::object());
    EXPECT_EQ(c.model, Model::thermostat);
    EXPECT_EQ(c.d, 3u);
    EXPECT_EQ(c.times.size(), 11u);
    auto const echo = to_json(c);
    EXPECT_FALSE(echo.contains("workers"));
    std::vector<std::string> keys;
    for (auto const& [k, _] : echo.items())
        keys.push_back(k);
    ASSERT_GE(keys.size(), 3u);
    EXPECT_EQ(keys[0], "model");
    EXPECT_EQ(keys[1], "params");
}

TEST(Config, ErrorsNameTheField)
{
    EXPECT_EQ(parse_error_field({{"params", {{"d", 0}}}}), "params.d");
    EXPECT_EQ(parse_error_field({{"params", {{"beta", -1.0}}}}), "params.beta");
    EXPECT_EQ(parse_error_field({{"params", {{"mu", "fast"}}}}), "params.mu");
    EXPECT_EQ(parse_error_field({{"bogus", 1}}), "bogus");
    EXPECT_EQ(parse_error_field({{"model", "boltzmann"}}), "model");
    EXPECT_EQ(parse_error_field({{"seed", -3}}), "seed");
    EXPECT_EQ(parse_error_field({{"time", {{"points", {0.0, 2.0, 1.0}}}}}), "time.points");
    EXPECT_EQ(parse_error_field({{"verify", {{"inject_fault", "gremlins"}}}}), "verify.inject_fault");
    EXPECT_EQ(parse_error_field({{"initial", {{"drift", {1.0}}}}}), "initial.drift");
}

TEST(Config, ClassicKacSubstitutesRates)
{
    auto const c = parse_config({{"model", "classic-kac"}, {"params", {{"d", 1}, {"N", 2}, {"M", 3}}}});
    auto const p = c.reservoir_params();
    EXPECT_DOUBLE_EQ(p.mu, 1.5);
    EXPECT_DOUBLE_EQ(p.lambda_S, 0.5);
    EXPECT_DOUBLE_EQ(p.lambda_R, 1.0);
}

TEST(Render, CsvLayout)
{
    CsvTable t{{"t", "x"}, {{"0", "1.5"}, {"1", "2"}}};
    auto const s = render_csv("energy-decay", Json{{"a", 1}}, t, "2026-01-01T00:00:00Z");
    EXPECT_EQ(s,
              "# kacsim energy-decay\n# generated 2026-01-01T00:00:00Z\n# config {\"a\":1}\nt,x\n0,1.5\n1,2\n");
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(2.0), "2");
}

TEST(Render, JsonKeyOrder)
{
    auto const s = render_json("k-matrix", Json{{"z", 1}, {"a", 2}}, Json{{"r", 3}}, "T");
    auto const j = Json::parse(s);
    std::vector<std::string> keys;
    for (auto const& [k, _] : j.items())
        keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"command", "generated", "config", "result"}));
    EXPECT_LT(s.find("\"z\""), s.find("\"a\""));
}

TEST(Verify, ClassificationRule)
{
    EXPECT_EQ(classify_check(false, 1e-13, 1e-12, 0.0), CheckStatus::pass);
    EXPECT_EQ(classify_check(false, 1e-11, 1e-12, 0.0), CheckStatus::fail);
    EXPECT_EQ(classify_check(true, 2.0, 3.0, 1.0), CheckStatus::pass);
    EXPECT_EQ(classify_check(true, 5.0, 3.0, 1.0), CheckStatus::fail);
    EXPECT_EQ(classify_check(true, 2.0, 1.0, 1.0), CheckStatus::inconclusive);
    EXPECT_EQ(classify_check(true, std::numeric_limits<double>::infinity(), 1.0, 1.0), CheckStatus::fail);
}

TEST(Verify, DefaultBatteryPassesAndFaultIsCaught)
{
    auto const clean = run_verify(parse_config(Json::object()));
    ASSERT_EQ(clean.checks.size(), verify_check_names().size());
    for (auto const& c : clean.checks)
        EXPECT_EQ(c.status, CheckStatus::pass) << c.name << " value=" << c.value << " tol=" << c.tolerance << " "
                                               << c.detail;
    EXPECT_TRUE(clean.passed());

    auto const broken = run_verify(parse_config({{"verify", {{"inject_fault", "reflection-sign"}}}}));
    EXPECT_FALSE(broken.passed());
    EXPECT_EQ(broken.checks.front().name, "conservation");
    EXPECT_EQ(broken.checks.front().status, CheckStatus::fail);

    auto const tight = run_verify(parse_config({{"verify", {{"tolerances", {{"symmetry-condition", 1e-9}}}}}}));
    for (auto const& c : tight.checks)
    {
        if (c.name == "symmetry-condition")
        {
            EXPECT_EQ(c.status, CheckStatus::inconclusive);
        }
    }
    auto const j = tight.to_json();
    EXPECT_TRUE(j.contains("passed"));
    EXPECT_TRUE(j.contains("summary"));
}

TEST(Binary, EnergyDecayCsvAndWorkerInvariance)
{
    Workdir w;
    auto const cfg = w.write("cfg.json", kSmallThermostat);
    auto const a = w.kacsim("energy-decay --config " + cfg.string() + " --workers 1");
    ASSERT_EQ(a.status, 0) << a.err;
    EXPECT_EQ(a.out.find('\r'), std::string::npos);
    auto const body = strip_comments(a.out);
    std::istringstream in(body);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("t,E_mean,E_stderr,E_oracle", 0), 0u) << header;
    std::size_t const columns = csv_fields(header);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
    {
        EXPECT_EQ(csv_fields(line), columns) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 5);

    auto const out = w.path("two.csv");
    auto const b = w.kacsim("energy-decay --config " + cfg.string() + " --workers 2 --out " + out.string());
    ASSERT_EQ(b.status, 0) << b.err;
    EXPECT_TRUE(b.out.empty());
    EXPECT_EQ(strip_comments(slurp(out)), body);

    auto const c = w.kacsim("energy-decay --config " + cfg.string() + " --seed 10");
    EXPECT_NE(strip_comments(c.out), body);
}

TEST(Binary, MomentumAndMixtureCommands)
{
    Workdir w;
    auto const cfg = w.write("cfg.json", kSmallThermostat);
    for (std::string cmd : {"momentum-decay", "info-decay", "entropy-decay"})
    {
        auto const r = w.kacsim(cmd + " --config " + cfg.string());
        ASSERT_EQ(r.status, 0) << cmd << ": " << r.err;
        EXPECT_EQ(r.out.rfind("# kacsim " + cmd + "\n", 0), 0u);
        EXPECT_NE(strip_comments(r.out).find("provenance"), std::string::npos) << cmd;
    }
}

TEST(Binary, KMatrixJson)
{
    Workdir w;
    auto const cfg = w.write("cfg.json", R"({"model": "reservoir", "params": {"d": 2, "N": 2, "M": 3},
        "time": {"points": [0.5, 1.0]}, "samples": {"histories": 2000}})");
    auto const r = w.kacsim("k-matrix --config " + cfg.string());
    ASSERT_EQ(r.status, 0) << r.err;
    auto const j = Json::parse(r.out);
    EXPECT_EQ(j["command"], "k-matrix");
    EXPECT_EQ(j["result"]["results"].size(), 2u);

    auto const bad = w.kacsim("k-matrix --config " + cfg.string() + " --model thermostat");
    EXPECT_EQ(bad.status, 2);
    EXPECT_EQ(Json::parse(bad.err)["error"]["field"], "model");
}

TEST(Binary, ErrorsAreStructured)
{
    Workdir w;
    auto const cfg = w.write("bad.json", R"({"params": {"N": 0}})");
    auto const r = w.kacsim("energy-decay --config " + cfg.string());
    EXPECT_EQ(r.status, 2);
    auto const e = Json::parse(r.err);
    EXPECT_EQ(e["error"]["kind"], "config");
    EXPECT_EQ(e["error"]["field"], "params.N");

    auto const missing = w.kacsim("energy-decay --config " + w.path("nope.json").string());
    EXPECT_EQ(missing.status, 2);

    auto const garbled = w.kacsim("energy-decay --config " + w.write("junk.json", "{not json").string());
    EXPECT_EQ(garbled.status, 2);

    auto const usage = w.kacsim("frobnicate");
    EXPECT_EQ(usage.status, 2);
    EXPECT_EQ(Json::parse(usage.err)["error"]["kind"], "usage");

    auto const workers = w.kacsim("energy-decay --workers 0");
    EXPECT_EQ(workers.status, 2);
}

TEST(Binary, VerifyExitCodeReflectsFault)
{
    Workdir w;
    auto const cfg = w.write("fault.json", R"({"verify": {"inject_fault": "reflection-sign"}})");
    auto const r = w.kacsim("verify --config " + cfg.string());
    EXPECT_EQ(r.status, 1);
    auto const j = Json::parse(r.out);
    EXPECT_FALSE(j["result"]["passed"].get<bool>());
}
