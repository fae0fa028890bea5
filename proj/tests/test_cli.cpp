#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "tmpdir.hpp"

using cachedse::testing::slurp;
using cachedse::testing::TempDir;
using nlohmann::json;

namespace {

const std::string kCli = CACHEDSE_CLI_PATH;
const std::filesystem::path kDataDir = CACHEDSE_DATA_DIR;

int run_cli(const std::string& args, const std::filesystem::path& capture) {
    const std::string cmd =
        kCli + " " + args + " >" + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_small_spec(const TempDir& tmp) {
    const json doc{
        {"trace",
         {{"pattern", "loop"}, {"base", 0}, {"working_set", 16384}, {"stride", 4},
          {"count", 2000}, {"seed", 5},
          {"mix", {{"instr", 0.6}, {"read", 0.3}, {"write", 0.1}}}}},
        {"characterization", (kDataDir / "characterization_synthetic.json").string()},
        {"nsga",
         {{"generations", 4}, {"population_size", 8}, {"seed", 1}}},
        {"baselines", {{1, 4, 0, 0, 1, 4, 0, 0, 0}}},
        {"output_dir", (tmp.path() / "out").string()}};
    return tmp.write("spec.json", doc.dump(2));
}

}  // namespace

TEST_CASE("cli optimize/simulate/compare/hypervolume round trip") {
    TempDir tmp("cli");
    const auto spec = write_small_spec(tmp);
    const auto log = tmp.path() / "cli_out.txt";

    CHECK(run_cli("optimize --spec " + spec.string(), log) == 0);
    const auto front = tmp.path() / "out" / "front.csv";
    CHECK(std::filesystem::exists(front));
    CHECK(std::filesystem::exists(tmp.path() / "out" / "pareto_set.json"));
    CHECK(std::filesystem::exists(tmp.path() / "out" / "log.csv"));

    CHECK(run_cli("simulate --spec " + spec.string() + " --genome 1,0,1,2,0,2,0,0,0", log) ==
          0);
    CHECK(slurp(log).find("exec_time_s") != std::string::npos);

    CHECK(run_cli("compare --spec " + spec.string() + " --front " + front.string(), log) ==
          0);
    CHECK(std::filesystem::exists(tmp.path() / "out" / "compare.csv"));

    CHECK(run_cli("hypervolume --front " + front.string() + " --front " + front.string() +
                      " --bounds 0,1,0,1",
                  log) == 0);
    CHECK(slurp(log).find("std,0") != std::string::npos);
}

TEST_CASE("cli exhaustive with restriction") {
    TempDir tmp("cliexh");
    const auto spec = write_small_spec(tmp);
    const auto log = tmp.path() / "cli_out.txt";

    CHECK(run_cli("exhaustive --spec " + spec.string() +
                      " --restrict LI=0,WI=0,RI=0,SI=0,LD=0,WD=0,RD=0",
                  log) == 0);
    CHECK(std::filesystem::exists(tmp.path() / "out" / "objective_table.csv"));
    const std::string table = slurp(tmp.path() / "out" / "objective_table.csv");
    // 6 data rows: free genes are SD (3 values) and AD (2 values).
    CHECK(std::count(table.begin(), table.end(), '\n') == 7);
}

TEST_CASE("cli determinism across worker counts") {
    TempDir tmp("clidet");
    const auto spec = write_small_spec(tmp);
    const auto log = tmp.path() / "cli_out.txt";

    CHECK(run_cli("optimize --spec " + spec.string() + " --workers 1 --out " +
                      (tmp.path() / "w1").string(),
                  log) == 0);
    CHECK(run_cli("optimize --spec " + spec.string() + " --workers 8 --out " +
                      (tmp.path() / "w8").string(),
                  log) == 0);
    CHECK(slurp(tmp.path() / "w1" / "front.csv") == slurp(tmp.path() / "w8" / "front.csv"));
    CHECK(slurp(tmp.path() / "w1" / "log.csv") == slurp(tmp.path() / "w8" / "log.csv"));
}

TEST_CASE("cli exit codes distinguish validation from usage") {
    TempDir tmp("clierr");
    const auto log = tmp.path() / "cli_out.txt";
    const auto spec = write_small_spec(tmp);

    CHECK(run_cli("", log) == 1);  // missing subcommand
    CHECK(run_cli("optimize", log) == 1);  // missing --spec
    CHECK(run_cli("optimize --spec " + (tmp.path() / "absent.json").string(), log) == 1);
    CHECK(run_cli("optimize --spec " + spec.string() + " --restrict XX=1", log) == 1);
    CHECK(run_cli("simulate --spec " + spec.string() + " --genome 1,2", log) == 1);
    CHECK(run_cli("simulate --spec " + spec.string() + " --genome 9,0,0,0,0,0,0,0,0", log) ==
          1);
    CHECK(run_cli("hypervolume --front " + (tmp.path() / "nope.csv").string(), log) == 1);
    CHECK(run_cli("--help", log) == 0);
}
