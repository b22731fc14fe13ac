#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "sgnet/checkpoint.hpp"
#include "sgnet/run_config.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " SGNET_CLI " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("generate, train, evaluate and report through the command line") {
    test::TempDir dir("cli_flow");
    const std::string d = dir.path().string();
    CHECK(run_cli("generate -o " + d + "/data --subjects 6 --seed 3 --profile desk") == 0);
    CHECK(fs::exists(dir.path() / "data" / "manifest.json"));

    write(dir.path() / "run.ini", "[model]\nprofile = desk\n\n[train]\nepochs = 1\nfolds = 2\nbatch_size = 3\n");
    CHECK(run_cli("train -q -c " + d + "/run.ini -d " + d + "/data -o " + d + "/run") == 0);
    CHECK(fs::exists(dir.path() / "run" / "fold_1" / "checkpoint_latest.ckpt"));
    CHECK(run_cli("evaluate " + d + "/run/fold_0/checkpoint_latest.ckpt --test-fold -o " + d + "/eval.json") == 0);
    CHECK(fs::exists(dir.path() / "eval.json"));
    CHECK(run_cli("report " + d + "/run") == 0);
    CHECK(fs::exists(dir.path() / "run" / "report" / "report.md"));
}

TEST_CASE("configuration precedence: file, then environment, then flags") {
    test::TempDir dir("cli_env");
    const std::string d = dir.path().string();
    write(dir.path() / "run.ini",
          "[model]\nprofile = desk\n\n[data]\nsubjects = 4\n\n[train]\nepochs = 0\nfolds = 2\nseed = 1\nout_dir = " + d +
              "/from_file\n");
    CHECK(run_cli("train -q -c " + d + "/run.ini", "SGNET_OUT_DIR=" + d + "/from_env SGNET_SEED=9") == 0);
    CHECK_FALSE(fs::exists(dir.path() / "from_file"));
    REQUIRE(fs::exists(dir.path() / "from_env" / "config.ini"));
    CHECK(sgnet::load_run_config(dir.path() / "from_env" / "config.ini").seed == 9);

    CHECK(run_cli("train -q -c " + d + "/run.ini --seed 4 -o " + d + "/from_flag", "SGNET_OUT_DIR=" + d +
                                                                                 "/from_env2 SGNET_SEED=9") == 0);
    CHECK_FALSE(fs::exists(dir.path() / "from_env2"));
    CHECK(sgnet::load_run_config(dir.path() / "from_flag" / "config.ini").seed == 4);
}

TEST_CASE("exit codes") {
    test::TempDir dir("cli_codes");
    const std::string d = dir.path().string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("train --no-such-flag") == 2);
    CHECK(run_cli("train -q --variant bogus -o " + d + "/r") == 2);
    write(dir.path() / "bad.ini", "[train]\nlr_g = -1\n");
    CHECK(run_cli("train -q -c " + d + "/bad.ini") == 2);
    CHECK(run_cli("train -q -c " + d + "/missing.ini") == 4);
    CHECK(run_cli("evaluate " + d + "/missing.ckpt") == 4);
    CHECK(run_cli("report " + d + "/nothing") == 4);
    CHECK(run_cli("train -q --profile desk -d " + d + "/no_data -o " + d + "/r") == 4);

    write(dir.path() / "huge.ini",
          "[model]\nprofile = desk\n\n[data]\nsubjects = 4\n\n[train]\nfolds = 2\nepochs = 2\nlr_g = 1e300\nlr_d = "
          "1e300\n");
    CHECK(run_cli("train -q -c " + d + "/huge.ini -o " + d + "/r") == 3);
}
