// End-to-end checks of the command-line binary (path in OPDICKMAN_BIN).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

std::string bin_path() {
    const char* p = std::getenv("OPDICKMAN_BIN");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = bin_path() + " " + args + " >/tmp/opdickman_cli_out.txt 2>/tmp/opdickman_cli_err.txt";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("sample subcommand writes reproducible CSV and exits 0") {
    const std::string out = "/tmp/opdickman_cli_sample.csv";
    const std::string args = "sample --q \"1,0;0,2\" --nu usphere --dim 2 --n 100 --seed 9 --out " + out;
    CHECK(run(args) == 0);
    const std::string first = slurp(out);
    CHECK(first.rfind("x1,x2\n", 0) == 0);
    CHECK(run(args) == 0);
    CHECK(slurp(out) == first);
    std::remove(out.c_str());
}

TEST_CASE("golden sample bytes stay frozen for a pinned seed") {
    const std::string out = "/tmp/opdickman_cli_golden.csv";
    CHECK(run("sample --q 1 --nu delta:w=1 --n 5 --seed 123 --out " + out) == 0);
    const std::string expect =
        "x1\n"
        "0.16024760109895278\n"
        "1.3554578586385662\n"
        "0.07232969021843152\n"
        "1.1986696588941177\n"
        "1.1034596587203171\n";
    CHECK(slurp(out) == expect);
    std::remove(out.c_str());
}

TEST_CASE("verification failures exit with code 1 and name the check") {
    // eps = 0.5 truncates the perpetuity after a couple of terms, which the
    // distributional checks must catch
    CHECK(run("verify --q 1 --nu delta:w=1 --n 2000 --seed 4 --eps 0.5") == 1);
    const std::string out = slurp("/tmp/opdickman_cli_out.txt");
    CHECK(out.find("[FAIL]") != std::string::npos);
}

TEST_CASE("usage and config errors exit with code 2") {
    CHECK(run("sample --q not_a_matrix --nu usphere --dim 2 --n 10 --out /tmp/x.csv") == 2);
    CHECK(run("sample --q 1 --nu bogus --n 10 --out /tmp/x.csv") == 2);
    CHECK(run("sample --q 1 --nu delta:w=1 --n 10 --out /nonexistent_dir/x.csv") == 2);
    // not in M+
    CHECK(run("sample --q -1 --nu delta:w=1 --n 10 --out /tmp/x.csv") == 2);
    // command-line level errors map to 2 as well, while --help is success
    CHECK(run("") == 2);
    CHECK(run("sample --no-such-flag") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("verify subcommand returns 0 on a healthy configuration") {
    const std::string log = "/tmp/opdickman_cli_log.jsonl";
    std::remove(log.c_str());
    CHECK(run("verify --q 1 --nu delta:w=1 --n 2000 --seed 4 --out " + log) == 0);
    const std::string out = slurp("/tmp/opdickman_cli_out.txt");
    CHECK(out.find("fixed_point") != std::string::npos);
    CHECK(out.find("[pass]") != std::string::npos);
    // single-line JSON records appended to the experiment log
    const std::string recorded = slurp(log);
    CHECK(recorded.find("{\"name\":\"fixed_point\"") != std::string::npos);
    CHECK(recorded.find("\"p_value\":") != std::string::npos);
    std::remove(log.c_str());
}

TEST_CASE("config file values are overridden by flags") {
    const std::string cfg = "/tmp/opdickman_cli_cfg.txt";
    {
        std::ofstream f(cfg);
        f << "q=1\nnu=delta:w=1\nn=50\nseed=3\nout=/tmp/opdickman_cli_cfg_out.csv\n";
    }
    CHECK(run("sample --config " + cfg + " --n 75") == 0);
    const std::string text = slurp("/tmp/opdickman_cli_cfg_out.csv");
    int rows = 0;
    for (char ch : text)
        if (ch == '\n') ++rows;
    CHECK(rows == 76);  // header + 75 overridden rows
    std::remove(cfg.c_str());
    std::remove("/tmp/opdickman_cli_cfg_out.csv");
}

TEST_CASE("seed falls back to the OPDICKMAN_SEED environment variable") {
    const std::string out1 = "/tmp/opdickman_cli_env1.csv";
    const std::string out2 = "/tmp/opdickman_cli_env2.csv";
    const std::string base = "sample --q 1 --nu delta:w=1 --n 40 --out ";
    const std::string cmd1 = "OPDICKMAN_SEED=77 " + bin_path() + " " + base + out1 + " 2>/dev/null";
    const std::string cmd2 = bin_path() + " " + base + out2 + " --seed 77 2>/dev/null";
    CHECK(WEXITSTATUS(std::system(cmd1.c_str())) == 0);
    CHECK(WEXITSTATUS(std::system(cmd2.c_str())) == 0);
    CHECK(slurp(out1) == slurp(out2));
    std::remove(out1.c_str());
    std::remove(out2.c_str());
}

TEST_CASE("density1d emits the tabulated density") {
    const std::string out = "/tmp/opdickman_cli_density.csv";
    CHECK(run("density1d --theta 1 --xmax 2 --out " + out) == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("x,f_theta\n", 0) == 0);
    // the density on (0,1] is the constant e^{-gamma}
    CHECK(text.find("0.5614594835668851") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("experiment subcommand smoke run") {
    const std::string out = "/tmp/opdickman_cli_conv.csv";
    CHECK(run("experiment convolution --q 1 --nu delta:w=1 --k-list 1,5 --m-samples 400 --seed 2 --out " + out) == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("K,energy_distance,p_value\n", 0) == 0);
    std::remove(out.c_str());
    CHECK(run("experiment bogus --q 1 --nu delta:w=1") == 2);

    const std::string sj = "/tmp/opdickman_cli_sj.csv";
    CHECK(run("experiment small-jumps --q 1 --nu \"atoms:(1)@0.5;(-1)@0.5\" --n 2000 --seed 3 "
              "--eps-schedule 2,0.5 --out " + sj) == 0);
    const std::string sj_text = slurp(sj);
    CHECK(sj_text.rfind("eps,cf_distance,accept_rate,wedge_abs_err\n", 0) == 0);
    int rows = 0;
    for (char ch : sj_text)
        if (ch == '\n') ++rows;
    CHECK(rows == 3);  // header + two schedule entries
    std::remove(sj.c_str());
}

TEST_CASE("density1d rejects an unusable step") {
    CHECK(run("density1d --theta 1 --xmax 2 --step 0.5 --out /tmp/x.csv") == 2);
}
