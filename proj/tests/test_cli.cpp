#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args)
{
    const std::string cmd = std::string(SLOPEPATH_CLI) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("slopepath_cli_" + name)).string();
}

int count_lines(const std::string& s)
{
    int lines = 0;
    for (char c : s) lines += c == '\n';
    return lines;
}

} // namespace

TEST_CASE("weights subcommand")
{
    const Result r = run("weights --design oscar --p 3 --q 1");
    CHECK(r.code == 0);
    CHECK(r.out.find('3') != std::string::npos);
    CHECK(run("weights --design gauss --p 10 --n 10").code == 2);
    CHECK(run("weights --design nope --p 3").code == 2);
    CHECK(run("").code != 0);
}

TEST_CASE("simulate, path and check round trip through files")
{
    const std::string inst = temp("inst.csv");
    const std::string path = temp("path.jsonl");
    const std::string events = temp("events.csv");
    REQUIRE(run("--seed 4 simulate --scenario 2 --p 6 --n 20 --out " + inst).code == 0);
    const Result p = run("path --instance " + inst + " --design qs --out " + path + " --events " + events);
    CHECK(p.code == 0);
    CHECK(std::filesystem::exists(path));
    std::ifstream ev(events);
    std::string header;
    std::getline(ev, header);
    CHECK(header == "index,eta,kind,g,k");

    const std::string w = temp("w.csv");
    const std::string beta = temp("beta.csv");
    std::ofstream(w) << "0.5\n1\n1.5\n2\n2.5\n3\n";
    CHECK(run("solve --instance " + inst + " --weights " + w + " --out " + beta).code == 0);
    CHECK(run("--format json check --instance " + inst + " --weights " + w + " --beta " + beta).code == 0);
    CHECK(run("solve --instance " + inst + " --weights " + w + " --max-iter 1 --tol 1e-14").code == 3);
    CHECK(run("solve --instance " + temp("missing.csv") + " --weights " + w).code == 2);
}

TEST_CASE("explicit flags override the config file")
{
    const std::string cfg = temp("cfg.json");
    std::ofstream(cfg) << R"({"weights": {"design": "qs", "p": 5}})";
    CHECK(count_lines(run("--config " + cfg + " weights").out) >= 5);
    const Result a = run("--config " + cfg + " weights --p 2");
    const Result b = run("weights --design qs --p 2");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("sphericity and contour")
{
    CHECK(run("sphericity --p-max 10").code == 0);
    CHECK(run("contour --design qs --p 4 --angles 8").code == 0);
    CHECK(run("contour --design qs --p 1").code == 2);
}
