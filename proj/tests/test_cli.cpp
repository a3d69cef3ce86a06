#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "corona_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
    const std::string cmd = std::string(CORONA_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const std::string& file, const std::string& text) { std::ofstream(file) << text; }

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("koch then beta writes the per-scale csv") {
        REQUIRE(run("generate --kind koch --kappa 0.1 --depth 8 --output " + path("koch.csv")) == 0);
        REQUIRE(run("beta --input " + path("koch.csv") + " --stride 512 --output " + path("beta.csv")) == 0);
        std::istringstream csv(slurp(path("beta.csv")));
        std::string header, row;
        std::getline(csv, header);
        CHECK(header == "center_index,alpha,r,beta_sq,mass");
        REQUIRE(std::getline(csv, row));
        CHECK(std::count(row.begin(), row.end(), ',') == 4);
    }

    TEST_CASE("decompose on plane data passes with zero residual") {
        REQUIRE(run("generate --kind flat --n 2 --k 1 --spacing 0.0078125 --output " + path("flat.csv")) == 0);
        REQUIRE(run("decompose --input " + path("flat.csv") + " --output " + path("dec.json")) == 0);
        const json doc = json::parse(slurp(path("dec.json")));
        CHECK(doc["all_pass"].get<bool>());
        CHECK(doc["report"]["residual"].get<double>() == 0.0);
        CHECK(doc.contains("constants"));
        CHECK(doc["constants"]["c2"].get<double>() > 0.0);
    }

    TEST_CASE("verify on the three atom example") {
        write(path("three.csv"), "x1,x2,weight\n-1,0,1\n1,0,1\n0,1,1\n");
        CHECK(run("verify --input " + path("three.csv") + " --check beta --r 2 --output " + path("verify.json")) == 0);
        const json doc = json::parse(slurp(path("verify.json")));
        CHECK(doc["all_pass"].get<bool>());
    }

    TEST_CASE("outputs are byte identical across runs") {
        REQUIRE(run("generate --kind graph_noise --function sine --amplitude 0.05 --noise-count 20 --noise-mass 0.1 "
                    "--seed 4 --output " + path("g1.csv")) == 0);
        REQUIRE(run("generate --kind graph_noise --function sine --amplitude 0.05 --noise-count 20 --noise-mass 0.1 "
                    "--seed 4 --output " + path("g2.csv")) == 0);
        CHECK(slurp(path("g1.csv")) == slurp(path("g2.csv")));
        REQUIRE(run("density --input " + path("g1.csv") + " --report proxies --output " + path("d.json")) == 0);
        const std::string first = slurp(path("d.json"));
        REQUIRE(run("density --input " + path("g1.csv") + " --report proxies --output " + path("d.json")) == 0);
        CHECK(first == slurp(path("d.json")));
    }

    TEST_CASE("config file with command line precedence") {
        write(path("cfg.json"), R"({"kind": "flat", "n": 3, "k": 2, "spacing": 0.5})");
        REQUIRE(run("generate --config " + path("cfg.json") + " --spacing 0.25 --output " + path("cfg.csv")) == 0);
        std::istringstream csv(slurp(path("cfg.csv")));
        std::string header;
        std::getline(csv, header);
        CHECK(header == "x1,x2,x3,weight");
        write(path("cfg_bad.json"), R"({"kind": "flat", "colour": 1})");
        CHECK(run("generate --config " + path("cfg_bad.json") + " --output " + path("x.csv")) == 3);
    }

    TEST_CASE("input errors exit with 3") {
        write(path("bad.csv"), "x1,x2,weight\n0,0,1\n0,zz,1\n");
        CHECK(run("beta --input " + path("bad.csv") + " --output " + path("o.csv")) == 3);
        CHECK(slurp(path("stderr.txt")).find("input error") != std::string::npos);
        CHECK(run("beta --input " + path("missing.csv")) == 3);
        CHECK(run("decompose --input " + path("flat.csv") + " --bogus-flag 1") == 3);
        write(path("consts.json"), R"({"c_unknown": 1.0})");
        CHECK(run("decompose --input " + path("flat.csv") + " --constants " + path("consts.json")) == 3);
        CHECK(run("generate --kind flat --jobs 0") == 3);
    }

    TEST_CASE("bound failures exit with 2") {
        write(path("tight.json"), R"({"c_hk": 1e-9, "c_mink": 1e-9})");
        CHECK(run("decompose --input " + path("flat.csv") + " --constants " + path("tight.json") + " --output " +
                  path("tight_out.json")) == 2);
        CHECK(slurp(path("stderr.txt")).find("bound failure") != std::string::npos);
    }
}
