#include "mwprob/cli.hpp"
#include "mwprob/json_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mwprob;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
  public:
    TempDir() {
        path_ = std::filesystem::temp_directory_path() /
                ("mwprob_cli_" + std::to_string(counter_++) + "_" +
                 std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string write(const std::string &name, const std::string &text) const {
        const auto p = path_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

  private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

const char *kThirds = R"({"theory": "quantum", "amplitudes": [
  {"world": 0, "re": 0.5773502691896258},
  {"world": 1, "re": 0.816496580927726}]})";

const char *kHalf = R"({"theory": "quantum", "amplitudes": [
  {"world": 0, "re": 0.7071067811865476},
  {"world": 1, "re": 0.7071067811865476}]})";

const char *kSplit = R"({"entries": [
  {"i": 1, "j": 1, "re": 0.7071067811865476},
  {"i": 2, "j": 1, "re": 0.7071067811865476},
  {"i": 1, "j": 2, "re": 0.7071067811865476},
  {"i": 2, "j": 2, "re": -0.7071067811865476}]})";

} // namespace

TEST_CASE("prob prints the rule's distribution") {
    TempDir dir;
    const auto state = dir.write("s.json", kThirds);
    auto r = run({"prob", state});
    REQUIRE(r.code == kExitOk);
    const auto j = parse_json(r.out);
    CHECK(j.begin().key() == "seed");
    CHECK(j["seed"] == 0);
    CHECK(j["rule"] == "born");
    CHECK(j["probabilities"][0]["p"].get<double>() == doctest::Approx(1.0 / 3));

    r = run({"--format", "csv", "prob", state});
    CHECK(r.code == kExitOk);
    CHECK(r.out.starts_with("world,p\n0,0.333"));

    r = run({"--seed", "17", "prob", state});
    CHECK(parse_json(r.out)["seed"] == 17);
}

TEST_CASE("output is deterministic") {
    TempDir dir;
    const auto state = dir.write("s.json", kHalf);
    const auto t = dir.write("t.json", kSplit);
    for (const auto &args : std::vector<std::vector<std::string>>{
             {"flow", state, t},
             {"derive", state, "-k", "1", "-M", "50"},
             {"typicality", "--n", "10,100", "--eps", "0.1"}}) {
        const auto a = run(args);
        const auto b = run(args);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("input errors exit 1") {
    TempDir dir;
    auto r = run({"prob", dir.write("bad.json", "{\n  \"theory\": quantum\n}")});
    CHECK(r.code == kExitInputError);
    CHECK(r.err.find("line 2, column") != std::string::npos);

    r = run({"prob", dir.write("empty.json", R"({"theory": "quantum", "amplitudes": []})")});
    CHECK(r.code == kExitInputError);

    r = run({"prob", dir.write("notnorm.json",
                               R"({"theory": "quantum", "amplitudes": [{"world": 0, "re": 2}]})")});
    CHECK(r.code == kExitInputError);

    CHECK(run({"prob", "/nonexistent/state.json"}).code == kExitInputError);
    CHECK(run({"nosuchcommand"}).code == kExitInputError);
    CHECK(run({"--format", "xml", "counterexample"}).code == kExitInputError);
    CHECK(run({"derive", "--mode", "lemma1"}).code == kExitInputError);
}

TEST_CASE("check failures exit 2 with a certificate") {
    auto r = run({"counterexample"});
    CHECK(r.code == kExitCheckFailed);
    const auto j = parse_json(r.out);
    CHECK(j["certificate"]["infeasible"] == true);

    TempDir dir;
    const auto discrete = dir.write(
        "d.json", R"({"theory": "discrete", "amplitudes": [{"world": 0, "count": 1}, {"world": 1, "count": 1}]})");
    r = run({"prob", discrete});
    CHECK(r.code == kExitCheckFailed);
    CHECK(r.out.find("certificate") != std::string::npos);
    CHECK(run({"prob", discrete, "--rule", "discrete-proportional"}).code == kExitOk);

    // The naive count breaks axiom 3 under a splitting map.
    const auto half = dir.write("h.json", kHalf);
    const auto split = dir.write("t.json", R"({"entries": [
      {"i": 1, "j": 1, "re": 0.6}, {"i": 2, "j": 1, "re": 0.8},
      {"i": 1, "j": 2, "re": 0.8}, {"i": 2, "j": 2, "re": -0.6}]})");
    CHECK(run({"axioms", half, split}).code == kExitOk);
    CHECK(run({"axioms", half, split, "--rule", "naive"}).code == kExitCheckFailed);
}

TEST_CASE("flow reports a conditional or a cut") {
    TempDir dir;
    const auto state = dir.write("s.json", kHalf);
    const auto t = dir.write("t.json", kSplit);
    auto r = run({"flow", state, t});
    REQUIRE(r.code == kExitOk);
    const auto j = parse_json(r.out);
    CHECK(j["result"]["feasible"] == true);

    r = run({"--format", "csv", "flow", state, t});
    CHECK(r.out.starts_with("to,from,p\n"));
}

TEST_CASE("derive modes") {
    TempDir dir;
    auto r = run({"derive", "--mode", "rational", "--m", "1,2", "-M", "3", "--format", "csv"});
    // Global options placed after the subcommand still apply.
    REQUIRE(r.code == kExitOk);
    CHECK(r.out == "world,p,value\n0,1/3,0.3333333333333333\n1,2/3,0.6666666666666666\n");

    const auto state = dir.write("s.json", kThirds);
    r = run({"--format", "csv", "derive", state, "-k", "1", "--sweep", "1000,10,100"});
    REQUIRE(r.code == kExitOk);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "M,bound,rule_value,gap");
    std::vector<std::string> ms;
    while (std::getline(lines, line))
        ms.push_back(line.substr(0, line.find(',')));
    CHECK(ms == std::vector<std::string>{"10", "100", "1000"});

    r = run({"--format", "csv", "derive", state, "--mode", "lemma2", "--pair", "1,0"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.starts_with("step,description,validated\n"));

    r = run({"derive", state, "--mode", "lemma1", "--pair", "0,1"});
    CHECK(r.code == kExitInputError);
}

TEST_CASE("typicality table") {
    auto r = run({"--format", "csv", "typicality", "--q", "0.9", "--n", "100", "--eps", "0.05"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.starts_with("n,eps,typical_measure,naive_count_measure,hoeffding_floor\n100,0.05,0.936"));
    CHECK(run({"typicality", "--q", "1.5"}).code == kExitInputError);
    CHECK(run({"--theory", "discrete", "typicality"}).code == kExitInputError);
    const auto j = parse_json(run({"--theory", "stochastic", "typicality"}).out);
    CHECK(j["theory"] == "stochastic");
}
