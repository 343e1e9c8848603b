#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hanflab/lab.hpp"
#include "hanflab/structure_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace hanflab;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

std::string cli_path() {
    const char* env = std::getenv("HANFLAB_CLI");
    REQUIRE_MESSAGE(env != nullptr, "HANFLAB_CLI must point at the built binary");
    return env;
}

RunResult run_raw(const std::string& command_line) {
    std::string command = command_line + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buffer[4096];
    std::size_t got;
    while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, got);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

RunResult run(const std::string& args) { return run_raw(cli_path() + " " + args); }

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("hanflab_cli_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::string save(const std::string& name, const Structure& s) const {
        std::string file = (path / name).string();
        save_structure_file(s, file);
        return file;
    }

    std::string write(const std::string& name, const std::string& text) const {
        std::string file = (path / name).string();
        std::ofstream out(file);
        out << text;
        return file;
    }
};

} // namespace

TEST_CASE("structure validate: verdicts and exit codes") {
    TempDir dir;
    std::string good = dir.save("c3.json", make_cycle(3));
    auto ok = run("structure validate " + good + " --json");
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("\"valid\":true") != std::string::npos);
    CHECK(ok.output.back() == '\n');

    std::string bad = dir.write("bad.json",
                                R"({"signature":{"relations":[["E",2]],"constants":[]},)"
                                R"("universe":2,"relations":{"E":[[0,5]]},"constants":{}})");
    auto invalid = run("structure validate " + bad + " --json");
    CHECK(invalid.exit_code == 1);
    CHECK(invalid.output.find("out of range") != std::string::npos);

    auto missing = run("structure validate /nonexistent.json --json");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("fo eval: truth maps to the exit code") {
    TempDir dir;
    std::string c3 = dir.save("c3.json", make_cycle(3));
    auto yes = run("fo eval " + c3 + " --formula \"forall x. exists y. E(x,y)\" --json");
    CHECK(yes.exit_code == 0);
    CHECK(yes.output.find("\"value\":true") != std::string::npos);
    auto no = run("fo eval " + c3 + " --formula \"exists x. forall y. !E(x,y)\" --json");
    CHECK(no.exit_code == 1);

    auto syntax = run("fo eval " + c3 + " --formula \"E(x\" --json");
    CHECK(syntax.exit_code == 2);
    CHECK(syntax.output.find("\"code\":\"input\"") != std::string::npos);
}

TEST_CASE("fo rank and localize") {
    TempDir dir;
    std::string c3 = dir.save("c3.json", make_cycle(3));
    auto rank = run("fo rank " + c3 + " --formula \"forall x. exists y. E(x,y)\" --json");
    CHECK(rank.output.find("\"rank\":2") != std::string::npos);
    auto localized = run("fo localize " + c3 + " --formula \"exists y. E(x,y)\" --r 1 --centers x --json");
    CHECK(localized.exit_code == 0);
    CHECK(localized.output.find("_vd0") != std::string::npos);
}

TEST_CASE("hanf compare matches the census examples") {
    TempDir dir;
    std::string c7 = dir.save("c7.json", make_cycle(7));
    std::string c44 = dir.save("c44.json", disjoint_union(make_cycle(4), make_cycle(4)));
    CHECK(run("hanf compare " + c7 + " " + c44 + " --r 1 --t 7 --json").exit_code == 0);
    CHECK(run("hanf compare " + c7 + " " + c44 + " --r 1 --t 8 --json").exit_code == 1);
    CHECK(run("hanf compare " + c7 + " " + c44 + " --r 1 --t omega --json").exit_code == 1);
    CHECK(run("hanf compare " + c7 + " " + c44 + " --full --json").exit_code == 1);
    CHECK(run("hanf compare " + c7 + " " + c7 + " --full --json").exit_code == 0);
}

TEST_CASE("ef compare") {
    TempDir dir;
    std::string c6 = dir.save("c6.json", make_cycle(6));
    std::string c33 = dir.save("c33.json", disjoint_union(make_cycle(3), make_cycle(3)));
    CHECK(run("ef compare " + c6 + " " + c33 + " --q 1 --json").exit_code == 0);
    CHECK(run("ef compare " + c6 + " " + c33 + " --q 3 --json").exit_code == 1);
}

TEST_CASE("present enumerate and validate") {
    TempDir dir;
    std::string p3 = dir.save("p3.json", make_path(3));
    auto count = run("present enumerate " + p3 + " --scheme traversal --count-only --json");
    CHECK(count.output.find("\"count\":4") != std::string::npos);

    auto first = run("present enumerate " + p3 + " --scheme linear --limit 1 --json");
    CHECK(first.exit_code == 0);
    auto payload = Json::parse(first.output);
    std::string expansion_file = (dir.path / "expansion.json").string();
    {
        std::ofstream out(expansion_file);
        out << payload["presentations"][0].dump() << "\n";
    }
    CHECK(run("present validate " + p3 + " " + expansion_file + " --scheme linear --json").exit_code == 0);
}

TEST_CASE("present check produces verdicts with witnesses") {
    auto pass = run("present check --what nbbound --scheme local-order --corpus all:3 --nu 2 --json");
    CHECK(pass.exit_code == 0);
    CHECK(pass.output.find("\"pass\":true") != std::string::npos);

    auto fail = run("present check --what localization --scheme traversal --corpus all:4 --json");
    CHECK(fail.exit_code == 1);
    CHECK(fail.output.find("\"witness\"") != std::string::npos);
}

TEST_CASE("invariance check finds the min-max counterexample") {
    TempDir dir;
    std::string mm = dir.write("mm.fo",
                               "# the least element is adjacent to the greatest\n"
                               "exists x. exists y. ((forall z. (x=z | L(x,z))) & "
                               "(forall z. (z=y | L(z,y))) & E(x,y))\n");
    auto result = run("invariance check --scheme linear --formula-file " + mm + " --corpus all:3 --json");
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("counterexample") != std::string::npos);

    TempDir dir2;
    std::string c5 = dir2.save("c5.json", make_cycle(5));
    auto conn = run("invariance eval " + c5 +
                    " --scheme traversal --formula \"forall x. ((forall y. (x=y | L(x,y))) | exists y. (L(y,x) & "
                    "E(y,x)))\" --json");
    CHECK(conn.exit_code == 0);
}

TEST_CASE("query bundle files drive invariance and locality") {
    TempDir dir;
    std::string bundle = dir.write(
        "conn.json",
        R"q({"scheme":"traversal","sentence":"forall x. ((forall y. (x=y | L(x,y))) | exists y. (L(y,x) & E(y,x)))"})q");
    auto check = run("invariance check --query-file " + bundle + " --corpus all:3 --json");
    CHECK(check.exit_code == 0);
    CHECK(check.output.find("\"invariant\":true") != std::string::npos);

    std::string c5 = dir.save("c5.json", make_cycle(5));
    CHECK(run("invariance eval " + c5 + " --query-file " + bundle + " --json").exit_code == 0);

    auto locality =
        run("lab locality --corpus all:3 --query-file " + bundle + " --r 2 --t omega --json");
    CHECK(locality.exit_code == 0);

    auto conflicting = run("invariance eval " + c5 + " --query-file " + bundle +
                           " --scheme linear --formula \"true\" --json");
    CHECK(conflicting.exit_code == 2);
}

TEST_CASE("the seed flag overrides random corpora") {
    std::string spec = "lab gen --spec random:d=2,n=6,count=2,seed=5 --json";
    auto inherent = run(spec);
    auto overridden = run("lab gen --spec random:d=2,n=6,count=2,seed=0 --seed 5 --json");
    auto a = Json::parse(inherent.output);
    auto b = Json::parse(overridden.output);
    CHECK(a["structures"] == b["structures"]);
    CHECK(b["seed"] == 5);
    CHECK(run("lab gen --spec all:3 --seed 5 --json").exit_code == 2);
}

TEST_CASE("invariance eval reports non-invariant inputs distinctly") {
    TempDir dir;
    std::string p3 = dir.save("p3.json", make_path(3));
    auto result = run("invariance eval " + p3 +
                      " --scheme linear --formula \"exists x. exists y. ((forall z. (x=z | L(x,z))) & (forall z. "
                      "(z=y | L(z,y))) & E(x,y))\" --json");
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("\"code\":\"not-invariant\"") != std::string::npos);
}

TEST_CASE("lab subcommands") {
    auto locality =
        run("lab locality --corpus all:4 --formula \"exists x. exists y. E(x,y)\" --r 1 --t 1 --json");
    CHECK(locality.exit_code == 0);
    CHECK(locality.output.find("\"violations\":[]") != std::string::npos);

    auto minimal =
        run("lab minimal --corpus all:4 --formula \"exists x. exists y. E(x,y)\" --r-max 2 --t-max 4 --json");
    CHECK(minimal.exit_code == 0);
    CHECK(minimal.output.find("\"r\":1") != std::string::npos);
    CHECK(minimal.output.find("\"t\":1") != std::string::npos);

    TempDir dir;
    std::string c10 = dir.save("c10.json", make_cycle(10));
    auto scatter = run("lab scatter " + c10 + " --r 1 --json");
    CHECK(scatter.output.find("\"chosen\":[0,3,6]") != std::string::npos);

    auto gen = run("lab gen --spec all:3 --json");
    CHECK(gen.output.find("\"count\":7") != std::string::npos);

    auto wideness = run("lab wideness --corpus files:" + c10 + " --r 1 --m-max 3 --json");
    CHECK(wideness.exit_code == 0);
    CHECK(wideness.output.find("\"zeta\"") != std::string::npos);
}

TEST_CASE("usage errors exit with code two") {
    CHECK(run("structure census --r 1").exit_code == 2);
    CHECK(run("nonsense").exit_code == 2);
    CHECK(run("hanf compare a b --r -3 --json").exit_code == 2);
    CHECK(run("lab locality --corpus bogus:9 --formula true --json").exit_code == 2);
}

TEST_CASE("the budget environment variable applies") {
    TempDir dir;
    std::string p5 = dir.save("p5.json", make_path(5));
    std::string invocation = "invariance eval " + p5 + " --scheme linear --formula \"true\" --json";
    // 120 linear orders exceed a budget of 10.
    auto blocked = run_raw("env HANFLAB_BUDGET=10 " + cli_path() + " " + invocation);
    CHECK(blocked.exit_code == 2);
    CHECK(blocked.output.find("budget-exceeded") != std::string::npos);
    CHECK(run(invocation).exit_code == 0);
    CHECK(run(invocation + " --budget 10").exit_code == 2);
}

TEST_CASE("json invocations are byte-identical across runs and worker counts") {
    TempDir dir;
    std::string c44 = dir.save("c44.json", disjoint_union(make_cycle(4), make_cycle(4)));
    std::string base = "structure census " + c44 + " --r 2 --json";
    auto first = run(base);
    auto second = run(base);
    auto w4 = run("structure census " + c44 + " --r 2 --workers 4 --json");
    CHECK(first.output == second.output);
    CHECK(first.output == w4.output);

    std::string locality = "lab locality --corpus all:3 --formula \"exists x. exists y. E(x,y)\" --r 1 --t 1 --json";
    CHECK(run(locality).output == run(locality + " --workers 4").output);
}

TEST_CASE("golden bytes: the json schema is pinned") {
    TempDir dir;
    std::string c3 = dir.save("c3.json", make_cycle(3));
    auto validate = run("structure validate " + c3 + " --json");
    CHECK(validate.output ==
          "{\"version\":\"0.1.0\",\"command\":\"structure.validate\",\"valid\":true,"
          "\"structure\":{\"signature\":{\"relations\":[[\"E\",2]],\"constants\":[]},\"universe\":3,"
          "\"relations\":{\"E\":[[0,1],[0,2],[1,0],[1,2],[2,0],[2,1]]},\"constants\":{}}}\n");
    auto value = run("fo eval " + c3 + " --formula \"forall x. exists y. E(x,y)\" --json");
    CHECK(value.output == "{\"version\":\"0.1.0\",\"command\":\"fo.eval\",\"value\":true}\n");
    auto gaifman_edges = run("structure gaifman " + c3 + " --json");
    CHECK(gaifman_edges.output ==
          "{\"version\":\"0.1.0\",\"command\":\"structure.gaifman\",\"universe\":3,"
          "\"edges\":[[0,1],[0,2],[1,2]]}\n");
}

TEST_CASE("reports embed version and corpus provenance") {
    TempDir dir;
    std::string report = (dir.path / "reports" / "locality.json").string();
    auto result = run("lab locality --corpus random:d=2,n=6,count=3,seed=11 --formula "
                      "\"exists x. exists y. E(x,y)\" --r 1 --t 1 --json --report " +
                      report);
    CHECK(result.exit_code == 0);
    std::ifstream in(report);
    REQUIRE(in.good());
    Json j;
    in >> j;
    CHECK(j["version"] == "0.1.0");
    CHECK(j["report"]["corpus"] == "random:d=2,n=6,count=3,seed=11");
    CHECK(j["report"]["seed"] == 11);
}
