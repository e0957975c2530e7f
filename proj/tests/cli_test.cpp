#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "gbts/cli.hpp"
#include "gbts/parser.hpp"

using namespace gbts;
using namespace gbts::testing;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content, const std::string& name) {
        path = std::string("/tmp/gbts_test_") + name;
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("answer on the path query exits zero") {
    TempFile file(print_document(alternating_kb()), "answer.gbts");
    auto res = run({"answer", file.path});
    CHECK(res.code == 0);
    CHECK(res.out.find("entailed") != std::string::npos);
    auto apt = run({"answer", file.path, "--mode", "apt"});
    CHECK(apt.code == 0);
}

TEST_CASE("answer with a foreign constant exits one") {
    TempFile file(R"(
@facts p1(c).
@rules p1(X) -> q1(X).
@queries ? q1(zzz).
)", "foreign.gbts");
    auto res = run({"answer", file.path});
    CHECK(res.code == 1);
    CHECK(res.out.find("not entailed") != std::string::npos);
}

TEST_CASE("classify reports the replicating rule as not wfg") {
    TempFile file(print_document(replicating_kb()), "classify.gbts");
    auto res = run({"classify", file.path});
    CHECK(res.code == 0);
    CHECK(res.out.find("wfg: no") != std::string::npos);
    auto kv = run({"classify", file.path, "--kv"});
    CHECK(kv.code == 0);
    CHECK(kv.out.find("set.wfg: false") != std::string::npos);
}

TEST_CASE("answer on the non-greedy set reports the diagnostic") {
    TempFile file(print_document(non_greedy_kb()), "nongreedy.gbts");
    auto res = run({"answer", file.path});
    CHECK(res.code == 2);
    CHECK(res.err.find("NotGreedy") != std::string::npos);
}

TEST_CASE("chase prints the saturation deterministically") {
    TempFile file(print_document(running_kb()), "chase.gbts");
    auto a = run({"chase", file.path, "--depth", "2"});
    auto b = run({"chase", file.path, "--depth", "2"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);  // byte-for-byte reproducible
    CHECK(a.out.find("q3(") != std::string::npos);
}

TEST_CASE("greedy check lists witnesses") {
    TempFile file(print_document(loop_kb()), "greedy.gbts");
    auto res = run({"chase", file.path, "--depth", "2", "--greedy-check"});
    CHECK(res.code == 0);
    CHECK(res.out.find("root") != std::string::npos);
}

TEST_CASE("saturate writes the artifacts") {
    TempFile file(print_document(alternating_kb()), "saturate.gbts");
    std::string rules_path = "/tmp/gbts_test_rules.json";
    std::string tree_path = "/tmp/gbts_test_tree.json";
    std::string dot_path = "/tmp/gbts_test_tree.dot";
    auto res = run({"saturate", file.path, "--rules-out", rules_path, "--tree-out", tree_path,
                    "--dot", dot_path});
    CHECK(res.code == 0);
    CHECK(res.out.find("bags: 7") != std::string::npos);
    std::ifstream tree(tree_path);
    std::stringstream buf;
    buf << tree.rdbuf();
    CHECK(buf.str().find("\"blocked\": true") != std::string::npos);
    std::ifstream dot(dot_path);
    std::stringstream dbuf;
    dbuf << dot.rdbuf();
    CHECK(dbuf.str().find("digraph") != std::string::npos);
    std::remove(rules_path.c_str());
    std::remove(tree_path.c_str());
    std::remove(dot_path.c_str());
}

TEST_CASE("witness output names the unfolding copy") {
    TempFile file(print_document(alternating_kb()), "witness.gbts");
    std::string witness_path = "/tmp/gbts_test_witness.json";
    auto res = run({"answer", file.path, "--mode", "apt", "--witness", witness_path});
    CHECK(res.code == 0);
    std::ifstream w(witness_path);
    std::stringstream buf;
    buf << w.rdbuf();
    CHECK(buf.str().find("blocked_child") != std::string::npos);
    std::remove(witness_path.c_str());
}

TEST_CASE("translate targets") {
    TempFile file(print_document(replicating_kb()), "translate.gbts");
    auto res = run({"translate", file.path, "--target", "wfg"});
    CHECK(res.code == 0);
    CHECK(res.out.find("samebag") != std::string::npos);
    CHECK(res.out.find("initial(") != std::string::npos);
    // The translated document parses back.
    auto doc = parse_document(res.out);
    CHECK(doc.rules.size() > 4);

    TempFile fg(R"(
@facts p1(a).
@rules p1(X), p2(X,U), p2(Y,Z), p3(Y,Z,U), p2(U,V), p3(U,V,X) -> h13(U,V).
)", "translate_fg.gbts");
    auto guarded = run({"translate", fg.path, "--target", "guarded"});
    CHECK(guarded.code == 0);
    auto gdoc = parse_document(guarded.out);
    CHECK(gdoc.rules.size() == 3);
}

TEST_CASE("oracle subcommand") {
    TempFile file(print_document(alternating_kb()), "oracle.gbts");
    auto res = run({"oracle", file.path, "--depth", "4"});
    CHECK(res.code == 0);
    CHECK(res.out.find("yes") != std::string::npos);
    auto shallow = run({"oracle", file.path, "--depth", "2"});
    CHECK(shallow.code == 1);
    CHECK(shallow.out.find("no_up_to_depth") != std::string::npos);
}

TEST_CASE("errors exit with code two") {
    auto res = run({"answer", "/nonexistent/file.gbts"});
    CHECK(res.code == 2);
    TempFile bad("@facts p(a,.", "bad.gbts");
    auto parse_err = run({"classify", bad.path});
    CHECK(parse_err.code == 2);
    CHECK(parse_err.err.find("line") != std::string::npos);
}
