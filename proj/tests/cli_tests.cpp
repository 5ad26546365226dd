// Integration checks of the command-line interface: spawns the built binary
// (argv[1]), captures stdout and exit codes, and verifies the JSON shapes,
// the error grades, and byte-identical reruns.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int checks = 0, failures = 0;

void report(bool ok, const std::string& label) {
    ++checks;
    if (!ok) ++failures;
    std::cout << (ok ? "ok   " : "FAIL ") << label << "\n";
}

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& cmd) {
    RunResult r;
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

json parse(const std::string& text) { return json::parse(text, nullptr, false); }

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-compop>\n";
        return 2;
    }
    const std::string cli = argv[1];
    fs::path dir = fs::temp_directory_path() / "compop-cli-tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string t3 = (dir / "t3.json").string();
    const std::string numerek = (dir / "numerek.json").string();

    {
        auto r = run(cli + " example t3 --out " + t3);
        report(r.exit_code == 0 && fs::exists(t3), "example writes a space file");
        auto r2 = run(cli + " example numerek --out " + numerek);
        report(r2.exit_code == 0, "generated example writes registry coordinates");
        auto bad = run(cli + " example no-such-thing");
        report(bad.exit_code == 2, "unknown example is a data error (exit 2)");
    }

    {
        auto r = run(cli + " h --space " + t3 + " --n 1");
        json doc = parse(r.out);
        bool ok = r.exit_code == 0 && doc.contains("rows");
        std::string v1, v3;
        if (ok)
            for (auto& row : doc["rows"]) {
                if (row["n"] == 1 && row["atom"] == "1") v1 = row["value"];
                if (row["n"] == 1 && row["atom"] == "3") v3 = row["value"];
            }
        report(ok && v1 == "2" && v3 == "0", "h table on t3 is (2, 1, 0)");

        auto csv = run(cli + " h --space " + t3 + " --n 1 --format csv");
        report(csv.exit_code == 0 && csv.out.rfind("atom,n,value,certainty", 0) == 0,
               "csv rendering has the header row");
    }

    {
        auto r = run(cli + " classify --space " + numerek + " --window 16 --order 6");
        json doc = parse(r.out);
        bool ok = r.exit_code == 0 && doc.contains("report");
        bool dense = ok && doc["report"]["densely-defined"]["status"] == "holds";
        bool power2 = false;
        if (ok)
            for (auto& entry : doc["report"]["densely-defined-powers"])
                if (entry["n"] == 2)
                    power2 = entry["verdict"]["status"] == "fails" &&
                             entry["verdict"]["witness"]["atoms"][0] == "a(0)";
        report(dense && power2,
               "classify reports dense symbol with non-dense square (witness a(0))");

        auto r2 = run(cli + " classify --space " + numerek + " --window 16 --order 6");
        report(r2.exit_code == 0 && r2.out == r.out, "classify output is byte-identical on rerun");
    }

    {
        auto r = run(cli + " moments --seq 1,2,1");
        json doc = parse(r.out);
        report(r.exit_code == 0 && doc["verdict"] == "rejected" && doc["witness"]["det"] == "-3",
               "moments rejects (1,2,1) with minor determinant -3");

        auto r2 = run(cli + " moments --from-h 1 --space " + t3 + " --order 4");
        json doc2 = parse(r2.out);
        report(r2.exit_code == 0 && doc2["verdict"] == "rejected",
               "the h-moment row of t3 atom 1 is not a Stieltjes truncation");

        auto bad = run(cli + " moments --seq 1,2,1/0");
        report(bad.exit_code == 2, "zero denominator is a data error (exit 2)");
    }

    {
        auto r = run(cli + " validate --space " + numerek + " --window 8");
        json doc = parse(r.out);
        report(r.exit_code == 0 && doc["ok"] == true, "validate accepts the shipped annotations");

        std::string tampered = (dir / "tampered.json").string();
        std::ofstream(tampered) << R"({"kind":"generated","generator":{"name":"numerek",)"
                                << R"("params":{"a0_tail":"2"}}})";
        auto r2 = run(cli + " validate --space " + tampered + " --window 8");
        report(r2.exit_code == 2, "tampered tail annotation fails the cross-check (exit 2)");

        std::string negative = (dir / "negative.json").string();
        std::ofstream(negative)
            << R"({"kind":"finite","atoms":[{"family":"1","mass":"-1/2"}],)"
            << R"("map":[{"from":"1","to":"1"}]})";
        auto r3 = run(cli + " validate --space " + negative);
        report(r3.exit_code == 2, "negative mass is a data error (exit 2)");
    }

    {
        auto r = run(cli + " apply --space " + t3 + " --op cphi --vector '{\"1\": \"1\"}'");
        json doc = parse(r.out);
        report(r.exit_code == 0 && doc["norm-sq"] == "2" && doc["result"]["2"] == "1",
               "apply cphi places values on the preimage");

        auto r2 = run(cli + " apply --space " + numerek +
                      " --op cphi --vector '{\"a(0)\": \"1\"}' --window 16");
        json doc2 = parse(r2.out);
        report(r2.exit_code == 2 && doc2["error"] == "IncompletePreimage" &&
                   doc2["norm-sq"] == "1",
               "infinitely supported image reports its exact norm and exits 2");

        auto r3 = run(cli + " apply --space " + t3 + " --op expect --vector '{\"1\": \"1\"}'");
        json doc3 = parse(r3.out);
        report(r3.exit_code == 0 && doc3["result"]["1"] == "1/2" && doc3["result"]["2"] == "1/2",
               "conditional expectation averages over the class");
    }

    {
        auto r = run(cli + " domains --space " + numerek +
                     " --check inclusion --q1 iterate:3 --q2 power:3 --window 12");
        json doc = parse(r.out);
        report(r.exit_code == 0 && doc["verdict"]["status"] == "fails" &&
                   doc["verdict"]["witness"]["atoms"][0] == "a(0)",
               "domain inclusion check exposes the iterate/power gap");

        std::string part = (dir / "partition-unbounded.json").string();
        run(cli + " example partition --param regime=unbounded --out " + part);
        auto r2 = run(cli + " domains --space " + part + " --check power-eq --n 2 --window 16");
        json doc2 = parse(r2.out);
        report(r2.exit_code == 0 && doc2["verdict"]["status"] == "fails",
               "unbounded partition preset fails power closedness");
    }

    {
        std::string outdir = (dir / "witnesses").string();
        fs::create_directories(outdir);
        auto r = run(cli + " search --predicate '!injective' --budget 40 --seed 1 --out-dir " +
                     outdir);
        json doc = parse(r.out);
        bool ok = r.exit_code == 0 && doc.contains("hits") && !doc["hits"].empty();
        if (ok) {
            std::string file = doc["hits"][0]["file"];
            auto v = run(cli + " validate --space " + file);
            ok = v.exit_code == 0;
        }
        report(ok, "search writes loadable witness space files");
    }

    {
        std::string cmd = cli + " search --predicate 'quasinormal' --budget 60 --seed 3";
        auto r1 = run(cmd);
        auto r2 = run(cmd);
        report(r1.exit_code == 0 && r1.out == r2.out && parse(r1.out).contains("hits"),
               "search output is deterministic per seed");
    }

    {
        auto usage = run(cli + " no-such-subcommand");
        report(usage.exit_code == 1, "unknown subcommand is a usage error (exit 1)");
        auto missing = run(cli + " classify");
        report(missing.exit_code == 1, "missing required option is a usage error (exit 1)");
        auto help = run(cli + " --help");
        report(help.exit_code == 0, "--help exits 0");
    }

    std::cout << checks - failures << "/" << checks << " cli checks passed\n";
    return failures == 0 ? 0 : 1;
}
