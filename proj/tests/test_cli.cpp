#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include "planex/json_io.hpp"

#include "test_util.hpp"

using nlohmann::json;

namespace {

#ifndef PLANEX_CLI_PATH
#error "PLANEX_CLI_PATH must point at the planner binary"
#endif

struct RunOutput {
    int status = -1;
    std::string out;
};

// Runs the planner through the shell; `extra` may redirect stderr.
RunOutput cli(const std::string& args, const std::string& env = "") {
    std::string command = env.empty() ? "" : env + " ";
    command += std::string("\"") + PLANEX_CLI_PATH + "\" " + args;
    RunOutput r;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        r.out.append(buf.data(), n);
    int rc = pclose(pipe);
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

std::string quoted_domain(const std::string& file) {
    return "--domain \"" + testutil::domain_path(file) + "\"";
}

std::string temp_file(const std::string& tag) {
    return "/tmp/planex_cli_" + std::to_string(::getpid()) + "_" + tag;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text) {
    return json::parse(text);
}

void scrub_timing(json& j) {
    if (j.is_object()) {
        j.erase("elapsed_seconds");
        for (auto& [key, value] : j.items()) scrub_timing(value);
    } else if (j.is_array()) {
        for (auto& value : j) scrub_timing(value);
    }
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

TEST_CASE("validate accepts the bundled domains") {
    auto r = cli("validate " + quoted_domain("coffee_base.mdp") + " 2>/dev/null");
    CHECK(r.status == 0);
    CHECK(r.out.find("ok (6 propositions, 5 actions)") != std::string::npos);

    auto j = cli("validate --json " + quoted_domain("coffee_extended.mdp") +
                 " 2>/dev/null");
    CHECK(j.status == 0);
    json doc = parse_json(j.out);
    CHECK(doc["ok"] == true);
    CHECK(doc["propositions"] == 8);
    CHECK(doc["actions"] == 7);
    CHECK(doc["violations"].empty());
}

TEST_CASE("validate rejects bad probabilities and bad structure separately") {
    std::string parse_bad = temp_file("parse.mdp");
    write_file(parse_bad, "discount 0.9\nprops A\naction Go\n  aspect\n"
                          "    case default => { A } 1.5\n");
    auto r1 = cli("validate --domain \"" + parse_bad + "\" 2>/dev/null");
    CHECK(r1.status == 1);
    CHECK(r1.out.find("bad-probability") != std::string::npos);

    std::string sum_bad = temp_file("sum.mdp");
    write_file(sum_bad, "discount 0.9\nprops A\naction Go\n  aspect\n"
                        "    case default => { A } 0.5 | {} 0.4\n");
    auto r2 = cli("validate --domain \"" + sum_bad + "\" 2>/dev/null");
    CHECK(r2.status == 1);
    CHECK(r2.out.find("invalid:") != std::string::npos);

    std::remove(parse_bad.c_str());
    std::remove(sum_bad.c_str());
}

TEST_CASE("a missing domain file is a usage error") {
    auto r = cli("validate --domain /nonexistent/nowhere.mdp 2>/dev/null");
    CHECK(r.status == 2);
}

TEST_CASE("an unknown flag is a usage error") {
    auto r = cli("plan " + quoted_domain("coffee_base.mdp") +
                 " --bogus 2>/dev/null");
    CHECK(r.status == 2);
}

TEST_CASE("both exact solvers agree through the command line") {
    auto pi = cli("solve --method pi " + quoted_domain("chain2.mdp") +
                  " 2>/dev/null");
    auto vi = cli("solve --method vi " + quoted_domain("chain2.mdp") +
                  " 2>/dev/null");
    REQUIRE(pi.status == 0);
    REQUIRE(vi.status == 0);
    json a = parse_json(pi.out), b = parse_json(vi.out);
    CHECK(a["num_states"] == 2);
    CHECK(a["values"][0].get<double>() == doctest::Approx(9.0).epsilon(1e-6));
    CHECK(a["values"][1].get<double>() == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(a["policy"][0] == "advance");
    for (int s = 0; s < 2; ++s)
        CHECK(a["values"][s].get<double>() ==
              doctest::Approx(b["values"][s].get<double>()).epsilon(1e-6));

    auto single = cli("solve " + quoted_domain("single.mdp") + " 2>/dev/null");
    REQUIRE(single.status == 0);
    json sj = parse_json(single.out);
    CHECK(sj["values"].size() == 1);
    CHECK(sj["values"][0].get<double>() == doctest::Approx(10.0).epsilon(1e-6));

    auto ext = cli("solve " + quoted_domain("coffee_extended.mdp") +
                   " 2>/dev/null");
    REQUIRE(ext.status == 0);
    CHECK(parse_json(ext.out)["values"].size() == 256);
}

TEST_CASE("the heuristic report carries the closure story and a file hash") {
    auto r = cli("heuristic " + quoted_domain("coffee_base.mdp") +
                 " 2>/dev/null");
    REQUIRE(r.status == 0);
    json doc = parse_json(r.out);
    CHECK(doc["immediately_relevant"] == json::array({"HUC"}));
    CHECK(doc["closure"] == json::array({"Office", "HRC", "HUC"}));
    CHECK(doc["epsilon"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(doc["vmax"].get<double>() == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(doc["clusters"].size() == 8);
    CHECK(doc["trace"].size() == 2);
    CHECK(doc["trace"][0]["action"] == "DelCoffee");

    std::string bytes = slurp(testutil::domain_path("coffee_base.mdp"));
    CHECK(doc["manifest"]["domain_hash"] == planex::fnv1a64_hex(bytes));
    CHECK(doc["manifest"]["command"] == "heuristic");
}

TEST_CASE("the identity relevant set yields a zero-error heuristic") {
    auto r = cli("heuristic --ir Office,Rain,Umbrella,Wet,HRC,HUC " +
                 quoted_domain("coffee_base.mdp") + " 2>/dev/null");
    REQUIRE(r.status == 0);
    json doc = parse_json(r.out);
    CHECK(doc["epsilon"].get<double>() == 0.0);
    CHECK(doc["clusters"].size() == 64);
}

TEST_CASE("an unknown relevant proposition is a domain error") {
    auto r = cli("heuristic --ir Tea " + quoted_domain("coffee_base.mdp") +
                 " 2>/dev/null");
    CHECK(r.status == 1);
}

TEST_CASE("planning at the hardest start goes for the umbrella first") {
    auto r = cli("plan --depth 4 --state "
                 "'Office,Rain,!Umbrella,!Wet,!HRC,!HUC,!HRS,!HUS' " +
                 quoted_domain("coffee_extended.mdp") + " 2>/dev/null");
    REQUIRE(r.status == 0);
    json doc = parse_json(r.out);
    CHECK(doc["action"] == "GetUmbrella");
    CHECK(doc["stats"]["nodes_expanded"].get<long long>() > 0);
    CHECK(doc["manifest"]["parameters"]["depth"] == 4);
}

TEST_CASE("a depth-zero plan is the heuristic's table reaction") {
    auto r = cli("plan --depth 0 " + quoted_domain("coffee_base.mdp") +
                 " 2>/dev/null");
    REQUIRE(r.status == 0);
    json doc = parse_json(r.out);
    CHECK(doc["action"] == "Move"); // init: in the office, holding nothing
    CHECK(doc["stats"]["nodes_expanded"] == 0);
}

TEST_CASE("an incomplete or unknown start state is rejected") {
    auto incomplete = cli("plan --state 'Office' " +
                          quoted_domain("coffee_base.mdp") + " 2>/dev/null");
    CHECK(incomplete.status == 1);
    auto unknown = cli("plan --state 'Tea,Office,Rain,!Umbrella,!Wet,!HRC' " +
                       quoted_domain("coffee_base.mdp") + " 2>/dev/null");
    CHECK(unknown.status == 1);
}

TEST_CASE("disabling the prunings keeps the decision and adds work") {
    std::string base = "plan --depth 3 " + quoted_domain("coffee_base.mdp");
    auto pruned = cli(base + " 2>/dev/null");
    auto full = cli(base +
                    " --no-utility-pruning --no-expectation-pruning"
                    " --no-memo 2>/dev/null");
    REQUIRE(pruned.status == 0);
    REQUIRE(full.status == 0);
    json p = parse_json(pruned.out), f = parse_json(full.out);
    CHECK(p["action"] == f["action"]);
    CHECK(p["value"].get<double>() ==
          doctest::Approx(f["value"].get<double>()).epsilon(1e-12));
    CHECK(p["stats"]["nodes_expanded"].get<long long>() <
          f["stats"]["nodes_expanded"].get<long long>());
    CHECK(f["stats"]["utility_cuts"] == 0);
    CHECK(f["stats"]["expectation_cuts"] == 0);
}

TEST_CASE("threshold expansion is reachable from the command line") {
    auto r = cli("plan --threshold 0.05 --depth-cap 3 " +
                 quoted_domain("coffee_base.mdp") + " 2>/dev/null");
    REQUIRE(r.status == 0);
    json doc = parse_json(r.out);
    CHECK(doc["manifest"]["parameters"]["threshold"].get<double>() == 0.05);
    CHECK(doc["stats"]["nodes_expanded"].get<long long>() > 0);
}

TEST_CASE("episodes replay exactly for a fixed seed") {
    std::string args = "run --depth 2 --steps 8 --seed 123 " +
                       quoted_domain("coffee_base.mdp") + " 2>/dev/null";
    auto a = cli(args);
    auto b = cli(args);
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    json ja = parse_json(a.out), jb = parse_json(b.out);
    scrub_timing(ja);
    scrub_timing(jb);
    CHECK(ja == jb);
    CHECK(ja["seed"] == 123);
    CHECK(ja["steps"].size() == 8);
    CHECK(ja["termination"] == "step_limit");
}

TEST_CASE("the trajectory is unchanged when the cache is disabled") {
    std::string base = "run --depth 2 --steps 8 --seed 5 " +
                       quoted_domain("coffee_base.mdp");
    auto cached = cli(base + " 2>/dev/null");
    auto plain = cli(base + " --no-cache 2>/dev/null");
    REQUIRE(cached.status == 0);
    REQUIRE(plain.status == 0);
    json jc = parse_json(cached.out), jp = parse_json(plain.out);
    CHECK(jc["discounted_return"] == jp["discounted_return"]);
    REQUIRE(jc["steps"].size() == jp["steps"].size());
    for (std::size_t i = 0; i < jc["steps"].size(); ++i) {
        CHECK(jc["steps"][i]["state"] == jp["steps"][i]["state"]);
        CHECK(jc["steps"][i]["action"] == jp["steps"][i]["action"]);
        CHECK(jc["steps"][i]["outcome"] == jp["steps"][i]["outcome"]);
        CHECK(jp["steps"][i]["cache_hit"] == false);
    }
    CHECK(jp["total_searches"].get<long long>() >=
          jc["total_searches"].get<long long>());
}

TEST_CASE("goal-flavoured runs stop when the errand is done") {
    auto r = cli("run --depth 3 --steps 60 --seed 4 " +
                 quoted_domain("coffee_goal.mdp") + " 2>/dev/null");
    REQUIRE(r.status == 0);
    json doc = parse_json(r.out);
    if (doc["termination"] == "goal") {
        std::string final_state = doc["final_state"].get<std::string>();
        CHECK(final_state.find(" HUC") != std::string::npos);
        CHECK(final_state.find("!HUC") == std::string::npos);
    } else {
        CHECK(doc["steps"].size() == 60);
    }
}

TEST_CASE("the sweep table reports the frozen error counts as csv") {
    auto r = cli("sweep --format csv " + quoted_domain("coffee_base.mdp") +
                 " 2>/dev/null");
    REQUIRE(r.status == 0);
    auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 7); // manifest comment, header, five depths
    CHECK(lines[0].rfind("# manifest: {", 0) == 0);
    CHECK(lines[1] == planex::kSweepCsvHeader);

    const int expected_errors[5] = {8, 4, 4, 4, 0};
    for (int i = 0; i < 5; ++i) {
        std::istringstream row(lines[(std::size_t)i + 2]);
        std::string field;
        std::getline(row, field, ',');
        CHECK(field == std::to_string(i + 1));
        std::getline(row, field, ',');
        CHECK(field == std::to_string(expected_errors[i]));
    }

    json manifest = parse_json(lines[0].substr(std::string("# manifest: ").size()));
    CHECK(manifest["command"] == "sweep");
    CHECK(manifest["parameters"]["depths"] == json::array({1, 2, 3, 4, 5}));
}

TEST_CASE("the sweep json agrees with its csv twin") {
    auto c = cli("sweep --format csv --depths 1,3 " +
                 quoted_domain("coffee_base.mdp") + " 2>/dev/null");
    auto j = cli("sweep --depths 1,3 " + quoted_domain("coffee_base.mdp") +
                 " 2>/dev/null");
    REQUIRE(c.status == 0);
    REQUIRE(j.status == 0);
    json doc = parse_json(j.out);
    auto lines = lines_of(c.out);
    REQUIRE(doc["rows"].size() == 2);
    REQUIRE(lines.size() == 4);
    for (std::size_t i = 0; i < 2; ++i) {
        const json& row = doc["rows"][i];
        std::string expect = std::to_string(row["depth"].get<int>()) + "," +
                             std::to_string(row["num_errors"].get<int>()) + ",";
        CHECK(lines[i + 2].rfind(expect, 0) == 0);
    }
}

TEST_CASE("the bench table has four rows per shallow depth") {
    auto r = cli("bench --format csv --depths 1,2 --steps 5 " +
                 quoted_domain("coffee_base.mdp") + " 2>/dev/null");
    REQUIRE(r.status == 0);
    auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 10); // manifest, header, 2 depths x 4 rows
    CHECK(lines[1] == planex::kBenchCsvHeader);
    for (std::size_t i = 2; i < lines.size(); ++i) {
        CHECK(lines[i].find("search_") != std::string::npos);
        // percent_states_searched is the last field and is a percentage.
        auto comma = lines[i].rfind(',');
        double pct = std::stod(lines[i].substr(comma + 1));
        CHECK(pct > 0.0);
        CHECK(pct <= 100.0);
    }
}

TEST_CASE("results can be written to a file instead of stdout") {
    std::string out = temp_file("solve.json");
    auto r = cli("solve --out \"" + out + "\" " + quoted_domain("chain2.mdp") +
                 " 2>/dev/null");
    REQUIRE(r.status == 0);
    CHECK(r.out.empty());
    json doc = parse_json(slurp(out));
    CHECK(doc["values"].size() == 2);
    std::remove(out.c_str());
}

TEST_CASE("the state cap environment variable is honoured and sanity-checked") {
    auto blocked = cli("solve " + quoted_domain("coffee_base.mdp") +
                       " 2>&1", "PLANNER_STATE_CAP=4");
    CHECK(blocked.status == 1);
    CHECK(blocked.out.find("error:") != std::string::npos);

    auto warned = cli("solve " + quoted_domain("single.mdp") + " 2>&1",
                      "PLANNER_STATE_CAP=banana");
    CHECK(warned.status == 0);
    CHECK(warned.out.find("warning: ignoring malformed PLANNER_STATE_CAP") !=
          std::string::npos);
}
