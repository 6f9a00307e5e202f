#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "planex/abstraction.hpp"
#include "planex/parser.hpp"
#include "planex/solvers.hpp"

#include "test_util.hpp"

using namespace planex;

namespace {

std::vector<int> all_props(const DomainSpec& d) {
    std::vector<int> ir(static_cast<std::size_t>(d.prop_count()));
    for (std::size_t i = 0; i < ir.size(); ++i) ir[i] = (int)i;
    return ir;
}

// Distribution over clusters induced by one (state, action) of a flat model.
std::map<std::uint32_t, double> cluster_distribution(const FlatMDP& m,
                                                     const HeuristicTable& t,
                                                     std::uint32_t s, int a) {
    std::map<std::uint32_t, double> dist;
    for (const auto& o : m.transitions(s, a))
        dist[t.cluster_of(State{o.state, (std::uint8_t)m.prop_count})] += o.prob;
    return dist;
}

bool distributions_close(const std::map<std::uint32_t, double>& a,
                         const std::map<std::uint32_t, double>& b) {
    if (a.size() != b.size()) return false;
    for (auto it_a = a.begin(), it_b = b.begin(); it_a != a.end();
         ++it_a, ++it_b)
        if (it_a->first != it_b->first ||
            std::abs(it_a->second - it_b->second) > 1e-12)
            return false;
    return true;
}

} // namespace

TEST_CASE("closing on delivered coffee pulls in exactly its support chain") {
    DomainSpec d = testutil::load_domain("coffee_base.mdp");
    int huc = *d.find_prop("HUC");
    RelevantSet r = relevant_closure(d, {huc});

    CHECK(r.immediately_relevant == std::vector<int>{huc});
    CHECK(r.closure == std::vector<int>{0, 4, 5}); // Office, HRC, HUC
    CHECK(r.closure_mask == 49u);

    REQUIRE(r.trace.size() == 2);
    CHECK(r.trace[0].prop == 0);
    CHECK(r.trace[0].action == "DelCoffee");
    CHECK(r.trace[0].discriminant == "{ Office, HRC }");
    CHECK(r.trace[1].prop == 4);
    CHECK(r.trace[1].action == "DelCoffee");
    CHECK(r.trace[1].discriminant == "{ Office, HRC }");
}

TEST_CASE("the two-deliverable world adds the carried-snack interlock") {
    DomainSpec d = testutil::load_domain("coffee_extended.mdp");
    RelevantSet r = relevant_closure(d, {*d.find_prop("HUC")});

    CHECK(r.closure == std::vector<int>{0, 4, 5, 6}); // Office HRC HUC HRS
    CHECK(r.closure_mask == 113u);
    REQUIRE(r.trace.size() == 3);
    CHECK(r.trace[2].prop == 6);
    CHECK(r.trace[2].action == "BuyCoffee");
    CHECK(r.trace[2].discriminant == "{ !Office, !HRS }");
}

TEST_CASE("a closure is a fixpoint and the full set closes to itself") {
    DomainSpec d = testutil::load_domain("coffee_base.mdp");
    RelevantSet r = relevant_closure(d, {*d.find_prop("HUC")});
    RelevantSet again = relevant_closure(d, r.closure);
    CHECK(again.closure == r.closure);
    CHECK(again.trace.empty());

    RelevantSet full = relevant_closure(d, all_props(d));
    CHECK(full.closure == all_props(d));
    CHECK(full.closure_mask == 63u);
    CHECK(full.trace.empty());
}

TEST_CASE("projection keeps the location aspect and sheds the weather one") {
    DomainSpec d = testutil::load_domain("coffee_base.mdp");
    RelevantSet r = relevant_closure(d, {*d.find_prop("HUC")});
    DomainSpec p = project_domain(d, r);

    CHECK(p.propositions == d.propositions);
    CHECK(p.action_count() == d.action_count());

    const ActionSchema& move = p.actions[(std::size_t)*p.find_action("Move")];
    REQUIRE(move.aspects.size() == 1); // rain aspect became pure noise
    CHECK(move.aspects[0].cases.size() == 2);
    CHECK(move.aspects[0].cases[0].effect.branches[0].effect.mentions(0));

    // GetUmbrella only touches dropped propositions, so it keeps a single
    // trivial always-matching case.
    const ActionSchema& get =
        p.actions[(std::size_t)*p.find_action("GetUmbrella")];
    REQUIRE(get.aspects.size() == 1);
    REQUIRE(get.aspects[0].cases.size() == 1);
    CHECK(get.aspects[0].cases[0].discriminant.empty());
    REQUIRE(get.aspects[0].cases[0].effect.branches.size() == 1);
    CHECK(get.aspects[0].cases[0].effect.branches[0].effect.empty());
    CHECK(get.aspects[0].cases[0].effect.branches[0].probability == 1.0);

    const ActionSchema& del =
        p.actions[(std::size_t)*p.find_action("DelCoffee")];
    REQUIRE(del.aspects.size() == 1);
    CHECK(del.aspects[0].cases.size() == 3);

    CHECK(validate(p).empty());
}

TEST_CASE("cases with discriminants outside the closure become one default") {
    // Act writes B only when A holds; the two !A cases split on C but their
    // effects never touch the closure of {B}, which is {A, B}.
    auto r2 = parse_domain(R"(discount 0.9
props A B C

action Act
  aspect
    case { A } => { B } 1.0
    case { !A, C } => { !C } 1.0
    case { !A, !C } => {} 1.0
)");
    REQUIRE(r2.ok());
    DomainSpec d = *r2.domain;
    REQUIRE(validate(d).empty());

    RelevantSet r = relevant_closure(d, {1});
    CHECK(r.closure == std::vector<int>{0, 1}); // C stays outside

    DomainSpec p = project_domain(d, r);
    const ActionAspect& projected = p.actions[0].aspects[0];
    REQUIRE(projected.cases.size() == 2);
    CHECK_FALSE(projected.cases[0].is_default);
    CHECK(projected.cases[0].effect.branches[0].effect.mentions(1));
    CHECK(projected.cases[1].is_default);
    CHECK(projected.cases[1].effect.branches.size() == 1);
    CHECK(projected.cases[1].effect.branches[0].effect.empty());
    CHECK(validate(p).empty());
}

TEST_CASE("projecting onto the full closure is the identity") {
    for (const char* f : {"coffee_base.mdp", "coffee_extended.mdp"}) {
        DomainSpec d = testutil::load_domain(f);
        DomainSpec p = project_domain(d, relevant_closure(d, all_props(d)));
        CHECK_MESSAGE(p == d, f);
        CHECK_MESSAGE(serialize_domain(p) == serialize_domain(d), f);
    }
}

TEST_CASE("the errand heuristic matches its hand-solved abstract model") {
    DomainSpec d = testutil::load_domain("coffee_base.mdp");
    HeuristicTable t = build_heuristic(d, {*d.find_prop("HUC")});

    CHECK(t.prop_count == 6);
    CHECK(t.closure_indices == std::vector<int>{0, 4, 5});
    REQUIRE(t.cluster_count() == 8);
    CHECK(t.vmax == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(t.vmin == 0.0);
    CHECK(t.epsilon == doctest::Approx(1.0).epsilon(1e-9));

    // Cluster index is Office + 2*HRC + 4*HUC. Values solved independently
    // by policy iteration over the 8-cluster midpoint-reward model.
    const double expected[8] = {6.312534542575, 5.728739537895,
                                7.050386562378, 7.797347866377,
                                8.999999999991, 8.999999999991,
                                8.999999999991, 8.999999999991};
    const std::int32_t move = 0, buy = 1, deliver = 3;
    const std::int32_t actions[8] = {buy, move, move, deliver,
                                     move, move, move, move};
    for (std::size_t c = 0; c < 8; ++c) {
        CHECK(t.values[c] == doctest::Approx(expected[c]).epsilon(1e-9));
        CHECK(t.default_actions[c] == actions[c]);
    }

    // Delivery is the greedy default when holding coffee at the office.
    State ready{0b010001, 6};
    CHECK(t.default_action(ready) == deliver);
    CHECK(t.value(ready) == doctest::Approx(expected[3]).epsilon(1e-9));

    // Wetness is abstracted away: states differing only there share a value.
    State dry{0b000001, 6}, wet{0b001001, 6};
    CHECK(t.cluster_of(dry) == t.cluster_of(wet));
    CHECK(t.value(dry) == t.value(wet));
}

TEST_CASE("the extended heuristic keeps its documented shape") {
    DomainSpec d = testutil::load_domain("coffee_extended.mdp");
    HeuristicTable t = build_heuristic(d, {*d.find_prop("HUC")});
    CHECK(t.closure_indices == std::vector<int>{0, 4, 5, 6});
    CHECK(t.cluster_count() == 16);
    CHECK(t.vmax == doctest::Approx(16.5).epsilon(1e-12));
    CHECK(t.vmin == 0.0);
    CHECK(t.epsilon == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("heuristic values respect the advertised error bound") {
    for (const char* f : {"coffee_base.mdp", "coffee_extended.mdp"}) {
        DomainSpec d = testutil::load_domain(f);
        FlatMDP m = ground(d);
        auto [policy, optimal, report] = policy_iteration(m);
        HeuristicTable t = build_heuristic(d, {*d.find_prop("HUC")});
        double worst = 0.0;
        for (std::uint32_t s = 0; s < m.num_states; ++s) {
            double v = t.value(State{s, (std::uint8_t)m.prop_count});
            CHECK(v >= t.vmin - 1e-12);
            CHECK(v <= t.vmax + 1e-12);
            worst = std::max(worst, std::abs(v - optimal[s]));
        }
        CHECK_MESSAGE(worst <= t.epsilon + 1e-9, f);
    }
}

TEST_CASE("refining the relevant set never loosens the bound") {
    DomainSpec base = testutil::load_domain("coffee_base.mdp");
    HeuristicTable b1 = build_heuristic(base, {5});
    HeuristicTable b2 = build_heuristic(base, {5, 3}); // adds Wet
    CHECK(b1.epsilon == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b2.epsilon == 0.0); // Wet drags in the whole weather machinery
    CHECK(b2.cluster_count() == 64);

    DomainSpec ext = testutil::load_domain("coffee_extended.mdp");
    HeuristicTable e1 = build_heuristic(ext, {5});
    HeuristicTable e2 = build_heuristic(ext, {5, 7}); // adds HUS
    HeuristicTable e3 = build_heuristic(ext, all_props(ext));
    CHECK(e1.epsilon == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(e2.epsilon == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(e3.epsilon == 0.0);
    CHECK(e2.cluster_count() == 32);
    CHECK(e3.cluster_count() == 256);
    CHECK(e1.epsilon >= e2.epsilon);
    CHECK(e2.epsilon >= e3.epsilon);
}

TEST_CASE("the identity abstraction reproduces the exact optimum") {
    DomainSpec d = testutil::load_domain("coffee_base.mdp");
    HeuristicTable t = build_heuristic(d, all_props(d));
    FlatMDP m = ground(d);
    auto [policy, optimal, report] = policy_iteration(m);
    CHECK(t.epsilon == 0.0);
    for (std::uint32_t s = 0; s < m.num_states; ++s)
        CHECK(t.value(State{s, 6}) ==
              doctest::Approx(optimal[s]).epsilon(1e-9));
}

TEST_CASE("same-cluster states transition to identical cluster mixes") {
    for (const char* f : {"coffee_base.mdp", "coffee_extended.mdp"}) {
        DomainSpec d = testutil::load_domain(f);
        RelevantSet r = relevant_closure(d, {*d.find_prop("HUC")});
        HeuristicTable t = build_heuristic(d, {*d.find_prop("HUC")});
        FlatMDP projected = ground(project_domain(d, r));

        std::map<std::uint32_t, std::uint32_t> representative;
        for (std::uint32_t s = 0; s < projected.num_states; ++s) {
            State st{s, (std::uint8_t)projected.prop_count};
            auto [it, fresh] =
                representative.try_emplace(t.cluster_of(st), s);
            if (fresh) continue;
            for (int a = 0; a < projected.num_actions; ++a)
                CHECK(distributions_close(
                    cluster_distribution(projected, t, s, a),
                    cluster_distribution(projected, t, it->second, a)));
        }
    }
}

TEST_CASE("reward impact ranks the deliverables above the nuisance facts") {
    DomainSpec base = testutil::load_domain("coffee_base.mdp");
    auto rb = rank_reward_props(base);
    REQUIRE(rb.size() == 6);
    CHECK(rb[0].first == 5); // HUC
    CHECK(rb[0].second == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(rb[1].first == 3); // Wet
    CHECK(rb[1].second == doctest::Approx(0.2).epsilon(1e-12));
    for (std::size_t i = 2; i < rb.size(); ++i) CHECK(rb[i].second == 0.0);
    CHECK(rb[2].first == 0); // zero-impact props keep declaration order

    DomainSpec ext = testutil::load_domain("coffee_extended.mdp");
    auto re = rank_reward_props(ext);
    REQUIRE(re.size() == 8);
    CHECK(re[0].first == 5); // HUC
    CHECK(re[1].first == 7); // HUS
    CHECK(re[1].second == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(re[2].first == 3); // Wet
    CHECK(re[2].second == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(re[3].first == 6); // HRS
    CHECK(re[3].second == doctest::Approx(0.05).epsilon(1e-12));
}
