#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "ucbmo/envs.hpp"
#include "ucbmo/solver.hpp"

using namespace ucbmo;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {
std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("ucbmo_envs_" + name)).string();
}
}  // namespace

TEST_CASE("the 3-state gridworld matches its hand-written tables") {
    const MdpSpec spec = gridworld_1d();
    REQUIRE(spec.num_states == 3);
    REQUIRE(spec.num_actions == 2);
    REQUIRE(spec.horizon == 3);

    // Successor of each (state, action) and the two rewarding moves, written
    // out directly: left wall at state 0, right wall at state 2, and reward 1
    // exactly for the two moves that land in state 2.
    const int successor[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int h = 0; h < 3; ++h) {
        for (int x = 0; x < 3; ++x) {
            for (int a = 0; a < 2; ++a) {
                for (int y = 0; y < 3; ++y)
                    REQUIRE(spec.p(h, x, a, y) == (y == successor[x][a] ? 1.0 : 0.0));
                const bool rewarding = (x == 1 && a == 1) || (x == 2 && a == 1);
                REQUIRE(spec.r(h, x, a) == (rewarding ? 1.0 : 0.0));
            }
        }
    }
    for (int x = 0; x < 3; ++x) REQUIRE(spec.initial_dist[static_cast<std::size_t>(x)] == 1.0 / 3.0);
    CHECK(validate_mdp(spec).ok());
}

TEST_CASE("chain of length 3 with horizon 3 reproduces the gridworld") {
    const MdpSpec chain = chain_mdp(3, 3);
    const MdpSpec grid = gridworld_1d();
    CHECK(chain.transitions == grid.transitions);
    CHECK(chain.rewards == grid.rewards);
    CHECK(chain.initial_dist == grid.initial_dist);
}

TEST_CASE("chain values agree with brute-force action-sequence search") {
    // The chain is deterministic, so a fixed start state reduces planning to
    // picking the best of the 2^H open-loop action sequences. That search
    // shares nothing with the backward-induction code path.
    const MdpSpec spec = chain_mdp(5, 6);
    REQUIRE(validate_mdp(spec).ok());
    const ValueTables best = solve_optimal(spec);

    auto successor = [&spec](int h, int x, int a) {
        for (int y = 0; y < spec.num_states; ++y)
            if (spec.p(h, x, a, y) > 0.5) return y;
        FAIL("no successor with probability 1");
        return -1;
    };
    for (int start = 0; start < 5; ++start) {
        double best_total = 0.0;
        for (unsigned seq = 0; seq < (1u << 6); ++seq) {
            int x = start;
            double total = 0.0;
            for (int h = 0; h < 6; ++h) {
                const int a = static_cast<int>((seq >> h) & 1u);
                total += spec.r(h, x, a);
                x = successor(h, x, a);
            }
            best_total = std::max(best_total, total);
        }
        REQUIRE_THAT(best.v_at(0, start), WithinAbs(best_total, 1e-12));
    }
    // From the far end the agent reaches the rewarding wall after 4 moves
    // and then collects on the remaining 2 steps plus the arrival move.
    CHECK(best.v_at(0, 0) == 3.0);
    CHECK(best.v_at(0, 4) == 6.0);
}

TEST_CASE("a 2-state chain rewards every step under the best policy") {
    const MdpSpec spec = chain_mdp(2, 4);
    REQUIRE(validate_mdp(spec).ok());
    const ValueTables best = solve_optimal(spec);
    CHECK(best.v_at(0, 0) == 4.0);
    CHECK(best.v_at(0, 1) == 4.0);
}

TEST_CASE("chain construction validates its arguments") {
    CHECK_THROWS_AS(chain_mdp(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(chain_mdp(3, 0), std::invalid_argument);
    CHECK(validate_mdp(chain_mdp(7, 5)).ok());
}

TEST_CASE("random instances are a pure function of the seed") {
    const MdpSpec a = random_mdp(42, 3, 2, 4);
    const MdpSpec b = random_mdp(42, 3, 2, 4);
    CHECK(a.transitions == b.transitions);
    CHECK(a.rewards == b.rewards);
    CHECK(a.initial_dist == b.initial_dist);

    const MdpSpec c = random_mdp(43, 3, 2, 4);
    CHECK(a.transitions != c.transitions);
}

TEST_CASE("random instances validate across many seeds and shapes") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const int S = 2 + static_cast<int>(seed % 4);
        const int A = 2 + static_cast<int>(seed % 3);
        const int H = 1 + static_cast<int>(seed % 5);
        const MdpSpec spec = random_mdp(seed, S, A, H);
        REQUIRE(validate_mdp(spec).ok());
    }
}

TEST_CASE("random rewards are exact multiples of 1e-6") {
    const MdpSpec spec = random_mdp(7, 4, 3, 5);
    for (double r : spec.rewards) {
        const double scaled = r * 1e6;
        REQUIRE(std::abs(scaled - std::round(scaled)) < 1e-6);
        REQUIRE(r >= 0.0);
        REQUIRE(r <= 1.0);
    }
}

TEST_CASE("random generation rejects degenerate shapes") {
    CHECK_THROWS_AS(random_mdp(1, 0, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(random_mdp(1, 2, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(random_mdp(1, 2, 2, 0), std::invalid_argument);
}

TEST_CASE("recipe strings parse into the matching generators") {
    SECTION("gridworld and its alias") {
        for (const char* text : {"gridworld3", "gridworld"}) {
            const EnvRecipe recipe = parse_recipe(text);
            CHECK(recipe.kind == EnvKind::Gridworld1D);
            const MdpSpec spec = make_env(recipe);
            CHECK(spec.transitions == gridworld_1d().transitions);
        }
    }
    SECTION("chain with explicit size and horizon") {
        const EnvRecipe recipe = parse_recipe("chain:S=5,H=6");
        CHECK(recipe.kind == EnvKind::Chain);
        CHECK(recipe.num_states == 5);
        CHECK(recipe.horizon == 6);
        CHECK(make_env(recipe).transitions == chain_mdp(5, 6).transitions);
    }
    SECTION("seeded random instance") {
        const EnvRecipe recipe = parse_recipe("random:seed=7,S=3,A=2,H=3");
        CHECK(recipe.kind == EnvKind::Random);
        CHECK(recipe.seed == 7);
        CHECK(recipe.num_states == 3);
        CHECK(recipe.num_actions == 2);
        CHECK(recipe.horizon == 3);
        CHECK(make_env(recipe).transitions == random_mdp(7, 3, 2, 3).transitions);
    }
}

TEST_CASE("malformed recipes are rejected with pointed messages") {
    CHECK_THROWS_MATCHES(parse_recipe("volcano:S=3"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("unknown env recipe")));
    CHECK_THROWS_MATCHES(parse_recipe("chain:S=5"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("missing 'H'")));
    CHECK_THROWS_MATCHES(parse_recipe("chain:S=5,H=6,S=7"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("duplicate key 'S'")));
    CHECK_THROWS_MATCHES(parse_recipe("chain:S=5,H=6,Q=2"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("unknown key 'Q'")));
    CHECK_THROWS_MATCHES(parse_recipe("chain:S=x,H=6"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("non-negative integer")));
    CHECK_THROWS_MATCHES(parse_recipe("chain:S=-1,H=6"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("non-negative integer")));
    CHECK_THROWS_MATCHES(parse_recipe("chain:S=,H=6"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("key=value")));
    CHECK_THROWS_MATCHES(parse_recipe("chain:S=2000000,H=1"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("implausibly large")));
    CHECK_THROWS_MATCHES(parse_recipe("random:S=2,A=2,H=3"), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("missing 'seed'")));
    CHECK_THROWS_AS(parse_recipe("gridworld3:S=3"), std::invalid_argument);
}

TEST_CASE("environment resolution prefers files and falls back to recipes") {
    SECTION("a recipe string builds the environment directly") {
        const MdpSpec spec = resolve_env("chain:S=4,H=2");
        CHECK(spec.num_states == 4);
        CHECK(spec.horizon == 2);
    }
    SECTION("an existing file round-trips through the loader") {
        const std::string path = temp_path("roundtrip.json");
        save_mdp(gridworld_1d(), path);
        const MdpSpec spec = resolve_env(path);
        CHECK(spec.transitions == gridworld_1d().transitions);
        std::filesystem::remove(path);
    }
    SECTION("a file holding an invalid spec is rejected") {
        MdpSpec broken = gridworld_1d();
        broken.p(0, 0, 0, 0) = 0.4;  // row now sums to 0.4
        const std::string path = temp_path("broken.json");
        save_mdp(broken, path);
        CHECK_THROWS_MATCHES(resolve_env(path), std::invalid_argument,
                             Catch::Matchers::MessageMatches(ContainsSubstring("is invalid")));
        std::filesystem::remove(path);
    }
    SECTION("text that is neither file nor recipe is rejected") {
        CHECK_THROWS_AS(resolve_env("no/such/file.json"), std::invalid_argument);
    }
}
