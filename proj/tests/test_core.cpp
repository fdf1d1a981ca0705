#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ucbmo/envs.hpp"
#include "ucbmo/mdp.hpp"
#include "ucbmo/rng.hpp"

using namespace ucbmo;

TEST_CASE("splitmix64 matches the published reference sequence") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xE220A8397B1DCDAFULL);
    CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ULL);
    CHECK(splitmix64(state) == 0x06C45D188009454FULL);
}

TEST_CASE("fnv1a64 matches the published reference values") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
    CHECK(fnv1a64("UCBH") == 0x1A6121EFB3921A1BULL);
}

TEST_CASE("identical (seed, stream_id) reproduces the identical sequence") {
    RngStream a(123456789, 42);
    RngStream b(123456789, 42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream ids give distinct sequences") {
    RngStream a(123456789, 1);
    RngStream b(123456789, 2);
    int differing = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() != b.next_u64()) ++differing;
    CHECK(differing == 64);
}

TEST_CASE("next_double stays in [0, 1) and looks uniform") {
    RngStream rng(2024, 7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("next_below covers every bucket roughly evenly") {
    RngStream rng(99, 3);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const int k = rng.next_below(7);
        REQUIRE(k >= 0);
        REQUIRE(k < 7);
        ++counts[static_cast<std::size_t>(k)];
    }
    for (int c : counts)
        CHECK_THAT(static_cast<double>(c) / n, Catch::Matchers::WithinAbs(1.0 / 7, 0.02));
}

namespace {

MdpSpec tiny_two_state() {
    // Two states, one action: state 0 flips a fair coin, state 1 is
    // absorbing with reward 1.
    MdpSpec spec;
    spec.num_states = 2;
    spec.num_actions = 1;
    spec.horizon = 2;
    spec.transitions.assign(2 * 2 * 1 * 2, 0.0);
    spec.rewards.assign(2 * 2 * 1, 0.0);
    spec.initial_dist = {1.0, 0.0};
    for (int h = 0; h < 2; ++h) {
        spec.p(h, 0, 0, 0) = 0.5;
        spec.p(h, 0, 0, 1) = 0.5;
        spec.p(h, 1, 0, 1) = 1.0;
        spec.r(h, 1, 0) = 1.0;
    }
    return spec;
}

}  // namespace

TEST_CASE("validate_mdp accepts the gridworld") {
    CHECK(validate_mdp(gridworld_1d()).ok());
}

TEST_CASE("validate_mdp flags a reward outside [0, 1]") {
    MdpSpec spec = gridworld_1d();
    spec.r(0, 0, 0) = 1.5;
    const ValidationReport report = validate_mdp(spec);
    REQUIRE_FALSE(report.ok());
    CHECK(report.to_string().find("reward") != std::string::npos);
}

TEST_CASE("validate_mdp flags a non-stochastic transition row") {
    MdpSpec spec = gridworld_1d();
    spec.p(1, 1, 1, 2) = 0.9;  // row now sums to 0.9
    const ValidationReport report = validate_mdp(spec);
    REQUIRE_FALSE(report.ok());
    CHECK(report.to_string().find("stochastic") != std::string::npos);
}

TEST_CASE("validate_mdp flags negative probabilities and a bad initial distribution") {
    MdpSpec spec = gridworld_1d();
    spec.p(0, 0, 0, 0) = -0.25;
    spec.p(0, 0, 0, 1) = 1.25;  // row still sums to 1
    CHECK_FALSE(validate_mdp(spec).ok());

    MdpSpec spec2 = gridworld_1d();
    spec2.initial_dist = {0.5, 0.5, 0.5};
    CHECK_FALSE(validate_mdp(spec2).ok());
}

TEST_CASE("validate_mdp flags shape mismatches") {
    MdpSpec spec = gridworld_1d();
    spec.rewards.pop_back();
    CHECK_FALSE(validate_mdp(spec).ok());

    MdpSpec spec2 = gridworld_1d();
    spec2.num_states = 4;  // tables still sized for 3
    CHECK_FALSE(validate_mdp(spec2).ok());
}

TEST_CASE("degenerate initial distributions always yield their mass point") {
    MdpSpec spec = gridworld_1d();

    spec.initial_dist = {1.0, 0.0, 0.0};
    RngStream rng(5, 5);
    for (int i = 0; i < 200; ++i) REQUIRE(sample_initial_state(spec, rng) == 0);

    spec.initial_dist = {0.0, 0.0, 1.0};
    RngStream rng2(5, 6);
    for (int i = 0; i < 200; ++i) REQUIRE(sample_initial_state(spec, rng2) == 2);
}

TEST_CASE("uniform initial distribution sampling is empirically uniform") {
    const MdpSpec spec = gridworld_1d();
    RngStream rng(11, 17);
    std::vector<int> counts(3, 0);
    const int n = 30000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_initial_state(spec, rng))];
    for (int c : counts)
        CHECK_THAT(static_cast<double>(c) / n, Catch::Matchers::WithinAbs(1.0 / 3, 0.02));
}

TEST_CASE("step returns the table reward and follows deterministic transitions") {
    const MdpSpec spec = gridworld_1d();
    RngStream rng(1, 1);

    const StepOutcome right_from_middle = step(spec, 1, 1, 0, rng);
    CHECK(right_from_middle.next_state == 2);
    CHECK(right_from_middle.reward == 1.0);

    const StepOutcome left_at_wall = step(spec, 0, 0, 1, rng);
    CHECK(left_at_wall.next_state == 0);
    CHECK(left_at_wall.reward == 0.0);
}

TEST_CASE("step samples stochastic rows with the right frequencies") {
    const MdpSpec spec = tiny_two_state();
    RngStream rng(2, 9);
    int to_one = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        if (step(spec, 0, 0, 0, rng).next_state == 1) ++to_one;
    CHECK_THAT(static_cast<double>(to_one) / n, Catch::Matchers::WithinAbs(0.5, 0.02));
}

TEST_CASE("step reward never depends on the sampled successor") {
    const MdpSpec spec = tiny_two_state();
    RngStream rng(3, 4);
    for (int i = 0; i < 100; ++i) REQUIRE(step(spec, 0, 0, 1, rng).reward == 0.0);
}

TEST_CASE("step with identical rng state is deterministic") {
    const MdpSpec spec = tiny_two_state();
    RngStream a(77, 8);
    RngStream b(77, 8);
    for (int i = 0; i < 500; ++i) {
        const StepOutcome oa = step(spec, 0, 0, 0, a);
        const StepOutcome ob = step(spec, 0, 0, 0, b);
        REQUIRE(oa.next_state == ob.next_state);
        REQUIRE(oa.reward == ob.reward);
    }
}

TEST_CASE("step rejects out-of-range indices") {
    const MdpSpec spec = gridworld_1d();
    RngStream rng(1, 1);
    CHECK_THROWS_AS(step(spec, 3, 0, 0, rng), std::out_of_range);
    CHECK_THROWS_AS(step(spec, 0, 2, 0, rng), std::out_of_range);
    CHECK_THROWS_AS(step(spec, 0, 0, 3, rng), std::out_of_range);
    CHECK_THROWS_AS(step(spec, -1, 0, 0, rng), std::out_of_range);
}

TEST_CASE("any spec passing validation survives heavy sampling") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const MdpSpec spec = random_mdp(seed, 4, 3, 3);
        REQUIRE(validate_mdp(spec).ok());
        RngStream rng(seed, 1000 + seed);
        int x = sample_initial_state(spec, rng);
        for (int k = 0; k < 50; ++k) {
            for (int h = 0; h < spec.horizon; ++h) {
                const StepOutcome outcome =
                    step(spec, x, static_cast<int>(rng.next_below(spec.num_actions)), h, rng);
                REQUIRE(outcome.next_state >= 0);
                REQUIRE(outcome.next_state < spec.num_states);
                x = outcome.next_state;
            }
            x = sample_initial_state(spec, rng);
        }
    }
}

TEST_CASE("mdp json round-trip preserves every value exactly") {
    const MdpSpec original = random_mdp(99, 3, 2, 4);
    const auto path = std::filesystem::temp_directory_path() / "ucbmo_test_mdp_roundtrip.json";
    save_mdp(original, path.string());
    const MdpSpec loaded = load_mdp(path.string());
    std::filesystem::remove(path);

    CHECK(loaded.num_states == original.num_states);
    CHECK(loaded.num_actions == original.num_actions);
    CHECK(loaded.horizon == original.horizon);
    CHECK(loaded.transitions == original.transitions);
    CHECK(loaded.rewards == original.rewards);
    CHECK(loaded.initial_dist == original.initial_dist);
}

TEST_CASE("mdp json loading rejects malformed documents") {
    const auto path = std::filesystem::temp_directory_path() / "ucbmo_test_mdp_bad.json";
    {
        std::ofstream out(path);
        out << R"({"num_states": 2, "num_actions": 1})";
    }
    CHECK_THROWS(load_mdp(path.string()));
    {
        std::ofstream out(path);
        out << "not json at all";
    }
    CHECK_THROWS(load_mdp(path.string()));
    std::filesystem::remove(path);
    CHECK_THROWS(load_mdp(path.string()));  // missing file
}
