#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ucbmo/mdp.hpp"
#include "ucbmo/rng.hpp"

namespace ucbmo {

// Canned environments. Every generator output passes validate_mdp; tables
// are broadcast across steps (storage stays step-indexed for generality).

/// Three states in a row, two actions. Action 0 moves left, action 1 moves
/// right, walls self-loop. Reward 1 for taking action 1 in state 1 or
/// state 2 (both land in the rightmost state), 0 otherwise. Same tables at
/// every step, horizon 3, uniform initial distribution.
inline MdpSpec gridworld_1d();

/// Row of `length` states with the same left/right/wall semantics as the
/// 3-state gridworld: reward 1 exactly when the move lands in the rightmost
/// state. chain_mdp(3, 3) reproduces gridworld_1d() table for table.
inline MdpSpec chain_mdp(int length, int horizon) {
    if (length < 2) throw std::invalid_argument("chain_mdp: length must be >= 2");
    if (horizon < 1) throw std::invalid_argument("chain_mdp: horizon must be >= 1");

    MdpSpec spec;
    spec.num_states = length;
    spec.num_actions = 2;
    spec.horizon = horizon;
    spec.transitions.assign(
        static_cast<std::size_t>(horizon) * length * 2 * length, 0.0);
    spec.rewards.assign(static_cast<std::size_t>(horizon) * length * 2, 0.0);
    spec.initial_dist.assign(static_cast<std::size_t>(length),
                             1.0 / static_cast<double>(length));

    for (int h = 0; h < horizon; ++h) {
        for (int x = 0; x < length; ++x) {
            for (int a = 0; a < 2; ++a) {
                const int next = a == 0 ? std::max(0, x - 1) : std::min(length - 1, x + 1);
                spec.p(h, x, a, next) = 1.0;
                if (next == length - 1) spec.r(h, x, a) = 1.0;
            }
        }
    }
    return spec;
}

inline MdpSpec gridworld_1d() { return chain_mdp(3, 3); }

/// Seeded random instance: transition rows and the initial distribution are
/// normalized vectors of uniform draws from (0, 1]; rewards are uniform in
/// [0, 1) rounded to 6 decimals so serialized files carry the exact values.
inline MdpSpec random_mdp(std::uint64_t seed, int num_states, int num_actions, int horizon) {
    if (num_states <= 0 || num_actions <= 0 || horizon <= 0)
        throw std::invalid_argument("random_mdp: dimensions must be positive");

    RngStream rng(seed, fnv1a64("envs.random_mdp"));
    auto fill_simplex = [&rng](double* row, int n) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            row[i] = 1.0 - rng.next_double();  // (0, 1]: keeps the sum positive
            sum += row[i];
        }
        for (int i = 0; i < n; ++i) row[i] /= sum;
    };

    MdpSpec spec;
    spec.num_states = num_states;
    spec.num_actions = num_actions;
    spec.horizon = horizon;
    spec.transitions.resize(
        static_cast<std::size_t>(horizon) * num_states * num_actions * num_states);
    spec.rewards.resize(static_cast<std::size_t>(horizon) * num_states * num_actions);
    spec.initial_dist.resize(static_cast<std::size_t>(num_states));

    for (int h = 0; h < horizon; ++h)
        for (int x = 0; x < num_states; ++x)
            for (int a = 0; a < num_actions; ++a)
                fill_simplex(&spec.p(h, x, a, 0), num_states);
    for (double& r : spec.rewards)
        r = std::round(rng.next_double() * 1e6) / 1e6;
    fill_simplex(spec.initial_dist.data(), num_states);
    return spec;
}

enum class EnvKind { Gridworld1D, Chain, Random };

/// Parsed form of an environment recipe string:
///   "gridworld3" (alias "gridworld"), "chain:S=5,H=6",
///   "random:seed=7,S=3,A=2,H=3".
struct EnvRecipe {
    EnvKind kind = EnvKind::Gridworld1D;
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::map<std::string, std::uint64_t, std::less<>> parse_recipe_params(
    std::string_view text, std::string_view recipe) {
    std::map<std::string, std::uint64_t, std::less<>> params;
    while (!text.empty()) {
        const std::size_t comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);

        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size())
            throw std::invalid_argument("env recipe '" + std::string(recipe) +
                                        "': expected key=value, got '" + std::string(item) + "'");
        const std::string key(item.substr(0, eq));
        const std::string_view value = item.substr(eq + 1);
        std::uint64_t parsed = 0;
        const auto [ptr, ec] =
            std::from_chars(value.data(), value.data() + value.size(), parsed);
        if (ec != std::errc{} || ptr != value.data() + value.size())
            throw std::invalid_argument("env recipe '" + std::string(recipe) +
                                        "': '" + key + "' needs a non-negative integer");
        if (!params.emplace(key, parsed).second)
            throw std::invalid_argument("env recipe '" + std::string(recipe) +
                                        "': duplicate key '" + key + "'");
    }
    return params;
}

inline int recipe_int(const std::map<std::string, std::uint64_t, std::less<>>& params,
                      const std::string& key, std::string_view recipe) {
    const auto it = params.find(key);
    if (it == params.end())
        throw std::invalid_argument("env recipe '" + std::string(recipe) + "': missing '" + key +
                                    "'");
    if (it->second > 1'000'000)
        throw std::invalid_argument("env recipe '" + std::string(recipe) + "': '" + key +
                                    "' is implausibly large");
    return static_cast<int>(it->second);
}

}  // namespace detail

inline EnvRecipe parse_recipe(std::string_view text) {
    EnvRecipe recipe;
    const std::size_t colon = text.find(':');
    const std::string_view kind = text.substr(0, colon);
    auto params = detail::parse_recipe_params(
        colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1), text);
    auto reject_extras = [&params, text](std::initializer_list<std::string_view> allowed) {
        for (const auto& [key, value] : params) {
            bool known = false;
            for (std::string_view a : allowed) known = known || key == a;
            if (!known)
                throw std::invalid_argument("env recipe '" + std::string(text) +
                                            "': unknown key '" + key + "'");
        }
    };

    if (kind == "gridworld3" || kind == "gridworld") {
        reject_extras({});
        recipe.kind = EnvKind::Gridworld1D;
        recipe.num_states = 3;
        recipe.num_actions = 2;
        recipe.horizon = 3;
    } else if (kind == "chain") {
        reject_extras({"S", "H"});
        recipe.kind = EnvKind::Chain;
        recipe.num_states = detail::recipe_int(params, "S", text);
        recipe.num_actions = 2;
        recipe.horizon = detail::recipe_int(params, "H", text);
    } else if (kind == "random") {
        reject_extras({"seed", "S", "A", "H"});
        recipe.kind = EnvKind::Random;
        const auto it = params.find("seed");
        if (it == params.end())
            throw std::invalid_argument("env recipe '" + std::string(text) +
                                        "': missing 'seed'");
        recipe.seed = it->second;
        recipe.num_states = detail::recipe_int(params, "S", text);
        recipe.num_actions = detail::recipe_int(params, "A", text);
        recipe.horizon = detail::recipe_int(params, "H", text);
    } else {
        throw std::invalid_argument("unknown env recipe '" + std::string(text) +
                                    "' (expected gridworld3, chain:..., or random:...)");
    }
    return recipe;
}

inline MdpSpec make_env(const EnvRecipe& recipe) {
    switch (recipe.kind) {
        case EnvKind::Gridworld1D: return gridworld_1d();
        case EnvKind::Chain: return chain_mdp(recipe.num_states, recipe.horizon);
        case EnvKind::Random:
            return random_mdp(recipe.seed, recipe.num_states, recipe.num_actions,
                              recipe.horizon);
    }
    throw std::logic_error("make_env: unknown recipe kind");
}

/// Interprets `text` as a spec file path when such a file exists, otherwise
/// as a recipe string. The result is always validated.
inline MdpSpec resolve_env(const std::string& text) {
    MdpSpec spec;
    if (std::filesystem::exists(text)) {
        spec = load_mdp(text);
    } else {
        spec = make_env(parse_recipe(text));
    }
    const ValidationReport report = validate_mdp(spec);
    if (!report.ok())
        throw std::invalid_argument("environment '" + text + "' is invalid:\n" +
                                    report.to_string());
    return spec;
}

}  // namespace ucbmo
