#ifndef KINKLAT_CONFIG_HPP
#define KINKLAT_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinklat/dynamics.hpp"
#include "kinklat/lattice.hpp"

namespace kinklat {

/// Any problem with a configuration document or command-line argument.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// splitmix64: state += 0x9E3779B97F4A7C15, then the xor-shift-multiply finalizer.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    std::uint64_t next() noexcept;
    /// (next() >> 11) * 2^-53, in [0, 1).
    double uniform() noexcept;
    /// Box-Muller; consumes two uniforms per call, no caching.
    double normal() noexcept;

private:
    std::uint64_t state_;
};

struct RandomStateSpec {
    double q_low = -1.0;
    double q_high = 1.0;
    double p_sigma = 1.0;
    /// q_i = -i spacing + U(q_low, q_high), so every bond separation is near `spacing`.
    double spacing = 0.0;
};

/// All q first, then all p, from one generator seeded with `seed`.
PhaseState random_state(const RandomStateSpec& spec, std::size_t sites, std::uint64_t seed);

struct IntegrationSpec {
    Scheme scheme = Scheme::yoshida4;
    double dt = 0.01;
    std::size_t steps = 1000;
    std::size_t sample_every = 10;
};

struct RunConfig {
    LatticeModel model;
    std::optional<int> n_max;  // set when the kink spec was requested
    std::optional<PhaseState> state;
    std::optional<RandomStateSpec> random;
    IntegrationSpec integration;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    std::optional<double> lambda;
};

/// Parses a JSON document. Unknown keys, wrong types and invalid models raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Rebuilds the model's interaction from the kink spec truncated at n_max.
void apply_terms_override(RunConfig& cfg, int n_max);

/// The explicit state, or the seeded random one.
PhaseState initial_state(const RunConfig& cfg);

}  // namespace kinklat

#endif  // KINKLAT_CONFIG_HPP
