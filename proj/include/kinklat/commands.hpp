#ifndef KINKLAT_COMMANDS_HPP
#define KINKLAT_COMMANDS_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinklat/config.hpp"
#include "kinklat/diagnostics.hpp"
#include "kinklat/moser.hpp"

namespace kinklat {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int blow_up = 3;
inline constexpr int invariant = 4;
}  // namespace exit_code

/// A self-check failed; points at an implementation bug rather than bad input.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// %.17g
std::string format_real(double x);

nlohmann::json to_json(const DriftReport& d);
nlohmann::json to_json(const IntegrabilityReport& r);
nlohmann::json to_json(const moser::ProbeReport& r);

/// CSV n,alpha,beta,k,identity for n = 1..n_max.
void cmd_coeffs(int n_max, std::ostream& out);

/// CSV k,a_k.
void cmd_chi(double a1, int order, double coupling, double vacuum, std::ostream& out);

/// Writes trajectory.csv and report.json to cfg.output_dir; returns the report.
nlohmann::json cmd_simulate(const RunConfig& cfg);

/// Lax residual pattern and constraint values at the initial state (written to laxcheck.json).
nlohmann::json cmd_laxcheck(const RunConfig& cfg);

/// {H_k1, H_k2} at the initial state with the closed form for {2, 3} on open chains.
nlohmann::json cmd_bracket(const RunConfig& cfg, int k1, int k2);

/// Moser probe over the configured integration (written to moser.json).
nlohmann::json cmd_moser(const RunConfig& cfg);

/// Full command-line entry point; returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kinklat

#endif  // KINKLAT_COMMANDS_HPP
