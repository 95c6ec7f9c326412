#ifndef RFFQRNG_TOOLS_COMMANDS_HPP
#define RFFQRNG_TOOLS_COMMANDS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rffqrng/rff_core.hpp"

namespace rffqrng::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTestFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Fully resolved settings for one invocation. Units: Hz, seconds, bits.
struct Options {
  std::string command;
  std::vector<double> f_det;   // one value, or a sweep grid
  std::vector<double> f_bit;
  double dead_time = 6e-9;
  double eta = 0.5;
  bool zero_bias_eta = false;
  double t_rise = 500e-12;
  double t_fall = 527.2e-12;
  std::size_t stages = 1;
  std::size_t n_bits = 0;   // 0: command default
  std::uint64_t seed = 1;
  std::optional<double> phase;
  bool initial_state = false;
  std::size_t block_size = 1'000'000;
  std::vector<unsigned> apen_m = {3, 10};
  std::vector<std::string> tests = {"frequency", "apen", "fft", "universal", "runs"};
  unsigned jobs = 1;
  std::size_t k_max = 4;
  std::vector<unsigned> entropy_l = {1, 2, 3, 10};
  std::string out;
  std::vector<std::string> inputs;
  std::string export_detections;
  std::size_t n_events = 0;
};

nlohmann::json to_json(const Options& o);
Options options_from_json(const nlohmann::json& j);

/// Parses a comma-separated list whose items are numbers or start:stop:step ranges (inclusive).
std::vector<double> parse_grid(const std::vector<std::string>& items);

/// A non-negative integer written in any floating notation, e.g. "1e8".
std::size_t parse_count(const std::string& s);

/// Analog model from the options, applying the zero-bias threshold when requested.
AnalogTimingModel analog_model(const Options& o);

/// Simulator configuration for a single operating point.
QrngConfig qrng_config(const Options& o, double f_det, double f_bit, std::size_t n_bits);

std::string sha256_file(const std::filesystem::path& p);

int cmd_generate(const Options& o, std::ostream& log);
int cmd_sweep_bias(const Options& o, std::ostream& log);
int cmd_sweep_autocorr(const Options& o, std::ostream& log);
int cmd_test(const Options& o, std::ostream& log);
int cmd_analyze(const Options& o, std::ostream& out);
int cmd_predict(const Options& o, std::ostream& out);

/// Entry point shared by main() and the tests; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rffqrng::cli

#endif  // RFFQRNG_TOOLS_COMMANDS_HPP
