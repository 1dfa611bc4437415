#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace augur {

struct SandboxConfig {
  /// Shell command with a `{file}` placeholder for the program path.
  std::string command_template = "python3 {file}";
  std::string file_name = "main.py";
  std::chrono::milliseconds timeout{10000};
  std::size_t output_cap = 8000;
  /// When set, the command is prefixed with `unshare --net --map-root-user`.
  bool deny_network = false;
  /// Extra `NAME=value` entries added to the child environment.
  std::vector<std::string> environment;
};

struct ExecResult {
  std::string stdout_text;
  std::string stderr_text;
  int exit_status = 0;
  std::chrono::milliseconds wall_time{0};

  bool ok() const noexcept { return exit_status == 0; }
};

struct ExecTimeout {
  std::chrono::milliseconds timeout{0};
  std::string partial_stdout;
  std::string partial_stderr;
};

using ExecOutcome = std::variant<ExecResult, ExecTimeout>;

/// Runs programs in a fresh temporary directory as a child process group.
/// A run that outlives the timeout is killed and reported as ExecTimeout.
class Sandbox {
 public:
  explicit Sandbox(SandboxConfig config);

  /// Throws ConfigError when the workspace cannot be created or the child
  /// cannot be spawned.
  ExecOutcome run(std::string_view program) const;

  const SandboxConfig& config() const noexcept { return config_; }

 private:
  SandboxConfig config_;
};

}  // namespace augur
