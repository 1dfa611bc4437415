#include "augur/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "augur/errors.hpp"

extern char** environ;

namespace augur {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

class Workspace {
 public:
  Workspace() {
    std::string pattern = (fs::temp_directory_path() / "augur-sandbox-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw ConfigError(std::string("cannot create sandbox workspace: ") + std::strerror(errno));
    }
    path_ = pattern;
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const noexcept { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

struct Capture {
  std::string text;
  bool open = true;
};

void drain(int fd, Capture& capture, std::size_t cap) {
  std::array<char, 4096> buf{};
  for (;;) {
    const ssize_t n = ::read(fd, buf.data(), buf.size());
    if (n > 0) {
      const std::size_t room = cap > capture.text.size() ? cap - capture.text.size() : 0;
      capture.text.append(buf.data(), std::min<std::size_t>(room, static_cast<std::size_t>(n)));
      continue;
    }
    if (n == 0) capture.open = false;
    return;  // EAGAIN or EOF
  }
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

Sandbox::Sandbox(SandboxConfig config) : config_(std::move(config)) {
  if (config_.command_template.find("{file}") == std::string::npos) {
    throw ConfigError("sandbox command template lacks a {file} placeholder");
  }
  if (config_.timeout <= std::chrono::milliseconds{0}) throw ConfigError("sandbox timeout must be positive");
}

ExecOutcome Sandbox::run(std::string_view program) const {
  Workspace workspace;
  const fs::path file = workspace.path() / config_.file_name;
  {
    std::ofstream out(file, std::ios::binary);
    out << program;
    if (!out) throw ConfigError("cannot write program to " + file.string());
  }

  std::string command = config_.command_template;
  for (auto pos = command.find("{file}"); pos != std::string::npos; pos = command.find("{file}")) {
    command.replace(pos, 6, shell_quote(file.string()));
  }
  if (config_.deny_network) command = "unshare --net --map-root-user " + command;

  std::vector<std::string> env_storage;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) env_storage.emplace_back(*e);
  for (const auto& extra : config_.environment) env_storage.push_back(extra);
  std::vector<char*> envp;
  for (auto& e : env_storage) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::string sh = "/bin/sh", dash_c = "-c";
  std::array<char*, 4> argv = {sh.data(), dash_c.data(), command.data(), nullptr};
  const std::string workdir = workspace.path().string();

  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw ConfigError(std::string("pipe failed: ") + std::strerror(errno));
  }
  Fd out_read(out_pipe[0]), out_write(out_pipe[1]), err_read(err_pipe[0]), err_write(err_pipe[1]);

  const auto started = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw ConfigError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(workdir.c_str()) != 0) ::_exit(126);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::execve(argv[0], argv.data(), envp.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  out_write.reset();
  err_write.reset();
  ::fcntl(out_read.get(), F_SETFL, O_NONBLOCK);
  ::fcntl(err_read.get(), F_SETFL, O_NONBLOCK);

  const auto deadline = started + config_.timeout;
  Capture out, err;
  int status = 0;
  bool exited = false;
  bool timed_out = false;
  while (!exited) {
    const auto now = Clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    std::array<pollfd, 2> fds{};
    nfds_t count = 0;
    if (out.open) fds[count++] = {out_read.get(), POLLIN, 0};
    if (err.open) fds[count++] = {err_read.get(), POLLIN, 0};
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int wait_ms = static_cast<int>(std::min<long long>(count ? remaining : 10, 50));
    if (count > 0) {
      ::poll(fds.data(), count, std::max(wait_ms, 1));
      if (out.open) drain(out_read.get(), out, config_.output_cap);
      if (err.open) drain(err_read.get(), err, config_.output_cap);
    } else {
      ::usleep(static_cast<useconds_t>(std::max(wait_ms, 1)) * 1000);
    }
    if (!out.open && !err.open) {
      if (::waitpid(pid, &status, WNOHANG) == pid) exited = true;
    } else if (::waitpid(pid, &status, WNOHANG) == pid) {
      exited = true;
      drain(out_read.get(), out, config_.output_cap);
      drain(err_read.get(), err, config_.output_cap);
    }
  }

  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    return ExecTimeout{config_.timeout, std::move(out.text), std::move(err.text)};
  }
  ExecResult result;
  result.stdout_text = std::move(out.text);
  result.stderr_text = std::move(err.text);
  result.exit_status = decode_status(status);
  result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  return result;
}

}  // namespace augur
