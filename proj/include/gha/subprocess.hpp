#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace gha {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
};

class process_error : public std::runtime_error {
 public:
  explicit process_error(const std::string& what) : std::runtime_error(what) {}
};

// Runs a command, captures stdout/stderr, kills the process at the deadline.
// Blocking; one subprocess per call.
inline ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s) {
  if (argv.empty()) throw process_error("empty command");
  int out_pipe[2], err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    throw process_error("pipe failed: " + std::string(strerror(errno)));

  pid_t pid = fork();
  if (pid < 0) throw process_error("fork failed: " + std::string(strerror(errno)));
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  ProcessResult res;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
  bool out_open = true, err_open = true;
  char buf[4096];

  while (out_open || err_open) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      res.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    long wait_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    struct pollfd fds[2];
    nfds_t n = 0;
    if (out_open) fds[n++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[n++] = {err_pipe[0], POLLIN, 0};
    int rv = poll(fds, n, static_cast<int>(std::min(wait_ms, 200L)));
    if (rv < 0 && errno != EINTR) break;
    auto drain = [&](int fd, bool& open_flag, std::string& sink) {
      for (;;) {
        ssize_t got = read(fd, buf, sizeof(buf));
        if (got > 0) {
          sink.append(buf, static_cast<size_t>(got));
        } else if (got == 0) {
          open_flag = false;
          return;
        } else {
          if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) open_flag = false;
          return;
        }
      }
    };
    if (out_open) drain(out_pipe[0], out_open, res.out);
    if (err_open) drain(err_pipe[0], err_open, res.err);
  }
  close(out_pipe[0]);
  close(err_pipe[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) res.exit_code = 128 + WTERMSIG(status);
  return res;
}

}  // namespace gha
