#include "rankbench/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "rankbench/errors.hpp"
#include "rankbench/parallel.hpp"

extern char** environ;

namespace rankbench {

namespace {

std::string signal_label(int sig) {
    if (const char* abbrev = ::sigabbrev_np(sig)) return std::string("signal:SIG") + abbrev;
    return "signal:" + std::to_string(sig);
}

}  // namespace

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view to_string(ExecStatus s) {
    switch (s) {
        case ExecStatus::pass: return "pass";
        case ExecStatus::assert_fail: return "assert_fail";
        case ExecStatus::error: return "error";
        case ExecStatus::timeout: return "timeout";
    }
    return "error";
}

ExecStatus parse_exec_status(std::string_view s) {
    if (s == "pass") return ExecStatus::pass;
    if (s == "assert_fail") return ExecStatus::assert_fail;
    if (s == "error") return ExecStatus::error;
    if (s == "timeout") return ExecStatus::timeout;
    throw ValidationError("unknown execution status '" + std::string(s) + "'");
}

json outcome_to_json(const ExecutionOutcome& o) {
    json j = {{"status", to_string(o.status)}, {"elapsed_ms", o.elapsed_ms}};
    j["error_type"] = o.error_type ? json(*o.error_type) : json(nullptr);
    return j;
}

ExecutionOutcome outcome_from_json(const json& j) {
    ExecutionOutcome o;
    o.status = parse_exec_status(j.at("status").get<std::string>());
    if (auto it = j.find("error_type"); it != j.end() && it->is_string()) o.error_type = it->get<std::string>();
    o.elapsed_ms = j.value("elapsed_ms", 0.0);
    return o;
}

void validate(const ExecConfig& cfg) {
    if (cfg.timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
    if (cfg.max_workers < 1) throw ConfigError("max_workers must be >= 1");
    if (cfg.slack_ms < 0) throw ConfigError("slack_ms must be non-negative");
    if (cfg.runtime_command.find_first_not_of(" \t") == std::string::npos) {
        throw ConfigError("runtime_command is empty");
    }
}

std::filesystem::path default_shim_path() {
    if (const char* env = std::getenv("RANKBENCH_SHIM")) return env;
    return RANKBENCH_DEFAULT_SHIM;
}

namespace {

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

bool is_executable(const std::filesystem::path& p) {
    return ::access(p.c_str(), X_OK) == 0 && !std::filesystem::is_directory(p);
}

std::string resolve_binary(const std::string& name) {
    if (name.find('/') != std::string::npos) {
        if (!is_executable(name)) throw ConfigError("runtime binary '" + name + "' is not executable");
        return name;
    }
    const char* path = std::getenv("PATH");
    std::istringstream dirs(path ? path : "/usr/bin:/bin");
    for (std::string dir; std::getline(dirs, dir, ':');) {
        if (dir.empty()) continue;
        const auto candidate = std::filesystem::path(dir) / name;
        if (is_executable(candidate)) return candidate.string();
    }
    throw ConfigError("runtime binary '" + name + "' not found on PATH");
}

void ignore_sigpipe_once() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string_view last_nonempty_line(std::string_view text) {
    while (!text.empty()) {
        const auto nl = text.find_last_of('\n');
        std::string_view line = nl == std::string_view::npos ? text : text.substr(nl + 1);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (!line.empty()) return line;
        if (nl == std::string_view::npos) break;
        text = text.substr(0, nl);
    }
    return {};
}

ExecutionOutcome protocol_error() {
    return ExecutionOutcome{ExecStatus::error, std::string(kHarnessProtocolError), 0.0};
}

}  // namespace

ExecutionOutcome classify_shim_output(std::string_view stdout_text, int exit_code) {
    if (exit_code != 0) return protocol_error();
    const auto line = last_nonempty_line(stdout_text);
    const auto j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return protocol_error();
    const auto status = j.find("status");
    const auto elapsed = j.find("elapsed_ms");
    if (status == j.end() || !status->is_string() || elapsed == j.end() || !elapsed->is_number()) {
        return protocol_error();
    }
    ExecutionOutcome o;
    o.elapsed_ms = elapsed->get<double>();
    if (o.elapsed_ms < 0) return protocol_error();
    const auto s = status->get<std::string>();
    const auto et = j.find("error_type");
    std::optional<std::string> error_type;
    if (et != j.end() && et->is_string()) error_type = et->get<std::string>();
    if (s == "pass") {
        o.status = ExecStatus::pass;
    } else if (s == "assert_fail") {
        o.status = ExecStatus::assert_fail;
        o.error_type = std::string(kAssertionErrorType);
    } else if (s == "error") {
        o.status = ExecStatus::error;
        o.error_type = error_type.value_or("Exception");
    } else {
        return protocol_error();
    }
    return o;
}

Sandbox::Sandbox(ExecConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    if (cfg_.shim_path.empty()) cfg_.shim_path = default_shim_path();
    if (!std::filesystem::is_regular_file(cfg_.shim_path)) {
        throw ConfigError("runner shim not found at '" + cfg_.shim_path.string() + "'");
    }
    argv_ = split_words(cfg_.runtime_command);
    argv_.front() = resolve_binary(argv_.front());
    argv_.push_back(cfg_.shim_path.string());
    ignore_sigpipe_once();
}

void Sandbox::reset_stats() const noexcept {
    peak_live_.store(live_.load());
    spawned_.store(0);
}

ExecutionOutcome Sandbox::execute_test(std::string_view solution_code, std::string_view test) const {
    return run_pair(solution_code, test);
}

std::vector<ExecutionOutcome> Sandbox::execute_suite(std::string_view solution_code,
                                                     std::span<const std::string> tests) const {
    if (tests.empty()) throw std::invalid_argument("execute_suite: empty test list");
    std::vector<ExecutionOutcome> out(tests.size());
    parallel_for_index(tests.size(), static_cast<std::size_t>(cfg_.max_workers),
                       [&](std::size_t i) { out[i] = run_pair(solution_code, tests[i]); });
    return out;
}

std::vector<std::vector<ExecutionOutcome>> Sandbox::run_batch(std::span<const SuiteJob> jobs) const {
    std::vector<std::vector<ExecutionOutcome>> out(jobs.size());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        out[j].resize(jobs[j].tests.size());
        for (std::size_t t = 0; t < jobs[j].tests.size(); ++t) pairs.emplace_back(j, t);
    }
    parallel_for_index(pairs.size(), static_cast<std::size_t>(cfg_.max_workers), [&](std::size_t i) {
        const auto [j, t] = pairs[i];
        out[j][t] = run_pair(jobs[j].solution_code, jobs[j].tests[t]);
    });
    return out;
}

ExecutionOutcome Sandbox::run_pair(std::string_view solution_code, std::string_view test) const {
    const std::string request =
        json{{"solution_code", solution_code}, {"test", test}}.dump(-1, ' ', false, json::error_handler_t::replace);

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
    Fd in_r(in_pipe[0]), in_w(in_pipe[1]);
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
    Fd out_r(out_pipe[0]), out_w(out_pipe[1]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_r.fd, STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_w.fd, STDOUT_FILENO);
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);

    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    sigset_t defaults;
    sigemptyset(&defaults);
    sigaddset(&defaults, SIGPIPE);
    posix_spawnattr_setsigdefault(&attr, &defaults);
    posix_spawnattr_setpgroup(&attr, 0);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF);

    std::vector<char*> argv;
    for (const auto& a : argv_) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_t pid = -1;
    const auto t0 = Clock::now();
    const int rc = ::posix_spawn(&pid, argv.front(), &actions, &attr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) throw ConfigError(std::string("failed to spawn runtime: ") + std::strerror(rc));

    const std::size_t now_live = ++live_;
    ++spawned_;
    for (std::size_t prev = peak_live_.load(); now_live > prev && !peak_live_.compare_exchange_weak(prev, now_live);) {
    }

    in_r.reset();
    out_w.reset();
    set_nonblocking(in_w.fd);
    set_nonblocking(out_r.fd);

    const auto deadline = t0 + std::chrono::milliseconds(cfg_.timeout_ms);
    std::string captured;
    std::size_t written = 0;
    bool timed_out = false;
    char buf[65536];

    while (out_r.fd >= 0) {
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (remaining <= 0) {
            timed_out = true;
            break;
        }
        pollfd fds[2];
        nfds_t n = 0;
        fds[n++] = {out_r.fd, POLLIN, 0};
        if (in_w.fd >= 0) fds[n++] = {in_w.fd, POLLOUT, 0};
        const int pr = ::poll(fds, n, static_cast<int>(remaining));
        if (pr < 0 && errno != EINTR) break;
        if (pr <= 0) continue;
        if (n > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t w = ::write(in_w.fd, request.data() + written, request.size() - written);
            if (w > 0) written += static_cast<std::size_t>(w);
            if (w < 0 && errno != EAGAIN && errno != EINTR) in_w.reset();
            if (written == request.size()) in_w.reset();
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            const ssize_t r = ::read(out_r.fd, buf, sizeof buf);
            if (r > 0) {
                captured.append(buf, static_cast<std::size_t>(r));
                // Only the final line matters; bound memory for chatty processes.
                if (captured.size() > (2u << 20)) captured.erase(0, captured.size() - (1u << 20));
            } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
                out_r.reset();
            }
        }
    }
    in_w.reset();

    // Wait for exit without reaping so the process group stays addressable.
    siginfo_t info{};
    while (!timed_out) {
        info.si_pid = 0;
        if (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT) != 0 && errno != EINTR) break;
        if (info.si_pid == pid) break;
        if (Clock::now() >= deadline) {
            timed_out = true;
            break;
        }
        ::usleep(1000);
    }
    ::kill(-pid, SIGKILL);
    int wstatus = 0;
    while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
    }
    const double wall_ms = ms_since(t0);
    --live_;

    if (timed_out) {
        return ExecutionOutcome{ExecStatus::timeout, std::string(kTimeoutErrorType),
                                std::max(wall_ms, static_cast<double>(cfg_.timeout_ms))};
    }
    ExecutionOutcome o;
    if (WIFSIGNALED(wstatus)) {
        o = ExecutionOutcome{ExecStatus::error, signal_label(WTERMSIG(wstatus)), 0.0};
    } else {
        o = classify_shim_output(captured, WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : -1);
    }
    if (!cfg_.record_timings) o.elapsed_ms = 0.0;
    return o;
}

}  // namespace rankbench
