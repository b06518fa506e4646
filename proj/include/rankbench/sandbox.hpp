#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rankbench {

enum class ExecStatus { pass, assert_fail, error, timeout };

std::string_view to_string(ExecStatus s);
ExecStatus parse_exec_status(std::string_view s);

inline constexpr std::string_view kAssertionErrorType = "AssertionError";
inline constexpr std::string_view kHarnessProtocolError = "harness_protocol";
inline constexpr std::string_view kTimeoutErrorType = "Timeout";

struct ExecutionOutcome {
    ExecStatus status = ExecStatus::error;
    std::optional<std::string> error_type;
    double elapsed_ms = 0.0;

    bool operator==(const ExecutionOutcome&) const = default;
};

nlohmann::json outcome_to_json(const ExecutionOutcome& o);
ExecutionOutcome outcome_from_json(const nlohmann::json& j);

struct ExecConfig {
    int timeout_ms = 3000;
    int max_workers = 1;
    std::string runtime_command = "python3";
    std::filesystem::path shim_path;  // empty: built-in default location
    int slack_ms = 500;
    // When false, shim-reported times are discarded (elapsed_ms = 0 except
    // for timeouts) so that downstream output is reproducible.
    bool record_timings = true;
};

void validate(const ExecConfig& cfg);

std::filesystem::path default_shim_path();

struct SuiteJob {
    std::string solution_code;
    std::vector<std::string> tests;
};

/// Runs (solution, test) pairs through the runner shim, one subprocess per
/// pair, with the orchestrator enforcing the timeout by killing the process
/// group. Safe for concurrent use.
///
/// Construction resolves the runtime binary on PATH and checks the shim file;
/// either missing is a ConfigError.
class Sandbox {
public:
    explicit Sandbox(ExecConfig cfg);

    const ExecConfig& config() const noexcept { return cfg_; }

    ExecutionOutcome execute_test(std::string_view solution_code, std::string_view test) const;

    /// One outcome per test, order-aligned. Throws std::invalid_argument on an
    /// empty test list. Pairs run in parallel up to max_workers.
    std::vector<ExecutionOutcome> execute_suite(std::string_view solution_code,
                                                std::span<const std::string> tests) const;

    /// Flattens all (job, test) pairs onto a pool of max_workers threads.
    std::vector<std::vector<ExecutionOutcome>> run_batch(std::span<const SuiteJob> jobs) const;

    // Instrumentation for the concurrency bound.
    std::size_t peak_concurrency() const noexcept { return peak_live_.load(); }
    std::size_t spawned() const noexcept { return spawned_.load(); }
    void reset_stats() const noexcept;

private:
    ExecutionOutcome run_pair(std::string_view solution_code, std::string_view test) const;

    ExecConfig cfg_;
    std::vector<std::string> argv_;
    mutable std::atomic<std::size_t> live_{0};
    mutable std::atomic<std::size_t> peak_live_{0};
    mutable std::atomic<std::size_t> spawned_{0};
};

/// Interprets the shim's stdout and exit code. Exposed for tests.
ExecutionOutcome classify_shim_output(std::string_view stdout_text, int exit_code);

}  // namespace rankbench
