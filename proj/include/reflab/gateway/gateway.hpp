#pragma once

#include "reflab/corpus/corpus.hpp"
#include "reflab/prompt/prompt.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace reflab::gateway {

struct ModelConfig {
    std::string provider_id = "openai-chat";
    std::string model_name;
    std::string api_base;        // e.g. "http://127.0.0.1:8089/v1"
    std::string credential_env;  // empty = endpoint needs no key
    std::map<std::string, double> sampling; // absent keys = provider defaults
    double timeout_seconds = 120.0;
    int max_retries = 3;
    double retry_backoff_ms = 250.0;        // doubled per attempt
    double min_request_interval_ms = 0.0;   // per-provider rate limit
};

struct CompletionRecord {
    std::string scenario_id;
    std::string strategy;
    int run_index = 1; // 1-based
    std::string prompt_hash;
    std::string raw_text;
    double latency_ms = 0.0;
    std::map<std::string, std::string> provider_meta;
    bool failed = false; // partial failures are recorded, never dropped
    std::string failure_reason;
};

enum class CassetteMode { record, replay, passthrough };

// Deterministic response store: hex prompt hash -> responses indexed by
// run_index - 1. Replay mode never touches the network.
class Cassette {
public:
    Cassette() = default;
    static Cassette open(const std::filesystem::path& path, CassetteMode mode);

    std::optional<std::string> lookup(const std::string& prompt_hash, int run_index) const;
    void store(const std::string& prompt_hash, int run_index, const std::string& raw_text);
    void save() const; // write-temp-then-rename

    CassetteMode mode() const { return mode_; }
    const std::filesystem::path& path() const { return path_; }
    size_t entry_count() const;

private:
    CassetteMode mode_ = CassetteMode::replay;
    std::filesystem::path path_;
    std::map<std::string, std::vector<std::optional<std::string>>> entries_;
    mutable std::mutex mutex_;

public:
    Cassette(const Cassette&) = delete;
    Cassette& operator=(const Cassette&) = delete;
    Cassette(Cassette&& other) noexcept;
    Cassette& operator=(Cassette&& other) noexcept;
};

// Hex SHA-256 of the UTF-8 prompt bytes; platform-stable.
std::string prompt_hash(std::string_view prompt_text);

class ProviderAdapter {
public:
    virtual ~ProviderAdapter() = default;
    // Returns the raw text output. Throws TransportError after retries.
    virtual std::string complete(const std::string& prompt_text,
                                 std::map<std::string, std::string>& meta) = 0;
};

// provider_id "openai-chat" is the only wire adapter; unknown ids are a
// configuration error.
std::unique_ptr<ProviderAdapter> make_adapter(const ModelConfig& config);

// One prompt, one run. Replay miss -> CassetteMissError; network or auth
// failure after retries -> TransportError.
CompletionRecord complete(const prompt::RenderedPrompt& prompt, const ModelConfig& config,
                          int run_index, Cassette* cassette);

// Renders the strategy prompt and performs `runs` completions. Transport and
// cassette failures become failed records; unsupported strategies propagate.
// runs = 0 yields an empty list plus a warning.
std::vector<CompletionRecord> run_batch(const corpus::RefactoringScenario& scenario,
                                        prompt::Strategy strategy,
                                        const corpus::Catalog& catalog,
                                        const prompt::TemplateStore& store,
                                        const ModelConfig& config, int runs,
                                        Cassette* cassette,
                                        std::vector<std::string>* warnings = nullptr);

const char* cassette_mode_name(CassetteMode mode);
std::optional<CassetteMode> cassette_mode_from_name(const std::string& name);

} // namespace reflab::gateway
