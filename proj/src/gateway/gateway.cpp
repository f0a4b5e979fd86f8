#include "reflab/gateway/gateway.hpp"

#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"
#include "reflab/support/sha256.hpp"
#include "reflab/support/strings.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace reflab::gateway {

using nlohmann::json;

std::string prompt_hash(std::string_view prompt_text) { return sha256_hex(prompt_text); }

// ---------------------------------------------------------------------------
// Cassette
// ---------------------------------------------------------------------------

Cassette Cassette::open(const std::filesystem::path& path, CassetteMode mode) {
    Cassette cassette;
    cassette.mode_ = mode;
    cassette.path_ = path;
    if (std::filesystem::exists(path)) {
        json doc;
        try {
            doc = json::parse(read_file(path));
        } catch (const json::exception& e) {
            throw SchemaError("cassette " + path.string() + ": " + e.what());
        }
        if (!doc.is_object() || !doc.value("entries", json::object()).is_object())
            throw SchemaError("cassette " + path.string() +
                              ": expected an object with an 'entries' map");
        for (const auto& [hash, runs] : doc["entries"].items()) {
            if (!runs.is_array())
                throw SchemaError("cassette " + path.string() + ": entry '" + hash +
                                  "' must be an array of responses");
            std::vector<std::optional<std::string>> slot;
            for (const auto& response : runs) {
                if (response.is_null())
                    slot.push_back(std::nullopt);
                else if (response.is_string())
                    slot.push_back(response.get<std::string>());
                else
                    throw SchemaError("cassette " + path.string() + ": entry '" + hash +
                                      "' holds a non-string response");
            }
            cassette.entries_[hash] = std::move(slot);
        }
    } else if (mode == CassetteMode::replay) {
        throw CassetteMissError("cassette " + path.string() + " does not exist");
    }
    return cassette;
}

Cassette::Cassette(Cassette&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    mode_ = other.mode_;
    path_ = std::move(other.path_);
    entries_ = std::move(other.entries_);
}

Cassette& Cassette::operator=(Cassette&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        mode_ = other.mode_;
        path_ = std::move(other.path_);
        entries_ = std::move(other.entries_);
    }
    return *this;
}

std::optional<std::string> Cassette::lookup(const std::string& hash, int run_index) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(hash);
    if (it == entries_.end()) return std::nullopt;
    size_t slot = static_cast<size_t>(run_index) - 1;
    if (run_index < 1 || slot >= it->second.size()) return std::nullopt;
    return it->second[slot];
}

void Cassette::store(const std::string& hash, int run_index, const std::string& raw_text) {
    if (run_index < 1) throw StateError("cassette store: run_index must be 1-based");
    std::lock_guard lock(mutex_);
    auto& slot = entries_[hash];
    if (slot.size() < static_cast<size_t>(run_index)) slot.resize(run_index);
    slot[run_index - 1] = raw_text;
}

void Cassette::save() const {
    std::lock_guard lock(mutex_);
    if (path_.empty()) throw StateError("cassette has no backing path");
    json entries = json::object();
    for (const auto& [hash, runs] : entries_) {
        json arr = json::array();
        for (const auto& response : runs)
            arr.push_back(response ? json(*response) : json(nullptr));
        entries[hash] = std::move(arr);
    }
    json doc = {{"version", 1}, {"entries", std::move(entries)}};
    write_file_atomic(path_, doc.dump(2) + "\n");
}

size_t Cassette::entry_count() const {
    std::lock_guard lock(mutex_);
    size_t n = 0;
    for (const auto& [hash, runs] : entries_)
        for (const auto& response : runs)
            if (response) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Rate limiting: one gate per provider id.
// ---------------------------------------------------------------------------

namespace {

void rate_limit(const std::string& provider_id, double min_interval_ms) {
    if (min_interval_ms <= 0) return;
    using clock = std::chrono::steady_clock;
    static std::mutex registry_mutex;
    static std::map<std::string, clock::time_point> next_slot;

    clock::time_point wake;
    {
        std::lock_guard lock(registry_mutex);
        auto now = clock::now();
        auto& slot = next_slot[provider_id];
        if (slot < now) slot = now;
        wake = slot;
        slot += std::chrono::microseconds(static_cast<long long>(min_interval_ms * 1000));
    }
    std::this_thread::sleep_until(wake);
}

// ---------------------------------------------------------------------------
// OpenAI-style chat completions adapter.
// ---------------------------------------------------------------------------

struct ParsedBase {
    std::string host; // scheme://host:port
    std::string path_prefix;
};

ParsedBase parse_api_base(const std::string& api_base) {
    auto scheme_end = api_base.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigurationError("api_base '" + api_base + "' must include a scheme");
    auto path_start = api_base.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {api_base, ""};
    std::string prefix = api_base.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {api_base.substr(0, path_start), prefix};
}

class OpenAiChatAdapter : public ProviderAdapter {
public:
    explicit OpenAiChatAdapter(const ModelConfig& config) : config_(config) {
        if (config_.api_base.empty())
            throw ConfigurationError("model '" + config_.model_name + "': api_base is empty");
        if (!config_.credential_env.empty()) {
            const char* value = std::getenv(config_.credential_env.c_str());
            if (value == nullptr || *value == '\0')
                throw ConfigurationError("credential environment variable '" +
                                         config_.credential_env + "' is not set");
            credential_ = value;
        }
    }

    std::string complete(const std::string& prompt_text,
                         std::map<std::string, std::string>& meta) override {
        json payload = {{"model", config_.model_name},
                        {"messages", json::array({{{"role", "user"},
                                                   {"content", prompt_text}}})}};
        for (const auto& [key, value] : config_.sampling) payload[key] = value;

        ParsedBase base = parse_api_base(config_.api_base);
        std::string body = payload.dump();
        std::string last_failure;

        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                auto delay = config_.retry_backoff_ms * static_cast<double>(1 << (attempt - 1));
                std::this_thread::sleep_for(
                    std::chrono::microseconds(static_cast<long long>(delay * 1000)));
            }
            rate_limit(config_.provider_id, config_.min_request_interval_ms);

            httplib::Client client(base.host);
            client.set_connection_timeout(std::chrono::milliseconds(
                static_cast<long long>(config_.timeout_seconds * 1000)));
            client.set_read_timeout(std::chrono::milliseconds(
                static_cast<long long>(config_.timeout_seconds * 1000)));
            httplib::Headers headers;
            if (!credential_.empty())
                headers.emplace("Authorization", "Bearer " + credential_);

            auto res = client.Post(base.path_prefix + "/chat/completions", headers, body,
                                   "application/json");
            if (!res) {
                last_failure = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_failure = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw TransportError("model '" + config_.model_name + "': HTTP " +
                                     std::to_string(res->status) + ": " + res->body);
            return parse_response(res->body, meta);
        }
        throw TransportError("model '" + config_.model_name + "': " + last_failure +
                             " after " + std::to_string(config_.max_retries + 1) +
                             " attempts");
    }

private:
    std::string parse_response(const std::string& body,
                               std::map<std::string, std::string>& meta) {
        json doc;
        try {
            doc = json::parse(body);
        } catch (const json::exception& e) {
            throw TransportError("model '" + config_.model_name +
                                 "': unparseable response body: " + e.what());
        }
        if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
            throw TransportError("model '" + config_.model_name +
                                 "': response has no choices");
        const json& choice = doc["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string())
            throw TransportError("model '" + config_.model_name +
                                 "': response choice has no message content");
        if (doc.contains("id") && doc["id"].is_string())
            meta["response_id"] = doc["id"].get<std::string>();
        if (doc.contains("model") && doc["model"].is_string())
            meta["response_model"] = doc["model"].get<std::string>();
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
            meta["finish_reason"] = choice["finish_reason"].get<std::string>();
        return choice["message"]["content"].get<std::string>();
    }

    ModelConfig config_;
    std::string credential_;
};

} // namespace

std::unique_ptr<ProviderAdapter> make_adapter(const ModelConfig& config) {
    if (config.provider_id == "openai-chat")
        return std::make_unique<OpenAiChatAdapter>(config);
    throw ConfigurationError("unknown provider '" + config.provider_id +
                             "' (supported: openai-chat)");
}

// ---------------------------------------------------------------------------
// Completion entry points
// ---------------------------------------------------------------------------

CompletionRecord complete(const prompt::RenderedPrompt& prompt, const ModelConfig& config,
                          int run_index, Cassette* cassette) {
    if (run_index < 1) throw StateError("complete: run_index must be 1-based");

    CompletionRecord record;
    record.scenario_id = prompt.scenario_id;
    record.strategy = prompt::strategy_name(prompt.strategy);
    record.run_index = run_index;
    record.prompt_hash = prompt_hash(prompt.text);
    record.provider_meta["model"] = config.model_name;
    record.provider_meta["template_version"] = prompt.template_version;

    CassetteMode mode = cassette ? cassette->mode() : CassetteMode::passthrough;
    record.provider_meta["mode"] = cassette_mode_name(mode);

    if (mode == CassetteMode::replay) {
        auto hit = cassette->lookup(record.prompt_hash, run_index);
        if (!hit)
            throw CassetteMissError("no recorded response for prompt " +
                                    record.prompt_hash.substr(0, 12) + " run " +
                                    std::to_string(run_index) + " (scenario " +
                                    prompt.scenario_id + ", " + record.strategy + ")");
        record.raw_text = *hit;
        return record;
    }

    auto adapter = make_adapter(config);
    auto begin = std::chrono::steady_clock::now();
    record.raw_text = adapter->complete(prompt.text, record.provider_meta);
    auto end = std::chrono::steady_clock::now();
    record.latency_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - begin)
            .count();

    if (mode == CassetteMode::record)
        cassette->store(record.prompt_hash, run_index, record.raw_text);
    return record;
}

std::vector<CompletionRecord> run_batch(const corpus::RefactoringScenario& scenario,
                                        prompt::Strategy strategy,
                                        const corpus::Catalog& catalog,
                                        const prompt::TemplateStore& store,
                                        const ModelConfig& config, int runs,
                                        Cassette* cassette,
                                        std::vector<std::string>* warnings) {
    std::vector<CompletionRecord> records;
    if (runs <= 0) {
        if (warnings)
            warnings->push_back("scenario " + scenario.id + ": runs=" +
                                std::to_string(runs) + ", nothing to do");
        return records;
    }

    const corpus::CatalogEntry* entry = nullptr;
    if (strategy != prompt::Strategy::objective)
        entry = &catalog.lookup(scenario.refactoring_type);
    prompt::RenderedPrompt rendered = prompt::render(strategy, scenario, entry, store);
    if (warnings)
        for (const auto& warning : rendered.warnings)
            warnings->push_back("scenario " + scenario.id + ": " + warning);

    for (int run = 1; run <= runs; ++run) {
        try {
            records.push_back(complete(rendered, config, run, cassette));
        } catch (const TransportError& e) {
            CompletionRecord failed;
            failed.scenario_id = scenario.id;
            failed.strategy = prompt::strategy_name(strategy);
            failed.run_index = run;
            failed.prompt_hash = prompt_hash(rendered.text);
            failed.failed = true;
            failed.failure_reason = std::string("transport: ") + e.what();
            records.push_back(std::move(failed));
        } catch (const CassetteMissError& e) {
            CompletionRecord failed;
            failed.scenario_id = scenario.id;
            failed.strategy = prompt::strategy_name(strategy);
            failed.run_index = run;
            failed.prompt_hash = prompt_hash(rendered.text);
            failed.failed = true;
            failed.failure_reason = std::string("cassette-miss: ") + e.what();
            records.push_back(std::move(failed));
        }
    }
    return records;
}

const char* cassette_mode_name(CassetteMode mode) {
    switch (mode) {
    case CassetteMode::record: return "record";
    case CassetteMode::replay: return "replay";
    case CassetteMode::passthrough: return "passthrough";
    }
    return "unknown";
}

std::optional<CassetteMode> cassette_mode_from_name(const std::string& name) {
    std::string n = strings::trim(name);
    if (n == "record") return CassetteMode::record;
    if (n == "replay") return CassetteMode::replay;
    if (n == "passthrough" || n == "off") return CassetteMode::passthrough;
    return std::nullopt;
}

} // namespace reflab::gateway
