#pragma once

#include "reflab/gateway/gateway.hpp"
#include "reflab/prompt/prompt.hpp"

#include <optional>
#include <string>

namespace reflab::judge {

struct JudgeVerdict {
    std::string scenario_id;
    std::string strategy;
    std::optional<bool> verdict; // empty = unparseable reply
    std::string judge_model;
    std::string raw_reply;

    bool parse_failed() const { return !verdict.has_value(); }
};

// Fills the judge template with the initial code, the refactoring name, and
// the final code. Deterministic in its inputs.
std::string render_judge_prompt(const prompt::TemplateStore& store,
                                const std::string& before_code,
                                const std::string& after_code,
                                const std::string& refactoring_type);

// Strict parse: the reply must be "1" or "0" after trimming.
std::optional<bool> parse_verdict(const std::string& raw_reply);

struct JudgeRequest {
    std::string scenario_id;
    std::string strategy;
    std::string before_code;
    std::string after_code;
    std::string refactoring_type;
    std::string generator_model; // model that produced after_code
    int run_index = 1;
};

// Cross-judging is enforced: judge_config.model_name must differ from the
// generator model, otherwise a configuration error. Unparseable replies come
// back as verdict-less records, not errors.
JudgeVerdict judge(const JudgeRequest& request, const gateway::ModelConfig& judge_config,
                   const prompt::TemplateStore& store, gateway::Cassette* cassette);

} // namespace reflab::judge
