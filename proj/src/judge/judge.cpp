#include "reflab/judge/judge.hpp"

#include "reflab/support/errors.hpp"
#include "reflab/support/strings.hpp"

namespace reflab::judge {

std::string render_judge_prompt(const prompt::TemplateStore& store,
                                const std::string& before_code,
                                const std::string& after_code,
                                const std::string& refactoring_type) {
    std::string text = store.judge_text();
    text = strings::replace_all(text, "$<initial_code>$", before_code);
    text = strings::replace_all(text, "$<refactoring_name>$", refactoring_type);
    text = strings::replace_all(text, "$<final_code>$", after_code);
    return text;
}

std::optional<bool> parse_verdict(const std::string& raw_reply) {
    std::string trimmed = strings::trim(raw_reply);
    if (trimmed == "1") return true;
    if (trimmed == "0") return false;
    return std::nullopt;
}

JudgeVerdict judge(const JudgeRequest& request, const gateway::ModelConfig& judge_config,
                   const prompt::TemplateStore& store, gateway::Cassette* cassette) {
    if (judge_config.model_name == request.generator_model)
        throw ConfigurationError("judge model '" + judge_config.model_name +
                                 "' must differ from the generator model");

    prompt::RenderedPrompt rendered;
    rendered.text = render_judge_prompt(store, request.before_code, request.after_code,
                                        request.refactoring_type);
    rendered.scenario_id = request.scenario_id;
    rendered.template_version = store.version();

    auto completion =
        gateway::complete(rendered, judge_config, request.run_index, cassette);

    JudgeVerdict verdict;
    verdict.scenario_id = request.scenario_id;
    verdict.strategy = request.strategy;
    verdict.judge_model = judge_config.model_name;
    verdict.raw_reply = completion.raw_text;
    verdict.verdict = parse_verdict(completion.raw_text);
    return verdict;
}

} // namespace reflab::judge
