#include "reflab/prompt/prompt.hpp"

#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"
#include "reflab/support/sha256.hpp"
#include "reflab/support/strings.hpp"

namespace reflab::prompt {

namespace {

// Trailing whitespace is stripped so every prompt ends on the cleaning
// directive sentence itself.
std::string load_template(const std::filesystem::path& dir, const char* file) {
    std::string text = read_file(dir / file);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

std::string render_examples(const corpus::CatalogEntry& entry,
                            std::vector<std::string>* warnings) {
    std::vector<std::string> bodies;
    for (const auto& example : entry.examples) {
        if (!example.before_text.empty())
            bodies.push_back("Before:\n" + example.before_text + "\nAfter:\n" +
                             example.after_text);
        else
            bodies.push_back(example.after_text);
        if (bodies.size() == 2) break;
    }
    if (bodies.size() < 2 && entry.illustrative_snippet) {
        bodies.push_back(*entry.illustrative_snippet);
        if (warnings)
            warnings->push_back("second example drawn from the illustrative snippet");
    }
    if (bodies.size() < 2)
        throw UnsupportedStrategyError("type '" + entry.name +
                                       "' has fewer than 2 usable examples");

    std::string out;
    for (size_t i = 0; i < bodies.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += "Example " + std::to_string(i + 1) + ":\n" + bodies[i];
    }
    return out;
}

std::string render_steps(const corpus::CatalogEntry& entry) {
    if (entry.mechanics_steps.empty())
        throw UnsupportedStrategyError("type '" + entry.name + "' has no mechanics steps");
    std::string out;
    for (size_t i = 0; i < entry.mechanics_steps.size(); ++i) {
        if (i > 0) out += '\n';
        out += std::to_string(i + 1) + ". " + entry.mechanics_steps[i];
    }
    return out;
}

RenderedPrompt finish(std::string text, Strategy strategy,
                      const corpus::RefactoringScenario& scenario,
                      const TemplateStore& store, std::vector<std::string> warnings) {
    if (strings::trim(scenario.before_code).empty())
        warnings.push_back("scenario '" + scenario.id + "' has empty before_code");
    RenderedPrompt prompt;
    prompt.text = std::move(text);
    prompt.strategy = strategy;
    prompt.scenario_id = scenario.id;
    prompt.template_version = store.version();
    prompt.warnings = std::move(warnings);
    return prompt;
}

} // namespace

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
    TemplateStore store;
    store.zero_shot_ = load_template(dir, "zero_shot.txt");
    store.two_shot_ = load_template(dir, "two_shot.txt");
    store.step_by_step_ = load_template(dir, "step_by_step.txt");
    store.rule_based_ = load_template(dir, "rule_based.txt");
    store.objective_ = load_template(dir, "objective.txt");
    store.judge_ = load_template(dir, "judge.txt");

    std::string label = "v0";
    if (std::filesystem::exists(dir / "VERSION"))
        label = strings::trim(read_file(dir / "VERSION"));
    std::string all = store.zero_shot_ + store.two_shot_ + store.step_by_step_ +
                      store.rule_based_ + store.objective_ + store.judge_;
    store.version_ = label + "+" + sha256_hex(all).substr(0, 12);
    return store;
}

const std::string& TemplateStore::text(Strategy strategy) const {
    switch (strategy) {
    case Strategy::zero_shot: return zero_shot_;
    case Strategy::two_shot: return two_shot_;
    case Strategy::step_by_step: return step_by_step_;
    case Strategy::rule_based: return rule_based_;
    case Strategy::objective: return objective_;
    }
    return zero_shot_;
}

RenderedPrompt render_zero_shot(const corpus::RefactoringScenario& scenario,
                                const corpus::CatalogEntry& entry,
                                const TemplateStore& store) {
    std::string text = store.text(Strategy::zero_shot);
    text = strings::replace_all(text, "$<refactoring_name>$", entry.name);
    text = strings::replace_all(text, "$<code>$", scenario.before_code);
    return finish(std::move(text), Strategy::zero_shot, scenario, store, {});
}

RenderedPrompt render_two_shot(const corpus::RefactoringScenario& scenario,
                               const corpus::CatalogEntry& entry,
                               const TemplateStore& store) {
    std::vector<std::string> warnings;
    std::string examples = render_examples(entry, &warnings);
    std::string text = store.text(Strategy::two_shot);
    text = strings::replace_all(text, "$<refactoring_name>$", entry.name);
    text = strings::replace_all(text, "$<refactoring_examples>$", examples);
    text = strings::replace_all(text, "$<code>$", scenario.before_code);
    return finish(std::move(text), Strategy::two_shot, scenario, store, std::move(warnings));
}

RenderedPrompt render_step_by_step(const corpus::RefactoringScenario& scenario,
                                   const corpus::CatalogEntry& entry,
                                   const TemplateStore& store) {
    std::string text = store.text(Strategy::step_by_step);
    text = strings::replace_all(text, "$<refactoring_name>$", entry.name);
    text = strings::replace_all(text, "$<steps>$", render_steps(entry));
    text = strings::replace_all(text, "$<code>$", scenario.before_code);
    return finish(std::move(text), Strategy::step_by_step, scenario, store, {});
}

RenderedPrompt render_rule_based(const corpus::RefactoringScenario& scenario,
                                 const corpus::CatalogEntry& entry,
                                 const TemplateStore& store) {
    if (!entry.rule_text)
        throw UnsupportedStrategyError("type '" + entry.name + "' has no associated rule");
    std::string text = store.text(Strategy::rule_based);
    text = strings::replace_all(text, "$<refactoring_name>$", entry.name);
    text = strings::replace_all(text, "$<rule>$", *entry.rule_text);
    text = strings::replace_all(text, "$<code>$", scenario.before_code);
    return finish(std::move(text), Strategy::rule_based, scenario, store, {});
}

RenderedPrompt render_objective(const corpus::RefactoringScenario& scenario,
                                const TemplateStore& store) {
    std::string text = store.text(Strategy::objective);
    text = strings::replace_all(text, "$<code>$", scenario.before_code);
    return finish(std::move(text), Strategy::objective, scenario, store, {});
}

RenderedPrompt render(Strategy strategy, const corpus::RefactoringScenario& scenario,
                      const corpus::CatalogEntry* entry, const TemplateStore& store) {
    if (strategy == Strategy::objective) return render_objective(scenario, store);
    if (!entry)
        throw UnsupportedStrategyError(std::string("strategy ") + strategy_name(strategy) +
                                       " needs catalog material");
    switch (strategy) {
    case Strategy::zero_shot: return render_zero_shot(scenario, *entry, store);
    case Strategy::two_shot: return render_two_shot(scenario, *entry, store);
    case Strategy::step_by_step: return render_step_by_step(scenario, *entry, store);
    case Strategy::rule_based: return render_rule_based(scenario, *entry, store);
    case Strategy::objective: break;
    }
    return render_objective(scenario, store);
}

std::set<Strategy> supported_strategies(const std::string& refactoring_type,
                                        const corpus::Catalog& catalog) {
    const corpus::CatalogEntry& entry = catalog.lookup(refactoring_type);
    std::set<Strategy> out{Strategy::zero_shot, Strategy::objective};
    if (!entry.mechanics_steps.empty()) out.insert(Strategy::step_by_step);
    size_t usable_examples = entry.examples.size();
    if (usable_examples < 2 && entry.illustrative_snippet) ++usable_examples;
    if (usable_examples >= 2) out.insert(Strategy::two_shot);
    if (entry.rule_text) out.insert(Strategy::rule_based);
    return out;
}

const char* strategy_name(Strategy strategy) {
    switch (strategy) {
    case Strategy::zero_shot: return "zero_shot";
    case Strategy::two_shot: return "two_shot";
    case Strategy::step_by_step: return "step_by_step";
    case Strategy::rule_based: return "rule_based";
    case Strategy::objective: return "objective";
    }
    return "unknown";
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
    std::string n = strings::normalize_type_name(name);
    for (Strategy s : kAllStrategies)
        if (n == strings::normalize_type_name(strategy_name(s))) return s;
    if (n == "ZERO-SHOT") return Strategy::zero_shot;
    if (n == "TWO-SHOT") return Strategy::two_shot;
    if (n == "STEP-BY-STEP") return Strategy::step_by_step;
    if (n == "RULE-BASED") return Strategy::rule_based;
    return std::nullopt;
}

} // namespace reflab::prompt
