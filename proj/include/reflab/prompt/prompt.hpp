#pragma once

#include "reflab/corpus/corpus.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reflab::prompt {

enum class Strategy { zero_shot, two_shot, step_by_step, rule_based, objective };

constexpr Strategy kAllStrategies[] = {Strategy::zero_shot, Strategy::two_shot,
                                       Strategy::step_by_step, Strategy::rule_based,
                                       Strategy::objective};

struct RenderedPrompt {
    std::string text;
    Strategy strategy = Strategy::zero_shot;
    std::string scenario_id;
    std::string template_version;
    std::vector<std::string> warnings;
};

// Loads the five strategy templates plus the judge template from a directory;
// template_version = VERSION file content + content hash, recorded on every
// rendered prompt so historical runs stay attributable.
class TemplateStore {
public:
    static TemplateStore load(const std::filesystem::path& dir);

    const std::string& text(Strategy strategy) const;
    const std::string& judge_text() const { return judge_; }
    const std::string& version() const { return version_; }

private:
    std::string zero_shot_, two_shot_, step_by_step_, rule_based_, objective_, judge_;
    std::string version_;
};

// Strategy dispatch. Applies the precondition checks (usable examples,
// mechanics, rule) and throws UnsupportedStrategyError naming the type.
// Objective needs no catalog entry; entry may be null there.
RenderedPrompt render(Strategy strategy, const corpus::RefactoringScenario& scenario,
                      const corpus::CatalogEntry* entry, const TemplateStore& store);

RenderedPrompt render_zero_shot(const corpus::RefactoringScenario& scenario,
                                const corpus::CatalogEntry& entry,
                                const TemplateStore& store);
RenderedPrompt render_two_shot(const corpus::RefactoringScenario& scenario,
                               const corpus::CatalogEntry& entry, const TemplateStore& store);
RenderedPrompt render_step_by_step(const corpus::RefactoringScenario& scenario,
                                   const corpus::CatalogEntry& entry,
                                   const TemplateStore& store);
RenderedPrompt render_rule_based(const corpus::RefactoringScenario& scenario,
                                 const corpus::CatalogEntry& entry,
                                 const TemplateStore& store);
RenderedPrompt render_objective(const corpus::RefactoringScenario& scenario,
                                const TemplateStore& store);

// The renderable subset for a type. Throws UnknownTypeError.
std::set<Strategy> supported_strategies(const std::string& refactoring_type,
                                        const corpus::Catalog& catalog);

const char* strategy_name(Strategy strategy);
std::optional<Strategy> strategy_from_name(const std::string& name);

} // namespace reflab::prompt
