#include "reflab/prompt/prompt.hpp"
#include "reflab/support/errors.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace reflab;

namespace {

const prompt::TemplateStore& store() {
    static prompt::TemplateStore s = prompt::TemplateStore::load(REFLAB_TEMPLATE_DIR);
    return s;
}

corpus::RefactoringScenario scenario() {
    corpus::RefactoringScenario s;
    s.id = "42";
    s.refactoring_type = "extract method";
    s.before_code = "int f() { a(); b(); return 1; }";
    s.dataset = corpus::Dataset::benchmark;
    return s;
}

corpus::CatalogEntry full_entry() {
    corpus::CatalogEntry e;
    e.name = "Extract Method";
    e.mechanics_steps = {"Create a new method named after its intention.",
                         "Copy the extracted code into the new method.",
                         "Replace the extracted code with a call."};
    e.examples = {{"int f() { a(); b(); }", "int f() { g(); } void g() { a(); b(); }"},
                  {"int h() { c(); d(); }", "int h() { k(); } void k() { c(); d(); }"}};
    e.rule_text = "A contiguous statement sequence is moved into a new method "
                  "and replaced by one call to it.";
    return e;
}

bool fully_substituted(const std::string& text) {
    return text.find("$<") == std::string::npos;
}

} // namespace

TEST_CASE("template version combines the tag with a content hash") {
    const std::string& v = store().version();
    CHECK(v.substr(0, 3) == "v1+");
    CHECK(v.size() == 3 + 12);
}

TEST_CASE("zero-shot prompt names the refactoring and embeds the code") {
    auto p = prompt::render_zero_shot(scenario(), full_entry(), store());
    CHECK(p.strategy == prompt::Strategy::zero_shot);
    CHECK(p.scenario_id == "42");
    CHECK(p.template_version == store().version());
    CHECK(fully_substituted(p.text));
    CHECK(p.text.find("Extract Method") != std::string::npos);
    CHECK(p.text.find(scenario().before_code) != std::string::npos);
    CHECK(p.text.rfind("non-programming language content.") == p.text.size() - 33);
}

TEST_CASE("two-shot prompt carries two before/after examples") {
    auto p = prompt::render_two_shot(scenario(), full_entry(), store());
    CHECK(fully_substituted(p.text));
    CHECK(p.text.find("Example 1:") != std::string::npos);
    CHECK(p.text.find("Example 2:") != std::string::npos);
    CHECK(p.text.find("int f() { a(); b(); }") != std::string::npos);
    CHECK(p.text.find("void k() { c(); d(); }") != std::string::npos);
    CHECK(p.warnings.empty());
}

TEST_CASE("two-shot requires two usable examples") {
    auto entry = full_entry();
    entry.examples.resize(1);
    CHECK_THROWS_AS(prompt::render_two_shot(scenario(), entry, store()),
                    reflab::UnsupportedStrategyError);

    entry.illustrative_snippet = "class Before { } class After { }";
    auto p = prompt::render_two_shot(scenario(), entry, store());
    CHECK_FALSE(p.warnings.empty());
    CHECK(p.text.find("Example 2:") != std::string::npos);
}

TEST_CASE("step-by-step prompt numbers the mechanics") {
    auto p = prompt::render_step_by_step(scenario(), full_entry(), store());
    CHECK(fully_substituted(p.text));
    CHECK(p.text.find("1. Create a new method") != std::string::npos);
    CHECK(p.text.find("3. Replace the extracted code") != std::string::npos);
}

TEST_CASE("rule-based prompt requires a formal rule") {
    auto p = prompt::render_rule_based(scenario(), full_entry(), store());
    CHECK(p.text.find("contiguous statement sequence") != std::string::npos);

    auto entry = full_entry();
    entry.rule_text.reset();
    auto message = thrown_message<reflab::UnsupportedStrategyError>(
        [&] { prompt::render_rule_based(scenario(), entry, store()); });
    CHECK(message.find("Extract Method") != std::string::npos);
}

TEST_CASE("objective prompt never names the refactoring type") {
    auto p = prompt::render_objective(scenario(), store());
    CHECK(fully_substituted(p.text));
    CHECK(p.text.find("Extract Method") == std::string::npos);
    CHECK(p.text.find("extract method") == std::string::npos);
    CHECK(p.text.find(scenario().before_code) != std::string::npos);
}

TEST_CASE("dispatcher requires a catalog entry for catalog-driven strategies") {
    auto p = prompt::render(prompt::Strategy::objective, scenario(), nullptr, store());
    CHECK(p.strategy == prompt::Strategy::objective);
    CHECK_THROWS_AS(prompt::render(prompt::Strategy::two_shot, scenario(), nullptr, store()),
                    reflab::UnsupportedStrategyError);
    auto entry = full_entry();
    auto q = prompt::render(prompt::Strategy::rule_based, scenario(), &entry, store());
    CHECK(q.strategy == prompt::Strategy::rule_based);
}

TEST_CASE("empty scenario code renders with a warning") {
    auto s = scenario();
    s.before_code = "";
    auto p = prompt::render_zero_shot(s, full_entry(), store());
    CHECK_FALSE(p.warnings.empty());
}

TEST_CASE("supported strategies reflect catalog coverage") {
    corpus::Catalog catalog;
    auto entry = full_entry();
    catalog.entries["EXTRACT METHOD"] = entry;
    corpus::CatalogEntry bare;
    bare.name = "Pull Up Field";
    bare.mechanics_steps = {"Move the field to the superclass."};
    catalog.entries["PULL UP FIELD"] = bare;

    auto rich = prompt::supported_strategies("Extract Method", catalog);
    CHECK(rich.size() == 5);

    auto sparse = prompt::supported_strategies("Pull Up Field", catalog);
    CHECK(sparse.count(prompt::Strategy::zero_shot) == 1);
    CHECK(sparse.count(prompt::Strategy::step_by_step) == 1);
    CHECK(sparse.count(prompt::Strategy::objective) == 1);
    CHECK(sparse.count(prompt::Strategy::two_shot) == 0);
    CHECK(sparse.count(prompt::Strategy::rule_based) == 0);

    CHECK_THROWS_AS(prompt::supported_strategies("No Such Type", catalog),
                    reflab::UnknownTypeError);
}

TEST_CASE("strategy names round-trip and accept loose spellings") {
    for (auto s : prompt::kAllStrategies) {
        auto back = prompt::strategy_from_name(prompt::strategy_name(s));
        REQUIRE(back.has_value());
        CHECK(*back == s);
    }
    CHECK(prompt::strategy_from_name("Step-by-Step") == prompt::Strategy::step_by_step);
    CHECK(prompt::strategy_from_name("two shot") == prompt::Strategy::two_shot);
    CHECK_FALSE(prompt::strategy_from_name("three_shot").has_value());
}

TEST_CASE("judge template is loaded with its placeholders intact") {
    const std::string& judge = store().judge_text();
    CHECK(judge.find("$<initial_code>$") != std::string::npos);
    CHECK(judge.find("$<refactoring_name>$") != std::string::npos);
    CHECK(judge.find("$<final_code>$") != std::string::npos);
    CHECK(judge.find("nothing else.") != std::string::npos);
}
