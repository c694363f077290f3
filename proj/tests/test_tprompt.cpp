// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <regex>

#include "vtprompt/rng.hpp"
#include "vtprompt/tprompt.hpp"

using namespace vtp;

namespace {
const Options kOptions{{"A", "two giraffes"}, {"B", "three giraffes"}, {"C", "one giraffe"}};
const TaskKind kYesNoTask = TaskKind::mme("existence");
const TaskKind kOptionTask = TaskKind::mmb("object_localization");
} // namespace

TEST_CASE("plain prompt is the question plus a format instruction") {
    auto p = build_answer_prompt("Is there a cat?", {}, PromptStrategy::Plain);
    CHECK(p.text.find("Is there a cat?") != std::string::npos);
    CHECK(p.text.find("yes") != std::string::npos);
    CHECK(p.text.find("Step 1") == std::string::npos);
}

TEST_CASE("tprompt carries the three steps in order") {
    auto p = build_answer_prompt("How many giraffes?", kOptions, PromptStrategy::TPrompt);
    CHECK(p.text.find("How many giraffes?") != std::string::npos);

    std::regex steps(R"(Step 1\.[\s\S]*Step 2\.[\s\S]*Step 3\.)");
    CHECK(std::regex_search(p.text, steps));

    auto s1 = p.text.find("Step 1.");
    auto s2 = p.text.find("Step 2.");
    auto s3 = p.text.find("Step 3.");
    REQUIRE(s1 != std::string::npos);
    REQUIRE(s2 != std::string::npos);
    REQUIRE(s3 != std::string::npos);
    CHECK(s1 < s2);
    CHECK(s2 < s3);
    // question follows the guidance steps
    CHECK(s3 < p.text.find("How many giraffes?"));
}

TEST_CASE("prompts are deterministic") {
    for (auto strategy : {PromptStrategy::Plain, PromptStrategy::ZeroShotCoT,
                          PromptStrategy::LeastToMost, PromptStrategy::TPrompt}) {
        auto a = build_answer_prompt("Q text?", kOptions, strategy);
        auto b = build_answer_prompt("Q text?", kOptions, strategy);
        CHECK(a.text == b.text);
    }
}

TEST_CASE("strategy markers") {
    auto cot = build_answer_prompt("Q?", {}, PromptStrategy::ZeroShotCoT);
    CHECK(cot.text.find("step by step") != std::string::npos);
    auto ltm = build_answer_prompt("Q?", {}, PromptStrategy::LeastToMost);
    CHECK(ltm.text.find("subquestion") != std::string::npos);
}

TEST_CASE("empty question is rejected for every strategy") {
    for (auto strategy : {PromptStrategy::Plain, PromptStrategy::ZeroShotCoT,
                          PromptStrategy::LeastToMost, PromptStrategy::TPrompt}) {
        CHECK_THROWS_AS(build_answer_prompt("", {}, strategy), Error);
    }
}

TEST_CASE("options render with their letters") {
    auto p = build_answer_prompt("Q?", kOptions, PromptStrategy::Plain);
    CHECK(p.text.find("A. two giraffes") != std::string::npos);
    CHECK(p.text.find("C. one giraffe") != std::string::npos);
}

TEST_CASE("leading yes parses as Exact") {
    auto a = parse_answer("Yes, there are two giraffes.", kYesNoTask, {});
    CHECK(a.is_yes());
    CHECK(a.parse_path == ParsePath::Exact);

    auto b = parse_answer("  no", kYesNoTask, {});
    CHECK_FALSE(b.is_yes());
    CHECK(b.parse_path == ParsePath::Exact);
}

TEST_CASE("standalone yes/no later in the text parses as Pattern") {
    auto a = parse_answer("I believe the answer is yes.", kYesNoTask, {});
    CHECK(a.is_yes());
    CHECK(a.parse_path == ParsePath::Pattern);

    // "not" and "nothing" must not read as "no"
    CHECK_THROWS_AS(parse_answer("It is not possible to say; nothing is certain.", kYesNoTask, {}),
                    Error);
}

TEST_CASE("unclear yes/no answers raise UnparsableAnswer") {
    try {
        parse_answer("It is unclear.", kYesNoTask, {});
        FAIL("expected UnparsableAnswer");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnparsableAnswer);
    }
}

TEST_CASE("option letter patterns") {
    auto a = parse_answer("B. three giraffes", kOptionTask, kOptions);
    CHECK(*a.option_letter() == "B");
    CHECK(a.parse_path == ParsePath::Exact);

    auto b = parse_answer("The answer is (B)", kOptionTask, kOptions);
    CHECK(*b.option_letter() == "B");
    CHECK(b.parse_path == ParsePath::Pattern);

    auto c = parse_answer("C)", kOptionTask, kOptions);
    CHECK(*c.option_letter() == "C");
    CHECK(c.parse_path == ParsePath::Exact);

    auto d = parse_answer("A", kOptionTask, kOptions);
    CHECK(*d.option_letter() == "A");
}

TEST_CASE("option text substring is the fallback") {
    auto a = parse_answer("There are three giraffes visible.", kOptionTask, kOptions);
    CHECK(*a.option_letter() == "B");
    CHECK(a.parse_path == ParsePath::Fallback);
}

TEST_CASE("letters outside the option set never come back") {
    Options two{{"A", "left"}, {"B", "right"}};
    // "D." would match the pattern but D is not an option; "left" rescues it
    auto a = parse_answer("D. it is on the left", kOptionTask, two);
    CHECK(*a.option_letter() == "A");

    CHECK_THROWS_AS(parse_answer("D.", kOptionTask, two), Error);
}

TEST_CASE("ambiguous optionText matches are rejected") {
    Options overlap{{"A", "giraffe"}, {"B", "two giraffes"}};
    // both texts appear; no unique match
    CHECK_THROWS_AS(parse_answer("I see two giraffes here", kOptionTask, overlap), Error);
}

TEST_CASE("the article A with a space does not parse as option A") {
    CHECK_THROWS_AS(parse_answer("A giraffe stands tall", kOptionTask,
                                 Options{{"A", "##"}, {"B", "%%"}}),
                    Error);
}

TEST_CASE("parsing is total over random noise") {
    SplitMix64 rng(123);
    const std::string alphabet = "ABCDxyz()., yesno\n\t";
    for (int trial = 0; trial < 2000; ++trial) {
        std::string s;
        size_t len = rng.bounded(60);
        for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.bounded(alphabet.size())]);
        for (const TaskKind& task : {kYesNoTask, kOptionTask}) {
            try {
                auto parsed = parse_answer(s, task, kOptions);
                if (auto* letter = parsed.option_letter())
                    CHECK((*letter == "A" || *letter == "B" || *letter == "C"));
            } catch (const Error& e) {
                CHECK(e.code() == Errc::UnparsableAnswer);
            }
        }
    }
}
