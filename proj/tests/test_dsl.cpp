#include <doctest.h>

#include "i2d/dsl.hpp"
#include "i2d/validate.hpp"
#include "support/corpus.hpp"
#include "support/fixtures.hpp"

using namespace i2d;

TEST_CASE("an entity with one item parses") {
    ParseResult result = parse("entity DB { item UserData; }");
    REQUIRE(result.ok());
    const Entity* db = result.diagram->findEntity("DB");
    REQUIRE(db != nullptr);
    REQUIRE(db->items.size() == 1);
    CHECK(db->items[0].name == "UserData");
    CHECK(db->items[0].grade == 1.0); // omitted grade defaults to 1
}

TEST_CASE("empty input yields an empty, valid diagram") {
    ParseResult result = parse("");
    REQUIRE(result.ok());
    CHECK(result.diagram->entities.empty());
    CHECK(validate(*result.diagram).ok());
    CHECK(print(*result.diagram).empty());
}

TEST_CASE("negated class atoms parse into class-based rules") {
    ParseResult result = parse("rule c(x), !d(x) |- i;");
    REQUIRE(result.ok());
    REQUIRE(result.diagram->rules.size() == 1);
    const Rule& rule = result.diagram->rules[0];
    CHECK(rule.kind() == RuleKind::ClassBased);
    REQUIRE(rule.premises.size() == 1); // atoms on x merge into one pattern
    CHECK(rule.premises[0].var == "x");
    CHECK(rule.premises[0].required.contains("c"));
    CHECK(rule.premises[0].forbidden.contains("d"));
    CHECK_FALSE(rule.premises[0].open);
}

TEST_CASE("rule forms and shorthands normalize") {
    ParseResult result = parse("entity E { item a : k; }\n"
                               "rule on scope a:k |- @0.5 b, x;\n"
                               "rule k(x), *v(x) => j;\n"
                               "rule *w(y) |- out:d+*w;\n");
    REQUIRE(result.ok());
    const auto& rules = result.diagram->rules;
    REQUIRE(rules.size() == 3);
    CHECK(rules[0].kind() == RuleKind::Inference);
    CHECK(rules[0].probability == 0.5);
    CHECK(rules[0].scope.contains("scope"));
    CHECK_FALSE(rules[0].outcomes[1].fromVar); // x unbound here: item name
    CHECK(rules[1].kind() == RuleKind::RewriteArrow);
    CHECK(rules[1].premises[0].captureVar == "v");
    CHECK(rules[1].premises[0].open);
    CHECK(rules[2].premises[0].captureVar == "w");
    REQUIRE(rules[2].outcomes[0].classes.size() == 2);
    CHECK(rules[2].outcomes[0].classes[1].isVar);
}

TEST_CASE("unicode aliases match their ascii forms") {
    ParseResult a = parse("entity E { item p; }\nrule p ⊢ q;\n"
                          "require p ∈ E;\nrequire q ∉ E;\n");
    ParseResult b = parse("entity E { item p; }\nrule p |- q;\n"
                          "require p in E;\nrequire q not-in E;\n");
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(structurallyEqual(*a.diagram, *b.diagram));
}

TEST_CASE("anonymous flows receive generated names") {
    ParseResult result = parse("entity A; entity B;\nflow A -> B [x];\n"
                               "flow A -> B [y];\n");
    REQUIRE(result.ok());
    REQUIRE(result.diagram->flows.size() == 2);
    CHECK(result.diagram->flows[0].name == "f1");
    CHECK(result.diagram->flows[1].name == "f2");
}

TEST_CASE("syntax errors carry a location and expectations") {
    ParseResult result = parse("entity {", "bad.i2d");
    REQUIRE_FALSE(result.ok());
    REQUIRE_FALSE(result.diagnostics.empty());
    const Diagnostic& d = result.diagnostics.front();
    CHECK(d.loc.line == 1);
    CHECK(d.loc.column == 8);
    CHECK(d.message.find("expected") != std::string::npos);
    CHECK(d.render().find("bad.i2d:1:8") != std::string::npos);
}

TEST_CASE("semantic problems are reported with the declaration site") {
    ParseResult result = parse("entity A;\nentity A;\n");
    REQUIRE_FALSE(result.ok());
    CHECK(result.diagnostics.front().loc.line == 2);

    result = parse("require x in Nowhere;");
    REQUIRE_FALSE(result.ok());
    CHECK(result.diagnostics.front().message.find("Nowhere") !=
          std::string::npos);
}

TEST_CASE("exceptions need the wildcard target") {
    ParseResult result = parse("entity A; entity B;\nrequire x in A \\ B;\n");
    REQUIRE_FALSE(result.ok());

    result = parse("entity A; entity B;\nrequire x in * \\ B;\n");
    REQUIRE(result.ok());
}

TEST_CASE("the web fixture survives a print round trip") {
    Diagram d = i2d::testing::loadFixture("fig2.i2d");
    ParseResult reparsed = parse(print(d));
    REQUIRE(reparsed.ok());
    CHECK(structurallyEqual(d, *reparsed.diagram));
    // canonical printing is a fixed point
    CHECK(print(d) == print(*reparsed.diagram));
}

TEST_CASE("all hand-written fixtures survive a print round trip") {
    for (const char* name : {"fig2.i2d", "fig4a.i2d", "fig4b.i2d",
                             "fig4c.i2d", "fig4d.i2d", "fig2_skeleton.i2d"}) {
        CAPTURE(name);
        Diagram d = i2d::testing::loadFixture(name);
        ParseResult reparsed = parse(print(d));
        REQUIRE(reparsed.ok());
        CHECK(structurallyEqual(d, *reparsed.diagram));
    }
}

TEST_CASE("randomized diagrams survive a print round trip") {
    for (std::uint32_t seed = 1; seed <= 300; ++seed) {
        CAPTURE(seed);
        i2d::testing::CorpusOptions options;
        options.rewriteArrows = true;
        Diagram d = i2d::testing::randomDiagram(seed, options);
        REQUIRE(validate(d).ok());
        const std::string text = print(d);
        ParseResult reparsed = parse(text);
        if (!reparsed.ok()) {
            for (const auto& diag : reparsed.diagnostics) CAPTURE(diag.render());
            CAPTURE(text);
            REQUIRE(reparsed.ok());
        }
        CHECK(structurallyEqual(d, *reparsed.diagram));
    }
}

TEST_CASE("schema imports merge classes and rules") {
    const std::string text = "use \"protocols\";\n"
                             "entity Net { item handshake : TCP; }\n";
    ParseResult result = parse(text);
    REQUIRE(result.ok());
    auto loader = directoryLoader({i2d::testing::schemaDir()});
    Diagram resolved = resolveImports(*result.diagram, loader);
    CHECK(resolved.itemClasses.contains("TCP"));
    CHECK(resolved.itemClasses.contains("TLS"));
    CHECK(resolved.rules.size() == 2);
}

TEST_CASE("a diagram without imports is unchanged by resolution") {
    Diagram d = i2d::testing::loadFixture("fig2.i2d");
    Diagram resolved = resolveImports(d, directoryLoader({}));
    CHECK(structurallyEqual(d, resolved));
}

TEST_CASE("duplicate declarations across schemata are idempotent") {
    auto loader = [](const std::string& name) -> std::optional<std::string> {
        if (name == "a") return "class item shared;\nrule shared(x) |- out;\n";
        if (name == "b") return "class item shared;\nrule shared(x) |- out;\n";
        return std::nullopt;
    };
    ParseResult result = parse("use \"a\";\nuse \"b\";\n");
    REQUIRE(result.ok());
    Diagram resolved = resolveImports(*result.diagram, loader);
    CHECK(resolved.itemClasses.size() == 1);
    CHECK(resolved.rules.size() == 1);

    // resolution order does not matter for compatible schemata
    ParseResult swapped = parse("use \"b\";\nuse \"a\";\n");
    Diagram resolvedSwapped = resolveImports(*swapped.diagram, loader);
    CHECK(resolved.itemClasses == resolvedSwapped.itemClasses);
    CHECK(resolved.rules == resolvedSwapped.rules);
}

TEST_CASE("schema errors: missing, cyclic, and conflicting imports") {
    ParseResult missing = parse("use \"nope\";\n");
    CHECK_THROWS_AS(resolveImports(*missing.diagram, directoryLoader({})),
                    SchemaError);

    auto cyclic = [](const std::string& name) -> std::optional<std::string> {
        if (name == "x") return "use \"y\";\n";
        if (name == "y") return "use \"x\";\n";
        return std::nullopt;
    };
    ParseResult cycle = parse("use \"x\";\n");
    CHECK_THROWS_AS(resolveImports(*cycle.diagram, cyclic), SchemaError);

    auto conflicting =
        [](const std::string& name) -> std::optional<std::string> {
        if (name == "k") return "class entity twist;\n";
        return std::nullopt;
    };
    ParseResult conflict = parse("class item twist;\nuse \"k\";\n");
    CHECK_THROWS_AS(resolveImports(*conflict.diagram, conflicting),
                    SchemaError);
}
