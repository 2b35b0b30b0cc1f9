// Schema import resolution: schemata are ordinary diagram fragments
// whose declarations get merged into the importing diagram.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "i2d/dsl.hpp"

namespace i2d {

namespace {

struct MergeContext {
    const SchemaLoader* loader;
    std::set<std::string> loading; // cycle detection
    std::set<std::string> done;
};

void mergeClassRegistry(const std::string& schema, const char* kind,
                        const SymbolSet& incoming, SymbolSet& target,
                        const SymbolSet& otherA, const SymbolSet& otherB) {
    for (const auto& c : incoming) {
        if (otherA.contains(c) || otherB.contains(c))
            throw SchemaError("schema '" + schema + "' declares class '" + c +
                              "' as " + kind +
                              " class, conflicting with an existing "
                              "declaration of another kind");
        target.insert(c);
    }
}

template <typename T>
void mergeUnique(std::vector<T>& into, const std::vector<T>& from) {
    for (const auto& element : from) {
        bool present = false;
        for (const auto& existing : into)
            if (existing == element) {
                present = true;
                break;
            }
        if (!present) into.push_back(element);
    }
}

void mergeSchema(Diagram& target, const std::string& name, MergeContext& ctx);

void mergeImports(Diagram& target, const std::vector<std::string>& imports,
                  MergeContext& ctx) {
    for (const auto& name : imports) mergeSchema(target, name, ctx);
}

void mergeSchema(Diagram& target, const std::string& name, MergeContext& ctx) {
    if (ctx.done.count(name)) return;
    if (!ctx.loading.insert(name).second)
        throw SchemaError("import cycle involving schema '" + name + "'");
    auto text = (*ctx.loader)(name);
    if (!text)
        throw SchemaError("schema '" + name + "' was not found");
    ParseResult parsed = parse(*text, name + ".i2d");
    if (!parsed.diagram || !parsed.diagnostics.empty()) {
        std::string message = "schema '" + name + "' does not parse";
        for (const auto& d : parsed.diagnostics)
            message += "\n  " + d.render();
        throw SchemaError(message);
    }
    const Diagram& schema = *parsed.diagram;
    mergeImports(target, schema.imports, ctx);

    mergeClassRegistry(name, "an item", schema.itemClasses, target.itemClasses,
                       target.entityClasses, target.flowClasses);
    mergeClassRegistry(name, "an entity", schema.entityClasses,
                       target.entityClasses, target.itemClasses,
                       target.flowClasses);
    mergeClassRegistry(name, "a flow", schema.flowClasses, target.flowClasses,
                       target.itemClasses, target.entityClasses);
    mergeUnique(target.rules, schema.rules);
    mergeUnique(target.entityRules, schema.entityRules);
    mergeUnique(target.requirements, schema.requirements);
    // Template entities and flows: identical re-declarations are
    // idempotent, diverging ones are conflicts.
    for (const auto& entity : schema.entities) {
        if (const Entity* existing = target.findEntity(entity.name)) {
            if (!(*existing == entity))
                throw SchemaError("schema '" + name +
                                  "' redefines entity '" + entity.name + "'");
            continue;
        }
        target.entities.push_back(entity);
    }
    for (const auto& flow : schema.flows) {
        if (const Flow* existing = target.findFlow(flow.name)) {
            if (!(*existing == flow))
                throw SchemaError("schema '" + name + "' redefines flow '" +
                                  flow.name + "'");
            continue;
        }
        target.flows.push_back(flow);
    }
    ctx.loading.erase(name);
    ctx.done.insert(name);
}

} // namespace

Diagram resolveImports(const Diagram& diagram, const SchemaLoader& loader) {
    Diagram out = diagram;
    MergeContext ctx{&loader, {}, {}};
    mergeImports(out, out.imports, ctx);
    return out;
}

SchemaLoader directoryLoader(std::vector<std::string> directories) {
    return [dirs = std::move(directories)](
               const std::string& name) -> std::optional<std::string> {
        for (const auto& dir : dirs) {
            std::filesystem::path path =
                std::filesystem::path(dir) / (name + ".i2d");
            std::ifstream in(path);
            if (!in) continue;
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        }
        return std::nullopt;
    };
}

std::vector<std::string> schemaSearchPath(
    const std::vector<std::string>& explicitDirs,
    const std::string& importingFile) {
    std::vector<std::string> dirs = explicitDirs;
    if (!importingFile.empty() && importingFile != "-") {
        auto parent = std::filesystem::path(importingFile).parent_path();
        dirs.push_back(parent.empty() ? "." : parent.string());
    }
    if (const char* env = std::getenv("I2D_PATH")) {
        std::string raw(env);
        std::size_t start = 0;
        while (start <= raw.size()) {
            std::size_t end = raw.find(':', start);
            if (end == std::string::npos) end = raw.size();
            if (end > start) dirs.push_back(raw.substr(start, end - start));
            start = end + 1;
        }
    }
    return dirs;
}

} // namespace i2d
