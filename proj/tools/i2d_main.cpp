// Command-line front end: parse -> resolve imports -> expand -> evaluate
// -> check, plus transformations, views, and exports.
//
// Exit codes: 0 all requirements satisfied, 1 violations found,
// 2 model or usage error, 3 I/O failure.
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "i2d/dsl.hpp"
#include "i2d/engine.hpp"
#include "i2d/interop.hpp"
#include "i2d/norms.hpp"
#include "i2d/report.hpp"
#include "i2d/transforms.hpp"
#include "i2d/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitModelError = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string readInput(const std::string& path) {
    if (path == "-") {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void writeOutput(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
}

struct CommonOptions {
    double threshold = 0.0;
    std::string rewriteMode = "stratified";
    std::vector<std::string> traceTargets;
    std::vector<std::string> schemaPath;
    bool jsonOutput = false;

    i2d::EvalConfig evalConfig() const {
        i2d::EvalConfig config;
        config.rewriteMode = rewriteMode == "iterative"
                                 ? i2d::EvalConfig::RewriteMode::Iterative
                                 : i2d::EvalConfig::RewriteMode::Stratified;
        return config;
    }
};

void addCommonFlags(CLI::App* cmd, CommonOptions& opts, bool withThreshold) {
    if (withThreshold)
        cmd->add_option("--threshold", opts.threshold,
                        "membership grade that counts as access (default 0)")
            ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--rewrite-mode", opts.rewriteMode,
                    "rewrite arrow evaluation: stratified|iterative")
        ->check(CLI::IsMember({"stratified", "iterative"}));
    cmd->add_option("--trace", opts.traceTargets,
                    "derivation trace for ITEM[:classes]@ENTITY (repeatable)");
    cmd->add_option("--schema-path", opts.schemaPath,
                    "directory searched for imported schemata (repeatable)");
    cmd->add_flag("--json", opts.jsonOutput,
                  "line-delimited JSON records instead of text");
}

/// parse + imports + structural expansion + validation.
i2d::Diagram loadDiagram(const std::string& path, const CommonOptions& opts,
                         i2d::RunReport& report) {
    const std::string text = readInput(path);
    i2d::ParseResult parsed = i2d::parse(text, path);
    if (!parsed.ok()) {
        report.diagnostics = parsed.diagnostics;
        throw i2d::ModelError("parse failed");
    }
    auto loader =
        i2d::directoryLoader(i2d::schemaSearchPath(opts.schemaPath, path));
    i2d::Diagram resolved = i2d::resolveImports(*parsed.diagram, loader);
    i2d::Diagram expanded = i2d::expandStructuralRules(resolved);
    i2d::ValidationReport validation = i2d::validate(expanded);
    if (!validation.ok()) {
        for (const auto& issue : validation.issues)
            report.diagnostics.push_back(
                {{0, 0}, issue.where + ": " + issue.message, path});
        throw i2d::ModelError("validation failed");
    }
    return expanded;
}

std::pair<std::string, i2d::ItemKey> parseTraceTarget(const std::string& raw) {
    const auto at = raw.rfind('@');
    if (at == std::string::npos || at == 0 || at + 1 >= raw.size())
        throw i2d::ModelError("trace target must look like ITEM@ENTITY: '" +
                              raw + "'");
    std::string itemPart = raw.substr(0, at);
    std::string entity = raw.substr(at + 1);
    i2d::ItemKey key;
    const auto colon = itemPart.find(':');
    if (colon == std::string::npos) {
        key.name = itemPart;
    } else {
        key.name = itemPart.substr(0, colon);
        std::string classes = itemPart.substr(colon + 1);
        std::size_t start = 0;
        while (start <= classes.size()) {
            auto end = classes.find('+', start);
            if (end == std::string::npos) end = classes.size();
            if (end > start)
                key.classes.insert(classes.substr(start, end - start));
            start = end + 1;
        }
    }
    return {entity, key};
}

void fillEntityItems(i2d::RunReport& report, const i2d::Diagram& diagram,
                     const i2d::EvaluationState& state) {
    for (const i2d::Entity* leaf : diagram.leaves()) {
        const i2d::ItemSet& items = state.itemsAt(leaf->name);
        report.entityItems.push_back(
            {leaf->name, {items.begin(), items.end()}});
    }
    std::sort(report.entityItems.begin(), report.entityItems.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

void fillRequestedTraces(i2d::RunReport& report, const i2d::Diagram& diagram,
                         const i2d::EvaluationState& state,
                         const CommonOptions& opts) {
    for (const auto& raw : opts.traceTargets) {
        auto [entity, key] = parseTraceTarget(raw);
        report.traces.push_back(i2d::toReportTrace(
            i2d::trace(state, diagram, entity, key), diagram));
    }
}

/// Runs check/eval for one file; returns (exit code, rendered output).
std::pair<int, std::string> runPipeline(const std::string& path,
                                        const CommonOptions& opts,
                                        bool checkRequirements) {
    i2d::RunReport report;
    report.path = path;
    int code = kExitOk;
    try {
        i2d::Diagram diagram = loadDiagram(path, opts, report);
        i2d::EvaluationState state =
            i2d::evaluate(diagram, opts.evalConfig());
        report.evaluated = true;
        report.iterations = state.iterations;
        fillEntityItems(report, diagram, state);
        if (checkRequirements) {
            const auto verdicts = i2d::check(state, diagram, opts.threshold);
            for (const auto& verdict : verdicts) {
                i2d::ReportVerdict rendered;
                rendered.requirement = i2d::describeRequirement(
                    diagram.requirements[verdict.requirementIndex]);
                rendered.satisfied = verdict.satisfied;
                rendered.threshold = verdict.threshold;
                for (const auto& witness : verdict.witnesses) {
                    i2d::ReportWitness w;
                    w.entity = witness.entity;
                    w.item = witness.itemText;
                    w.grade = witness.grade;
                    w.present = witness.present;
                    if (witness.present)
                        w.trace = i2d::toReportTrace(
                            i2d::trace(state, diagram, witness.entity,
                                       witness.item),
                            diagram);
                    rendered.witnesses.push_back(std::move(w));
                }
                if (!verdict.satisfied) code = kExitViolations;
                report.verdicts.push_back(std::move(rendered));
            }
        }
        fillRequestedTraces(report, diagram, state, opts);
    } catch (const IoError& e) {
        return {kExitIo, std::string(e.what()) + "\n"};
    } catch (const i2d::ModelError& e) {
        if (report.diagnostics.empty())
            report.diagnostics.push_back({{0, 0}, e.what(), path});
        code = kExitModelError;
    }
    const std::string rendered = opts.jsonOutput ? i2d::renderJsonLines(report)
                                                 : i2d::renderText(report);
    return {code, rendered};
}

int runFiles(const std::vector<std::string>& files, const CommonOptions& opts,
             bool checkRequirements) {
    // Files are independent; evaluate them concurrently but keep the
    // output in argument order.
    std::vector<std::future<std::pair<int, std::string>>> futures;
    futures.reserve(files.size());
    for (const auto& path : files)
        futures.push_back(std::async(std::launch::async, runPipeline, path,
                                     opts, checkRequirements));
    int code = kExitOk;
    for (auto& future : futures) {
        auto [fileCode, output] = future.get();
        std::cout << output;
        code = std::max(code, fileCode);
    }
    return code;
}

int runTransform(const std::string& path, const std::string& scriptPath,
                 const std::string& outPath, const CommonOptions& opts) {
    i2d::RunReport report;
    report.path = path;
    try {
        i2d::Diagram diagram = loadDiagram(path, opts, report);
        const std::string scriptText = readInput(scriptPath);
        i2d::ScriptResult script =
            i2d::parseTransformScript(scriptText, scriptPath);
        if (!script.ok()) {
            for (const auto& d : script.diagnostics)
                std::cerr << d.render() << "\n";
            return kExitModelError;
        }
        for (std::size_t i = 0; i < script.transformations.size(); ++i) {
            try {
                i2d::TransformResult result =
                    i2d::applyTransform(diagram, script.transformations[i]);
                for (const auto& note : result.notes)
                    std::cerr << scriptPath << ":"
                              << script.locations[i].line << ": note: " << note
                              << "\n";
                diagram = std::move(result.diagram);
            } catch (const i2d::TransformError& e) {
                std::cerr << scriptPath << ":" << script.locations[i].line
                          << ": " << e.what() << "\n";
                return kExitModelError;
            }
        }
        writeOutput(outPath, i2d::print(diagram));
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const i2d::ModelError& e) {
        for (const auto& d : report.diagnostics)
            std::cerr << d.render() << "\n";
        if (report.diagnostics.empty()) std::cerr << e.what() << "\n";
        return kExitModelError;
    }
}

int runView(const std::string& path, const std::string& entity,
            std::size_t depth, const std::string& outPath,
            const CommonOptions& opts) {
    i2d::RunReport report;
    report.path = path;
    try {
        i2d::Diagram diagram = loadDiagram(path, opts, report);
        i2d::TransformResult result = i2d::foldView(diagram, entity, depth);
        for (const auto& note : result.notes)
            std::cerr << "note: " << note << "\n";
        writeOutput(outPath, i2d::print(result.diagram));
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const i2d::ModelError& e) {
        for (const auto& d : report.diagnostics)
            std::cerr << d.render() << "\n";
        if (report.diagnostics.empty()) std::cerr << e.what() << "\n";
        return kExitModelError;
    }
}

int runExport(const std::string& path, const std::string& format,
              bool withState, const std::string& outPath,
              const CommonOptions& opts) {
    i2d::RunReport report;
    report.path = path;
    try {
        if (format != "dot") {
            std::cerr << "unsupported export format '" << format << "'\n";
            return kExitModelError;
        }
        i2d::Diagram diagram = loadDiagram(path, opts, report);
        std::string rendered;
        if (withState) {
            i2d::EvaluationState state =
                i2d::evaluate(diagram, opts.evalConfig());
            const auto verdicts = i2d::check(state, diagram, opts.threshold);
            rendered = i2d::exportDot(diagram, &state, &verdicts);
        } else {
            rendered = i2d::exportDot(diagram);
        }
        writeOutput(outPath, rendered);
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const i2d::ModelError& e) {
        for (const auto& d : report.diagnostics)
            std::cerr << d.render() << "\n";
        if (report.diagnostics.empty()) std::cerr << e.what() << "\n";
        return kExitModelError;
    }
}

int runImportDfd(const std::string& path, const std::string& outPath) {
    try {
        const std::string text = readInput(path);
        i2d::DfdDocument document = i2d::parseDfdDocument(text);
        i2d::Diagram diagram = i2d::importDfd(document);
        writeOutput(outPath, i2d::print(diagram));
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const i2d::ModelError& e) {
        std::cerr << e.what() << "\n";
        return kExitModelError;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"information inference diagram analyzer"};
    app.require_subcommand(1);

    CommonOptions checkOpts;
    std::vector<std::string> checkFiles;
    CLI::App* check =
        app.add_subcommand("check", "evaluate and check requirements");
    check->add_option("files", checkFiles, "diagram files ('-' for stdin)")
        ->required();
    addCommonFlags(check, checkOpts, true);

    CommonOptions evalOpts;
    std::vector<std::string> evalFiles;
    CLI::App* eval =
        app.add_subcommand("eval", "evaluate and list final item sets");
    eval->add_option("files", evalFiles, "diagram files ('-' for stdin)")
        ->required();
    addCommonFlags(eval, evalOpts, false);

    CommonOptions transformOpts;
    std::string transformFile, transformScript, transformOut;
    CLI::App* transform =
        app.add_subcommand("transform", "apply a transformation script");
    transform->add_option("file", transformFile, "diagram file")->required();
    transform->add_option("script", transformScript, "transformation script")
        ->required();
    transform->add_option("-o,--output", transformOut,
                          "output file (default stdout)");
    transform->add_option("--schema-path", transformOpts.schemaPath,
                          "directory searched for imported schemata");

    CommonOptions viewOpts;
    std::string viewFile, viewEntity, viewOut;
    std::size_t viewDepth = 0;
    CLI::App* view = app.add_subcommand("view", "fold an entity to a view");
    view->add_option("file", viewFile, "diagram file")->required();
    view->add_option("entity", viewEntity, "entity to fold")->required();
    view->add_option("depth", viewDepth,
                     "fold depth (0 folds the whole subtree)");
    view->add_option("-o,--output", viewOut, "output file (default stdout)");
    view->add_option("--schema-path", viewOpts.schemaPath,
                     "directory searched for imported schemata");

    CommonOptions exportOpts;
    std::string exportFile, exportFormat = "dot", exportOut;
    bool exportWithState = false;
    CLI::App* exportCmd = app.add_subcommand("export", "render the diagram");
    exportCmd->add_option("file", exportFile, "diagram file")->required();
    exportCmd->add_option("--format", exportFormat, "output format (dot)");
    exportCmd->add_flag("--with-state", exportWithState,
                        "annotate with the evaluated state and verdicts");
    exportCmd->add_option("-o,--output", exportOut,
                          "output file (default stdout)");
    exportCmd->add_option("--schema-path", exportOpts.schemaPath,
                          "directory searched for imported schemata");
    exportCmd->add_option("--threshold", exportOpts.threshold,
                          "grade threshold for verdict highlighting")
        ->check(CLI::Range(0.0, 1.0));

    std::string importFile, importOut;
    CLI::App* importDfdCmd =
        app.add_subcommand("import-dfd", "translate a DFD JSON document");
    importDfdCmd->add_option("file", importFile, "DFD JSON file")->required();
    importDfdCmd->add_option("-o,--output", importOut,
                             "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitModelError;
    }

    if (check->parsed()) return runFiles(checkFiles, checkOpts, true);
    if (eval->parsed()) return runFiles(evalFiles, evalOpts, false);
    if (transform->parsed())
        return runTransform(transformFile, transformScript, transformOut,
                            transformOpts);
    if (view->parsed())
        return runView(viewFile, viewEntity, viewDepth, viewOut, viewOpts);
    if (exportCmd->parsed())
        return runExport(exportFile, exportFormat, exportWithState, exportOut,
                         exportOpts);
    if (importDfdCmd->parsed()) return runImportDfd(importFile, importOut);
    return kExitModelError;
}
