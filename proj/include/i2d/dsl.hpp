// Textual surface of the diagram language: parser, canonical printer,
// and schema import resolution.
//
// Statements are keyword-led and terminated by ';'; blocks use braces.
// Multi-class annotations join class symbols with '+' so that comma can
// separate item references unambiguously:
//
//   use "protocols";
//   class entity untrusted;
//   entity Server { item c : sec; }
//   entity ISP : u+attacker;
//   flow content: Server -> Client [c:sec, meta];
//   rule kC_priv |- kC_pub;
//   rule on cl pub(x) => kC:pub+notI;
//   erule logged -> entity Audit;
//   require sec(x) not-in u;
//
// "|-", "in", "not-in", and "=>" accept the aliases "⊢", "∈", "∉",
// and "→". Omitted grades and probabilities default to 1; anonymous
// flows receive generated names.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "i2d/model.hpp"

namespace i2d {

struct SourceLoc {
    int line = 0; // 1-based; 0 when unknown
    int column = 0;
};

struct Diagnostic {
    SourceLoc loc;
    std::string message;
    std::string path; // source file, when known

    std::string render() const;
};

struct ParseResult {
    std::optional<Diagram> diagram; // absent on error
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagram.has_value() && diagnostics.empty(); }
};

/// Parses diagram text. Shorthand forms are normalized: omitted grades
/// become 1, anonymous flows get generated names, duplicate item
/// declarations merge by maximum grade.
ParseResult parse(const std::string& text, const std::string& path = "");

/// Canonical text form; parse(print(d)) is structurally equal to d.
std::string print(const Diagram& diagram);

/// Formats a grade/probability with the shortest round-tripping digits.
std::string formatGrade(double value);

class SchemaError : public ModelError {
public:
    using ModelError::ModelError;
};

/// Supplies the named schema's source text, or nullopt when unknown.
using SchemaLoader =
    std::function<std::optional<std::string>(const std::string& name)>;

/// Resolves the diagram's imports recursively: class declarations,
/// rules, and template elements of each schema are merged in. Duplicate
/// declarations are idempotent; conflicting ones raise SchemaError.
Diagram resolveImports(const Diagram& diagram, const SchemaLoader& loader);

/// Loader over filesystem directories: looks up "<name>.i2d" in each
/// search directory in order.
SchemaLoader directoryLoader(std::vector<std::string> directories);

/// Search path assembled from explicit directories, the importing
/// file's directory, and the I2D_PATH environment variable.
std::vector<std::string> schemaSearchPath(
    const std::vector<std::string>& explicitDirs,
    const std::string& importingFile);

} // namespace i2d
