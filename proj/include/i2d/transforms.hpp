// Manual model transformations and views: simple additions,
// classification, entity refinement, flow bisection, and folding.
// Every transformation is a pure diagram-to-diagram function; entity
// classification rules are re-expanded afterwards so one change can
// cascade.
#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "i2d/dsl.hpp"
#include "i2d/model.hpp"

namespace i2d {

class TransformError : public ModelError {
public:
    using ModelError::ModelError;
};

struct AddItem {
    std::string entity;
    Item item;
};

struct AddEntity {
    Entity entity;      // simple
    std::string parent; // empty: top level; otherwise a complex entity
};

struct AddFlow {
    Flow flow; // simple
};

struct ClassifyEntity {
    std::string entity;
    SymbolSet classes;
};

/// Adds classes to every occurrence of the selected item identity
/// (entity item sets and flow item sets); since classes are part of
/// the identity, this rewrites the item everywhere it is declared.
struct ClassifyItem {
    ItemKey selector;
    SymbolSet classes;
};

struct ClassifyFlow {
    std::string flow;
    SymbolSet classes;
};

struct AddRule {
    Rule rule;
};

struct AddEntityRule {
    EntityRule rule;
};

struct AddRequirement {
    Requirement requirement;
};

/// Turns a simple entity into a complex one. The parent's items move
/// to the designated child; every flow touching the parent must be
/// retargeted to one of the children.
struct RefineEntity {
    std::string entity;
    std::vector<Entity> children;
    std::string itemsTo; // may stay empty when the parent held no items
    std::map<std::string, std::string> retarget; // flow name -> child
};

/// Splits a simple flow a->b into a complex flow through a mediating
/// entity: a->m and m->b, both carrying the original item set. The
/// mediator learns the mediated items it can actually receive: the
/// flow's items that the origin declares (a wildcard copies the
/// origin's whole declared set). An existing simple entity may serve
/// as mediator; its items merge by maximum grade.
struct Bisect {
    std::string flow;
    std::string mediator;
};

/// Replaces the subtree below the cut by simple entities holding the
/// max-grade union of their leaves' declared items. Depth 0 folds the
/// whole subtree; deeper cuts keep that many levels. Flows into
/// removed descendants are redirected to the fold; flows entirely
/// inside one fold are dropped (and noted).
struct FoldView {
    std::string entity;
    std::size_t depth = 0;
};

using Transformation =
    std::variant<AddItem, AddEntity, AddFlow, ClassifyEntity, ClassifyItem,
                 ClassifyFlow, AddRule, AddEntityRule, AddRequirement,
                 RefineEntity, Bisect, FoldView>;

struct TransformResult {
    Diagram diagram;
    std::vector<std::string> notes; // dropped flows, merge warnings, ...
};

/// Applies one transformation, re-expands structural rules (except for
/// views, which must not be undone by them), and validates the result.
/// Throws TransformError when parameters do not resolve or the result
/// would be invalid.
TransformResult applyTransform(const Diagram& diagram, const Transformation& t);

/// Direct forms of the structural transformations.
TransformResult refineEntity(const Diagram& diagram, const RefineEntity& spec);
TransformResult bisect(const Diagram& diagram, const std::string& flow,
                       const std::string& mediator);
TransformResult foldView(const Diagram& diagram, const std::string& entity,
                         std::size_t depth);

/// Parses a transformation script: one statement per transformation,
/// in the surface syntax of the modeling language plus
///   add item ENTITY NAME[:classes][@grade];
///   add entity NAME [: classes] [in PARENT];
///   add flow [NAME:] A -> B [: classes] [[items]];
///   classify entity NAME : classes;   classify item REF : classes;
///   classify flow NAME : classes;
///   refine ENTITY into { entity ...; } [items to CHILD]
///     [retarget FLOW -> CHILD, ...];
///   bisect FLOW MEDIATOR;   fold ENTITY [DEPTH];
struct ScriptResult {
    std::vector<Transformation> transformations;
    std::vector<SourceLoc> locations; // one per transformation
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

ScriptResult parseTransformScript(const std::string& text,
                                  const std::string& path = "");

} // namespace i2d
