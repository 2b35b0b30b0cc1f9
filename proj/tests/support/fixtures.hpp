// Helpers for loading fixture files in tests.
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "i2d/dsl.hpp"

namespace i2d::testing {

inline std::string fixturePath(const std::string& name) {
    return std::string(I2D_FIXTURE_DIR) + "/" + name;
}

inline std::string schemaDir() { return I2D_SCHEMA_DIR; }

inline std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Parses a fixture and fails loudly on diagnostics.
inline Diagram loadFixture(const std::string& name) {
    const std::string path = fixturePath(name);
    ParseResult result = parse(readFile(path), path);
    if (!result.ok()) {
        std::string message = "fixture " + name + " does not parse:";
        for (const auto& d : result.diagnostics) message += "\n  " + d.render();
        throw std::runtime_error(message);
    }
    return *result.diagram;
}

} // namespace i2d::testing
