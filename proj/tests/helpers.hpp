#pragma once

// Shared helpers for the test suite: fixture loading and the
// project-management warehouse most structural tests are written against.

#include <fstream>
#include <sstream>
#include <string>

#include "xolap/xolap.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string fixture_text(const std::string& name) {
    return read_file(fixture_path(name));
}

inline xolap::SchemaSet pm_schemas() {
    return xolap::parse_schema(fixture_text("pm.schema"));
}

inline xolap::MDDataTree pm_tree(const xolap::SchemaSet& schemas) {
    return xolap::parse_warehouse(fixture_text("pm.xml"), schemas);
}

inline xolap::TreePatternQuery pm_q1(const xolap::SchemaSet& schemas) {
    return xolap::parse_query(fixture_text("q1.query"), schemas);
}

inline xolap::TreePatternQuery pm_q2(const xolap::SchemaSet& schemas) {
    return xolap::parse_query(fixture_text("q2.query"), schemas);
}

}  // namespace testutil
