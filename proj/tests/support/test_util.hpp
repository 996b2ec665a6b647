#pragma once

#include <string>

#include "dflow/compile.hpp"

#ifndef DFLOW_TEST_DATA
#error "DFLOW_TEST_DATA must point at the fixture directory"
#endif

namespace dflow::testutil {

inline std::string data_path(const std::string& name) {
    return std::string(DFLOW_TEST_DATA) + "/" + name;
}

inline std::string read_fixture(const std::string& name) { return read_file(data_path(name)); }

inline const CatalogSet& fixture_catalogs() {
    static CatalogSet set = load_catalog_table(data_path("catalogs.json"));
    return set;
}

inline CompileOutput compile_fixture(const std::string& name) {
    return compile_workflow(read_fixture(name), fixture_catalogs());
}

inline CompileResult compile_fixture_collect(const std::string& name) {
    return compile_collect(read_fixture(name), fixture_catalogs());
}

}  // namespace dflow::testutil
