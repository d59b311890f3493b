#pragma once

#include <gtest/gtest.h>

#include <cstdlib>
#include <string>

#include "drift/io.hpp"

namespace drift::testing {

inline std::filesystem::path golden_dir() { return std::filesystem::path(DRIFT_TEST_SOURCE_DIR) / "golden"; }

// Compares against tests/golden/<name>; DRIFT_UPDATE_GOLDEN=1 rewrites the file instead.
inline void check_golden(const std::string& name, const std::string& actual) {
    auto file = golden_dir() / name;
    if (std::getenv("DRIFT_UPDATE_GOLDEN")) {
        write_file_atomic(file, actual);
        return;
    }
    ASSERT_TRUE(std::filesystem::exists(file)) << file << " is missing; rerun with DRIFT_UPDATE_GOLDEN=1";
    EXPECT_EQ(read_text_file(file), actual) << "golden mismatch for " << name;
}

} // namespace drift::testing
