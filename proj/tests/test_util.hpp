#pragma once

#include <cstdlib>
#include <string>

// Directory with the checked-in reference tables; overridable so the tests
// can run from any working directory.
inline std::string test_data_dir() {
    if (const char* env = std::getenv("DBTK_TEST_DATA")) return env;
    return "data";
}
