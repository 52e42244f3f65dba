#pragma once

#include <string_view>

namespace screening {

// Default 56-field EHR schema (81 binary columns plus label).
std::string_view bundled_schema_json();

// Clinical test attribute table with indicative costs (INR) and discomfort.
std::string_view bundled_tests_json();

}  // namespace screening
