#pragma once

#include <string_view>

// Defined in the build-generated embedded_data.cpp (see cmake/EmbedData.cmake).
namespace leakscope::data {
extern const std::string_view english_common;
extern const std::string_view gazetteer;
extern const std::string_view country_aliases;
}  // namespace leakscope::data
