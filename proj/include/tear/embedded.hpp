#pragma once

#include <optional>
#include <string_view>
#include <vector>

// Read-only copies of the data/ directory compiled into the library.
namespace tear::embedded {

// Path relative to data/, e.g. "templates/refine_beta.txt".
std::optional<std::string_view> find(std::string_view path);
std::vector<std::string_view> list();

}  // namespace tear::embedded
