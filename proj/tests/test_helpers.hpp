#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "eavit/prompt_kit.hpp"
#include "eavit/value_core.hpp"

namespace eavit::test {

inline std::filesystem::path data_dir() { return default_data_dir(); }

inline const ValueSystem& schwartz() {
    static ValueSystem system =
        ValueSystem::from_json_file(data_dir() / "schwartz_values.json");
    return system;
}

inline const TemplateLibrary& templates() {
    static TemplateLibrary lib = TemplateLibrary::load(data_dir() / "templates");
    return lib;
}

inline std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "eavit-tests";
    std::filesystem::create_directories(dir);
    auto path = dir / name;
    std::filesystem::remove(path);
    return path;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace eavit::test
