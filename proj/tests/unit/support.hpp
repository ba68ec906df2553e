#pragma once

#include "atomr/bench.hpp"
#include "atomr/scripted_backend.hpp"
#include "atomr/sop.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

namespace atomr::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ATOMR_FIXTURES) / name; }
inline std::filesystem::path data_dir(const std::string& name) { return std::filesystem::path(ATOMR_DATA) / name; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json load_json(const std::filesystem::path& p) { return nlohmann::json::parse(slurp(p)); }

inline Task case_task(int n) { return task_from_json(load_json(fixture("case" + std::to_string(n) + "_problem.json"))); }

inline const SopRegistry& shipped_sops() {
    static const SopRegistry r = load_sops(data_dir("sops"));
    return r;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("atomr-test-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace atomr::test
