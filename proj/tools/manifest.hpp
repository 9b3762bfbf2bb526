#pragma once

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>

namespace ssa::cli {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Run record written next to the outputs as `<command>.manifest.json`.
/// Everything in it is a function of the inputs and parameters, so reruns
/// reproduce it byte for byte; wall-clock times go to
/// `<command>.manifest.time.json`.
class Manifest {
public:
    Manifest(std::string command, std::filesystem::path out_dir);

    void parameter(const std::string& name, nlohmann::ordered_json value);
    void seed(std::uint64_t value);
    /// Path kept exactly as given; the hash is of the file contents.
    void input(const std::string& path);
    /// Writes `bytes` to out_dir/name and records it.
    void write_output(const std::string& name, std::string_view bytes);
    /// Records a file already written under out_dir.
    void output(const std::string& name);

    const std::filesystem::path& out_dir() const noexcept { return out_dir_; }
    void finish();

private:
    std::string command_;
    std::filesystem::path out_dir_;
    nlohmann::ordered_json params_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json seed_;
    nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
    nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
    std::chrono::system_clock::time_point started_;
};

}  // namespace ssa::cli
