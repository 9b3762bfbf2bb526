#include "manifest.hpp"

#include "ssa/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#ifndef SSA_VERSION
#define SSA_VERSION "0.0.0"
#endif

namespace ssa::cli {

namespace fs = std::filesystem;

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw ComputationError("sha256: init failed");
    }
    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw ComputationError("sha256: update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw ComputationError("sha256: final failed");
        std::ostringstream s;
        for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
        return s.str();
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string utc_iso(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

Manifest::Manifest(std::string command, fs::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)), started_(std::chrono::system_clock::now()) {
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec || !fs::is_directory(out_dir_)) throw ValidationError("cannot create output directory '" + out_dir_.string() + "'");
}

void Manifest::parameter(const std::string& name, nlohmann::ordered_json value) { params_[name] = std::move(value); }

void Manifest::seed(std::uint64_t value) { seed_ = value; }

void Manifest::input(const std::string& path) {
    if (path.empty()) return;
    for (const auto& rec : inputs_) {
        if (rec["path"] == path) return;
    }
    nlohmann::ordered_json rec;
    rec["path"] = path;
    rec["sha256"] = sha256_file(path);
    inputs_.push_back(rec);
}

void Manifest::write_output(const std::string& name, std::string_view bytes) {
    const fs::path path = out_dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    nlohmann::ordered_json rec;
    rec["path"] = name;
    rec["sha256"] = sha256_hex(bytes);
    outputs_.push_back(rec);
}

void Manifest::output(const std::string& name) {
    nlohmann::ordered_json rec;
    rec["path"] = name;
    rec["sha256"] = sha256_file(out_dir_ / name);
    outputs_.push_back(rec);
}

void Manifest::finish() {
    nlohmann::ordered_json doc;
    doc["tool"] = "ssa";
    doc["version"] = SSA_VERSION;
    doc["command"] = command_;
    doc["parameters"] = params_;
    doc["seed"] = seed_;
    doc["inputs"] = inputs_;
    doc["outputs"] = outputs_;
    const std::string text = doc.dump(2) + "\n";
    {
        std::ofstream out(out_dir_ / (command_ + ".manifest.json"), std::ios::binary);
        out << text;
        if (!out) throw ValidationError("cannot write manifest in '" + out_dir_.string() + "'");
    }
    const auto finished = std::chrono::system_clock::now();
    nlohmann::ordered_json timing;
    timing["command"] = command_;
    timing["started"] = utc_iso(started_);
    timing["finished"] = utc_iso(finished);
    timing["elapsed_seconds"] = std::chrono::duration<double>(finished - started_).count();
    std::ofstream out(out_dir_ / (command_ + ".manifest.time.json"), std::ios::binary);
    out << timing.dump(2) << "\n";
}

}  // namespace ssa::cli
