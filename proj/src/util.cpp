#include "occnlp/util.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include "occnlp/error.hpp"

namespace occnlp {

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::filesystem::path temp_sibling(const std::filesystem::path& target) {
    static std::mt19937_64 rng{std::random_device{}()};
    auto name = target.filename().string() + ".tmp-" + to_hex(rng());
    return target.parent_path() / name;
}

}  // namespace

void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
    std::vector<std::filesystem::path> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) std::filesystem::remove(t, ec);
    };
    try {
        for (const auto& [target, contents] : files) {
            auto tmp = temp_sibling(target);
            temps.push_back(tmp);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write " + target.string());
            out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
            out.close();
            if (!out) throw IoError("short write to " + target.string());
        }
        for (std::size_t i = 0; i < files.size(); ++i) {
            std::error_code ec;
            std::filesystem::rename(temps[i], files[i].first, ec);
            if (ec) throw IoError("cannot rename into " + files[i].first.string() + ": " + ec.message());
        }
    } catch (...) {
        cleanup();
        throw;
    }
}

std::string format_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

}  // namespace occnlp
