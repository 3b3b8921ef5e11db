#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace occnlp {

/// 64-bit FNV-1a. Used for vocabulary and config fingerprints in model files.
class Fnv1a {
public:
    Fnv1a& update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

/// Whole file as bytes. Throws IoError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes every (path, contents) pair to a sibling temporary file, then renames
/// all of them into place. Nothing is left behind at any target if a write fails.
void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

inline void write_file_atomically(const std::filesystem::path& path, std::string contents) {
    write_files_atomically({{path, std::move(contents)}});
}

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
template <class Engine>
double uniform_unit(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace occnlp
